//! Query the bundled rule tables: properties, selective lengths, availability
//! and separability, plus the checksum that reports embed.
//!
//!     cargo run -p bivmap-core --example rule_tables

use bivmap::knowledge_base::{Implantation, KnowledgeBase, VisualVariable};

fn main() {
    let kb = KnowledgeBase::bundled();
    println!(
        "rules revision {} checksum {}",
        kb.revision(),
        kb.checksum()
    );

    for v in VisualVariable::ALL {
        let p = kb.variable_properties(v);
        let lengths: Vec<String> = Implantation::ALL
            .iter()
            .map(|&i| match kb.selective_length(v, i).length.levels() {
                Some(n) => format!("{i}={n}"),
                None => format!("{i}=-"),
            })
            .collect();
        println!(
            "{v:<13} selective={} associative={} ordered={} quantitative={}  {}",
            p.selective,
            p.associative,
            p.ordered,
            p.quantitative,
            lengths.join(" ")
        );
    }

    for i in Implantation::ALL {
        let pairings = kb.enumerate_pairings(i);
        println!("\n{i}: {} available pairings", pairings.len());
        for e in pairings {
            let class = kb
                .separability_class(e.thematic, e.uncertainty, i)
                .map(|s| {
                    format!(
                        "{:?}{}",
                        s.class,
                        if s.uncertain_not_recommended {
                            " (uncertain)"
                        } else {
                            ""
                        }
                    )
                })
                .unwrap_or_else(|_| "unclassified".to_string());
            println!("  {:<24} {class}", e.pairing().to_string());
        }
    }
}
