//! The sediment case study end to end: requirement profile, per-scheme
//! recommendations and the six adopted map styles.
//!
//!     cargo run -p bivmap-core --example case_study [-- outdir]

use std::path::PathBuf;

use bivmap::casestudy;
use bivmap::knowledge_base::KnowledgeBase;
use bivmap::renderer::RenderConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let outdir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("bivmap-casestudy"));
    std::fs::create_dir_all(&outdir)?;

    let bundle = casestudy::run(
        KnowledgeBase::bundled(),
        &casestudy::fixture(),
        &RenderConfig::default(),
    )?;
    let p = &bundle.report.profile;
    println!(
        "thematic {:?}\nuncertainty {:?}\npairing {:?}\n",
        p.thematic, p.uncertainty, p.pairing
    );
    for (label, report) in &bundle.scheme_reports {
        let accepted: Vec<String> = report.accepted().iter().map(|p| p.to_string()).collect();
        println!("{label}: {}", accepted.join(" "));
    }
    for (style, map) in casestudy::adopted_styles().iter().zip(&bundle.maps) {
        std::fs::write(outdir.join(&map.file_name), map.document.as_str())?;
        println!(
            "({}) {} -> {}",
            style.label, style.description, map.file_name
        );
    }
    Ok(())
}
