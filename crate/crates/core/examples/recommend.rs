//! Run the recommender on a request read from a JSON file (defaults to the
//! bundled case-study request) and print the summary and ranking.
//!
//!     cargo run -p bivmap-core --example recommend [-- request.json]

use bivmap::casestudy;
use bivmap::knowledge_base::KnowledgeBase;
use bivmap::recommender::{recommend, DesignRequest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => casestudy::REQUEST_JSON.to_string(),
    };
    let request = DesignRequest::from_json(&text)?;
    let report = recommend(KnowledgeBase::bundled(), &request)?;

    println!("{}", report.summary());
    for c in report.candidates.iter().filter(|c| !c.accepted()) {
        if let Some(check) = c.first_failure() {
            println!(
                "rejected {:<24} {:?}: {}",
                c.pairing.to_string(),
                check.rule,
                check.detail
            );
        }
    }
    for r in &report.ranked {
        println!("#{} {} score {:.3}", r.rank, r.pairing, r.score);
    }
    Ok(())
}
