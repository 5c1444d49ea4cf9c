//! Design an ensemble: recommend under every binning scheme of the request and
//! render each accepted pairing with shared scaling, plus a manifest.
//!
//!     cargo run -p bivmap-core --example ensemble [-- outdir]

use std::path::PathBuf;

use bivmap::casestudy;
use bivmap::knowledge_base::KnowledgeBase;
use bivmap::renderer::{design_ensemble, render_ensemble, RenderConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let outdir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("bivmap-ensemble"));
    std::fs::create_dir_all(&outdir)?;

    let dataset = casestudy::fixture();
    let members = design_ensemble(
        KnowledgeBase::bundled(),
        &dataset,
        &casestudy::request(),
        &RenderConfig::default(),
    )?;
    let (maps, manifest) = render_ensemble(&dataset, &members)?;
    for map in &maps {
        std::fs::write(outdir.join(&map.file_name), map.document.as_str())?;
    }
    std::fs::write(
        outdir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    println!(
        "{} maps in {} (scale {:.3})",
        maps.len(),
        outdir.display(),
        manifest.transform.scale
    );
    Ok(())
}
