//! Render one bivariate map (value fill with size dots overlaid) to SVG.
//!
//!     cargo run -p bivmap-core --example render_map [-- out.svg]

use bivmap::casestudy;
use bivmap::data_model::BinningScheme;
use bivmap::knowledge_base::{Implantation, KnowledgeBase, Pairing, VisualVariable};
use bivmap::renderer::{build_style, render_map, RenderConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("bivmap-map.svg")
            .display()
            .to_string()
    });

    let dataset = casestudy::fixture();
    let thematic = dataset.classify("TSS_mean", &BinningScheme::Quantile { k: 5 })?;
    let uncertainty = dataset.classify("CV", &BinningScheme::Quantile { k: 5 })?;

    let mut config = RenderConfig::default();
    config.palette.hue = Some(210.0);
    config.palette.pattern_overlay = true;
    let pairing = Pairing::new(VisualVariable::Value, VisualVariable::Size);
    let style = build_style(
        KnowledgeBase::bundled(),
        pairing,
        Implantation::Area,
        &thematic,
        &uncertainty,
        &config,
    )?;

    let doc = render_map(&dataset, &thematic, &uncertainty, &style)?;
    std::fs::write(&out, doc.as_str())?;
    println!(
        "{:?} map, {} bytes -> {out}",
        style.mode,
        doc.as_str().len()
    );
    Ok(())
}
