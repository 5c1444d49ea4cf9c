//! Render legends alone: a 3x3 value/blur grid and a threshold/continuous
//! size/transparency legend with a gradient bar.
//!
//!     cargo run -p bivmap-core --example legend

use bivmap::casestudy;
use bivmap::data_model::BinningScheme;
use bivmap::knowledge_base::{Implantation, KnowledgeBase, Pairing, VisualVariable::*};
use bivmap::renderer::{build_style, render_legend, RenderConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kb = KnowledgeBase::bundled();
    let dataset = casestudy::fixture();
    let thresholds = BinningScheme::Threshold {
        edges: casestudy::TSS_THRESHOLDS.to_vec(),
    };
    let thematic = dataset.classify("TSS_mean", &thresholds)?;

    for (pairing, scheme, name) in [
        (
            Pairing::new(Value, Blur),
            BinningScheme::Quantile { k: 3 },
            "legend-value-blur.svg",
        ),
        (
            Pairing::new(Size, Transparency),
            BinningScheme::Continuous,
            "legend-size-transparency.svg",
        ),
    ] {
        let uncertainty = dataset.classify("CV", &scheme)?;
        let style = build_style(
            kb,
            pairing,
            Implantation::Area,
            &thematic,
            &uncertainty,
            &RenderConfig::default(),
        )?;
        let path = std::env::temp_dir().join(name);
        std::fs::write(&path, render_legend(&style).as_str())?;
        println!(
            "{pairing}: {} x {} -> {}",
            style.thematic_axis.labels.join(" | "),
            style.uncertainty_axis.labels.join(" | "),
            path.display()
        );
    }
    Ok(())
}
