//! Vector output for bivariate maps and their legends.
//!
//! A [`MapStyle`] fixes every concrete parameter (ladders, mode, glyphs) so that
//! the same style and data always produce byte-identical documents.

mod ensemble;
mod request;
mod style;
mod svg;
mod symbol;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::data_model::{BinnedAttribute, BinningViolation, Classes, Dataset};
use crate::knowledge_base::{Implantation, Pairing};

pub use ensemble::{
    design_ensemble, render_ensemble, EnsembleError, EnsembleManifest, EnsembleMember,
    ManifestEntry, RenderedMap, ENSEMBLE_SCHEMA,
};
pub use request::{
    AttributeBinning, CvSpec, DatasetRef, InlineDataset, RenderRequest, RenderRequestError,
    Rendered, RENDER_SCHEMA,
};
pub use style::{
    build_style, Axis, Canvas, GlyphColour, Ladder, LadderQuantity, LevelKey, MapStyle,
    PaletteConfig, PatternGlyph, RenderConfig, RenderMode,
};
pub use svg::{
    feature_element_id, fmt_num, level_id, nine_level_advisory, path_data, CanvasTransform,
};
pub use symbol::{hsl_to_rgb, multiply, Paint};

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("{0} implantation cannot be rendered")]
    UnsupportedImplantation(Implantation),
    #[error("pairing {pairing} is not available at {implantation} implantation")]
    NotAvailable {
        pairing: Pairing,
        implantation: Implantation,
    },
    #[error("invalid ladder endpoint: {0}")]
    LadderEndpointInvalid(String),
    #[error(transparent)]
    Binning(#[from] BinningViolation),
    #[error("{dimension} classification has {got} entries for {expected} features")]
    FeatureMissingBin {
        dimension: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("style does not match the data: {0}")]
    StyleDatasetMismatch(String),
}

/// A finished SVG document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorDocument(String);

impl VectorDocument {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl std::fmt::Display for VectorDocument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn keys_for(
    binned: &BinnedAttribute,
    ladder: &Ladder,
    dimension: &'static str,
    expected: usize,
) -> Result<Vec<LevelKey>, RenderError> {
    if binned.len() != expected {
        return Err(RenderError::FeatureMissingBin {
            dimension,
            expected,
            got: binned.len(),
        });
    }
    match &binned.classes {
        Classes::Discrete {
            n_bins, indices, ..
        } => {
            if ladder.levels.len() != *n_bins {
                return Err(RenderError::StyleDatasetMismatch(format!(
                    "{dimension} ladder has {} levels but the classification has {n_bins} classes",
                    ladder.levels.len()
                )));
            }
            Ok(indices.iter().map(|&i| LevelKey::Bin(i)).collect())
        }
        Classes::Continuous { normalized, .. } => {
            if !ladder.is_continuous() {
                return Err(RenderError::StyleDatasetMismatch(format!(
                    "{dimension} ladder is discrete but the classification is continuous"
                )));
            }
            Ok(normalized
                .iter()
                .map(|&x| LevelKey::continuous(x))
                .collect())
        }
    }
}

/// Renders the map frame and its legend into one document, features in dataset order.
pub fn render_map(
    dataset: &Dataset,
    thematic: &BinnedAttribute,
    uncertainty: &BinnedAttribute,
    style: &MapStyle,
) -> Result<VectorDocument, RenderError> {
    render_with_transform(
        dataset,
        thematic,
        uncertainty,
        style,
        &CanvasTransform::fit(dataset.bbox(), style.canvas),
    )
}

pub(crate) fn render_with_transform(
    dataset: &Dataset,
    thematic: &BinnedAttribute,
    uncertainty: &BinnedAttribute,
    style: &MapStyle,
    transform: &CanvasTransform,
) -> Result<VectorDocument, RenderError> {
    if dataset.implantation != style.implantation {
        return Err(RenderError::StyleDatasetMismatch(format!(
            "style is for {} implantation, dataset is {}",
            style.implantation, dataset.implantation
        )));
    }
    let n = dataset.len();
    let kt = keys_for(thematic, &style.thematic_ladder, "thematic", n)?;
    let ku = keys_for(uncertainty, &style.uncertainty_ladder, "uncertainty", n)?;

    let mut used: BTreeSet<(LevelKey, LevelKey)> =
        kt.iter().copied().zip(ku.iter().copied()).collect();
    used.extend(svg::legend_keys(style));

    let width = style.canvas.width + svg::LEGEND_WIDTH;
    let height = style.canvas.height.max(svg::legend_height(style) + 40.0);
    let mut out = String::new();
    svg::document_open(&mut out, width, height, style);
    out.push_str("<defs>\n");
    for &(t, u) in &used {
        svg::write_level_defs(&mut out, style, t, u);
    }
    out.push_str("</defs>\n<g id=\"map\" class=\"map\">\n");
    for ((feature, &t), &u) in dataset.features.iter().zip(&kt).zip(&ku) {
        svg::feature_element(
            &mut out,
            style,
            &feature.id,
            &feature.geometry,
            t,
            u,
            transform,
        );
    }
    out.push_str("</g>\n");
    out.push_str(&svg::legend_group(style, style.canvas.width + 10.0, 20.0));
    out.push_str("</svg>\n");
    Ok(VectorDocument(out))
}

/// Renders the legend alone.
pub fn render_legend(style: &MapStyle) -> VectorDocument {
    let keys = svg::legend_keys(style);
    let width = svg::LEGEND_WIDTH;
    let height = svg::legend_height(style) + 20.0;
    let mut out = String::new();
    svg::document_open(&mut out, width, height, style);
    out.push_str("<defs>\n");
    for &(t, u) in &keys {
        svg::write_level_defs(&mut out, style, t, u);
    }
    out.push_str("</defs>\n");
    out.push_str(&svg::legend_group(style, 10.0, 10.0));
    out.push_str("</svg>\n");
    VectorDocument(out)
}
