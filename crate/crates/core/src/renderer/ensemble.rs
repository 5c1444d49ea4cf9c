use serde::{Deserialize, Serialize};

use crate::data_model::{BinnedAttribute, BinningScheme, DataError, Dataset};
use crate::knowledge_base::{KnowledgeBase, Pairing};
use crate::recommender::{recommend, DesignRequest, RecommendError};

use super::{
    build_style, render_with_transform, Canvas, CanvasTransform, MapStyle, RenderConfig,
    RenderError, RenderMode, VectorDocument,
};

pub const ENSEMBLE_SCHEMA: &str = "bivmap-ensemble/1";

/// One map of an ensemble: its file label, classifications and style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub label: String,
    pub thematic: BinnedAttribute,
    pub uncertainty: BinnedAttribute,
    pub style: MapStyle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedMap {
    pub file_name: String,
    pub label: String,
    pub document: VectorDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEntry {
    pub attribute: String,
    pub scheme: BinningScheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub label: String,
    pub pairing: Pairing,
    pub mode: RenderMode,
    pub thematic: DimensionEntry,
    pub uncertainty: DimensionEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub schema: String,
    pub canvas: Canvas,
    pub transform: CanvasTransform,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum EnsembleError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Recommend(#[from] RecommendError),
    #[error(transparent)]
    Render(#[from] RenderError),
}

/// Renders several styles over one dataset with a shared canvas and scaling.
/// Every member must use the same canvas size.
pub fn render_ensemble(
    dataset: &Dataset,
    members: &[EnsembleMember],
) -> Result<(Vec<RenderedMap>, EnsembleManifest), RenderError> {
    let canvas = members.first().map(|m| m.style.canvas).unwrap_or_default();
    if let Some(m) = members.iter().find(|m| m.style.canvas != canvas) {
        return Err(RenderError::StyleDatasetMismatch(format!(
            "member `{}` uses a different canvas",
            m.label
        )));
    }
    let transform = CanvasTransform::fit(dataset.bbox(), canvas);
    let mut maps = Vec::with_capacity(members.len());
    let mut entries = Vec::with_capacity(members.len());
    for m in members {
        let document =
            render_with_transform(dataset, &m.thematic, &m.uncertainty, &m.style, &transform)?;
        let file_name = format!("{}.svg", m.label);
        entries.push(ManifestEntry {
            file: file_name.clone(),
            label: m.label.clone(),
            pairing: m.style.pairing,
            mode: m.style.mode,
            thematic: DimensionEntry {
                attribute: m.thematic.name.clone(),
                scheme: m.thematic.scheme.clone(),
            },
            uncertainty: DimensionEntry {
                attribute: m.uncertainty.name.clone(),
                scheme: m.uncertainty.scheme.clone(),
            },
        });
        maps.push(RenderedMap {
            file_name,
            label: m.label.clone(),
            document,
        });
    }
    Ok((
        maps,
        EnsembleManifest {
            schema: ENSEMBLE_SCHEMA.to_string(),
            canvas,
            transform,
            entries,
        },
    ))
}

fn slug(text: &str) -> String {
    text.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect()
}

/// Recommends pairings under each binning scheme of the request and builds one
/// member per accepted pairing, labelled `<scheme>-<thematic>-<uncertainty>`.
/// Members follow scheme order, then rank order.
pub fn design_ensemble(
    kb: &KnowledgeBase,
    dataset: &Dataset,
    request: &DesignRequest,
    config: &RenderConfig,
) -> Result<Vec<EnsembleMember>, EnsembleError> {
    let mut members = Vec::new();
    for scheme in request.schemes() {
        let sub = request.with_binning(&scheme);
        let report = recommend(kb, &sub)?;
        if report.ranked.is_empty() {
            continue;
        }
        let thematic = dataset.classify(&request.thematic.name, &scheme.thematic)?;
        let uncertainty = dataset.classify(&request.uncertainty.name, &scheme.uncertainty)?;
        for ranked in &report.ranked {
            let p = ranked.pairing;
            let style = build_style(kb, p, request.implantation, &thematic, &uncertainty, config)?;
            members.push(EnsembleMember {
                label: format!(
                    "{}-{}-{}",
                    slug(&scheme.label),
                    slug(p.thematic.name()),
                    slug(p.uncertainty.name())
                ),
                thematic: thematic.clone(),
                uncertainty: uncertainty.clone(),
                style,
            });
        }
    }
    Ok(members)
}
