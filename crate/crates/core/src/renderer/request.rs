use serde::{Deserialize, Serialize};

use crate::data_model::{
    load_dataset, AttributeTable, BinnedAttribute, BinningScheme, DataError, Dataset,
};
use crate::knowledge_base::{KnowledgeBase, Pairing};

use super::{
    build_style, render_legend, render_map, MapStyle, RenderConfig, RenderError, VectorDocument,
};

pub const RENDER_SCHEMA: &str = "bivmap-render/1";

fn render_schema() -> String {
    RENDER_SCHEMA.to_string()
}

/// A feature collection supplied in the request body, with an optional CSV join.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineDataset {
    pub geojson: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attributes_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub join_key: Option<String>,
}

impl InlineDataset {
    pub fn load(&self) -> Result<Dataset, DataError> {
        let table = self
            .attributes_csv
            .as_deref()
            .map(AttributeTable::from_csv)
            .transpose()?;
        load_dataset(
            &self.geojson.to_string(),
            table.as_ref(),
            self.join_key.as_deref(),
        )
    }
}

/// Where the features come from: inlined, or a previously uploaded content hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetRef {
    Inline(InlineDataset),
    Id(String),
}

/// Derives `name = sd / mean` before classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvSpec {
    pub name: String,
    pub mean: String,
    pub sd: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeBinning {
    pub attribute: String,
    pub binning: BinningScheme,
}

/// Everything needed to reproduce one map document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderRequest {
    #[serde(default = "render_schema")]
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetRef>,
    pub pairing: Pairing,
    pub thematic: AttributeBinning,
    pub uncertainty: AttributeBinning,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_of_variation: Option<CvSpec>,
    #[serde(default)]
    pub config: RenderConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum RenderRequestError {
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Render(#[from] RenderError),
}

/// A rendered request: the resolved style plus the classified attributes.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub style: MapStyle,
    pub thematic: BinnedAttribute,
    pub uncertainty: BinnedAttribute,
    pub document: VectorDocument,
}

impl RenderRequest {
    pub fn from_json(text: &str) -> Result<Self, RenderRequestError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let request: RenderRequest = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            RenderRequestError::Invalid {
                field: if path == "." {
                    "body".to_string()
                } else {
                    path
                },
                message: e.into_inner().to_string(),
            }
        })?;
        if request.schema != RENDER_SCHEMA {
            return Err(RenderRequestError::Invalid {
                field: "schema".to_string(),
                message: format!("expected `{RENDER_SCHEMA}`"),
            });
        }
        Ok(request)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("render request serializes")
    }

    /// Applies the CV derivation (if any), classifies both attributes and builds the style.
    pub fn prepare(
        &self,
        kb: &KnowledgeBase,
        dataset: &Dataset,
    ) -> Result<(Dataset, BinnedAttribute, BinnedAttribute, MapStyle), RenderRequestError> {
        let dataset = match &self.coefficient_of_variation {
            Some(cv) => dataset
                .clone()
                .with_coefficient_of_variation(&cv.name, &cv.mean, &cv.sd)?,
            None => dataset.clone(),
        };
        let thematic = dataset.classify(&self.thematic.attribute, &self.thematic.binning)?;
        let uncertainty =
            dataset.classify(&self.uncertainty.attribute, &self.uncertainty.binning)?;
        let style = build_style(
            kb,
            self.pairing,
            dataset.implantation,
            &thematic,
            &uncertainty,
            &self.config,
        )?;
        Ok((dataset, thematic, uncertainty, style))
    }

    pub fn render_map(
        &self,
        kb: &KnowledgeBase,
        dataset: &Dataset,
    ) -> Result<Rendered, RenderRequestError> {
        let (dataset, thematic, uncertainty, style) = self.prepare(kb, dataset)?;
        let document = render_map(&dataset, &thematic, &uncertainty, &style)?;
        Ok(Rendered {
            style,
            thematic,
            uncertainty,
            document,
        })
    }

    pub fn render_legend(
        &self,
        kb: &KnowledgeBase,
        dataset: &Dataset,
    ) -> Result<Rendered, RenderRequestError> {
        let (_, thematic, uncertainty, style) = self.prepare(kb, dataset)?;
        let document = render_legend(&style);
        Ok(Rendered {
            style,
            thematic,
            uncertainty,
            document,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casestudy;

    fn request() -> RenderRequest {
        RenderRequest::from_json(
            r#"{
                "pairing": {"thematic": "Value", "uncertainty": "Blur"},
                "thematic": {"attribute": "TSS_mean", "binning": {"kind": "Threshold", "edges": [837, 2204]}},
                "uncertainty": {"attribute": "CV", "binning": {"kind": "Quantile", "k": 3}},
                "coefficient_of_variation": {"name": "CV", "mean": "TSS_mean", "sd": "TSS_sd"}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn renders_from_raw_fixture() {
        let raw = load_dataset(casestudy::FIXTURE_GEOJSON, None, Some("subcatchment")).unwrap();
        let out = request()
            .render_map(KnowledgeBase::bundled(), &raw)
            .unwrap();
        assert_eq!(
            out.document.as_str().matches("class=\"feature\"").count(),
            40
        );
        let legend = request()
            .render_legend(KnowledgeBase::bundled(), &raw)
            .unwrap();
        assert_eq!(
            legend.document.as_str().matches("class=\"swatch\"").count(),
            9
        );
    }

    #[test]
    fn json_round_trip() {
        let r = request();
        assert_eq!(RenderRequest::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn bad_field_is_named() {
        let err = RenderRequest::from_json(
            r#"{"pairing": {"thematic": "Hue", "uncertainty": "Blur"},
                "thematic": {"attribute": "a", "binning": {"kind": "Continuous"}},
                "uncertainty": {"attribute": "b", "binning": {"kind": "Continuous"}}}"#,
        )
        .unwrap_err();
        match err {
            RenderRequestError::Invalid { field, .. } => assert_eq!(field, "pairing.thematic"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn blur_four_bins_is_a_violation() {
        let mut r = request();
        r.uncertainty.binning = BinningScheme::Quantile { k: 4 };
        let err = r
            .render_map(KnowledgeBase::bundled(), &casestudy::fixture())
            .unwrap_err();
        assert!(err.to_string().starts_with("Violation(4 > 3)"), "{err}");
    }
}
