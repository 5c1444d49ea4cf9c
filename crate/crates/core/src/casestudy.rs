//! The sediment case study: a synthetic sub-catchment fixture, the three binning
//! schemes, the design request, and the six adopted map styles.

use serde::{Deserialize, Serialize};

use crate::data_model::{load_dataset, BinningScheme, Dataset};
use crate::knowledge_base::{
    Implantation, KnowledgeBase, OperationalTask, Pairing, VisualVariable,
};
use crate::recommender::{
    recommend, BinningPair, Constraints, DesignRequest, DimensionSpec, RankingWeights,
    RecommendationReport, Target, TaskAssignment, REQUEST_SCHEMA,
};
use crate::renderer::{
    build_style, render_ensemble, EnsembleError, EnsembleManifest, EnsembleMember, RenderConfig,
    RenderedMap,
};

/// Synthetic stand-in for the sub-catchment estimates: 40 polygons with
/// `TSS_mean` and `TSS_sd` properties (mg/L), keyed by `subcatchment`.
pub const FIXTURE_GEOJSON: &str = include_str!("../data/case_study_fixture.geojson");

/// The case-study request as a JSON document.
pub const REQUEST_JSON: &str = include_str!("../data/case_study_request.json");

/// Thresholds of concern for total suspended sediment, mg/L.
pub const TSS_THRESHOLDS: [f64; 2] = [837.0, 2204.0];

pub const THEMATIC_ATTRIBUTE: &str = "TSS_mean";
pub const SD_ATTRIBUTE: &str = "TSS_sd";
pub const UNCERTAINTY_ATTRIBUTE: &str = "CV";

fn thresholds() -> BinningScheme {
    BinningScheme::Threshold {
        edges: TSS_THRESHOLDS.to_vec(),
    }
}

/// Scheme 1: thresholds with continuous CV; 2: five quantiles of each;
/// 3: thresholds with three CV quantiles.
pub fn binning_schemes() -> Vec<BinningPair> {
    vec![
        BinningPair {
            label: "scheme1".to_string(),
            thematic: thresholds(),
            uncertainty: BinningScheme::Continuous,
        },
        BinningPair {
            label: "scheme2".to_string(),
            thematic: BinningScheme::Quantile { k: 5 },
            uncertainty: BinningScheme::Quantile { k: 5 },
        },
        BinningPair {
            label: "scheme3".to_string(),
            thematic: thresholds(),
            uncertainty: BinningScheme::Quantile { k: 3 },
        },
    ]
}

pub fn tasks() -> Vec<TaskAssignment> {
    use OperationalTask::*;
    vec![
        TaskAssignment::new(RankCompare, Target::Thematic),
        TaskAssignment::new(Locate, Target::Thematic),
        TaskAssignment::new(RankCompare, Target::Uncertainty),
        TaskAssignment::new(WeightedDistribution, Target::Uncertainty),
        TaskAssignment::new(WeightedInterpretation, Target::Uncertainty),
        TaskAssignment::new(Isolate, Target::Both),
    ]
}

/// The case-study request; its own binning is scheme 3.
pub fn request() -> DesignRequest {
    DesignRequest {
        schema: REQUEST_SCHEMA.to_string(),
        implantation: Implantation::Area,
        thematic: DimensionSpec {
            name: THEMATIC_ATTRIBUTE.to_string(),
            binning: thresholds(),
        },
        uncertainty: DimensionSpec {
            name: UNCERTAINTY_ATTRIBUTE.to_string(),
            binning: BinningScheme::Quantile { k: 3 },
        },
        tasks: tasks(),
        constraints: Constraints::default(),
        ranking_weights: RankingWeights::default(),
        ensemble_schemes: binning_schemes(),
    }
}

/// Loads the bundled fixture (or any document of the same shape) and derives CV.
pub fn load_fixture(geojson: &str) -> Result<Dataset, crate::data_model::DataError> {
    load_dataset(geojson, None, Some("subcatchment"))?.with_coefficient_of_variation(
        UNCERTAINTY_ATTRIBUTE,
        THEMATIC_ATTRIBUTE,
        SD_ATTRIBUTE,
    )
}

pub fn fixture() -> Dataset {
    load_fixture(FIXTURE_GEOJSON).expect("bundled fixture is valid")
}

/// One adopted style: map label, scheme index into [`binning_schemes`], pairing,
/// and whether glyphs are overlaid on the fill.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdoptedStyle {
    pub label: char,
    pub scheme: usize,
    pub pairing: Pairing,
    pub overlay: bool,
    pub description: &'static str,
}

pub fn adopted_styles() -> [AdoptedStyle; 6] {
    use VisualVariable::*;
    let s = |label, scheme, t, u, overlay, description| AdoptedStyle {
        label,
        scheme,
        pairing: Pairing::new(t, u),
        overlay,
        description,
    };
    [
        s(
            'a',
            0,
            Size,
            Transparency,
            false,
            "Pattern with variable size and transparency",
        ),
        s(
            'b',
            1,
            Value,
            Size,
            false,
            "Pattern with variable value and size",
        ),
        s(
            'c',
            1,
            Value,
            Size,
            true,
            "Pattern of variable size (black) overlaid on fill of variable value",
        ),
        s(
            'd',
            2,
            Value,
            Blur,
            false,
            "Fill with variable value and blur",
        ),
        s(
            'e',
            2,
            Value,
            Size,
            false,
            "Pattern with variable value and size",
        ),
        s(
            'f',
            2,
            Size,
            Value,
            false,
            "Pattern with variable size and value",
        ),
    ]
}

fn slug(v: VisualVariable) -> String {
    v.name().to_ascii_lowercase()
}

/// Builds the six adopted styles over `dataset`, labelled `a-size-transparency` etc.
pub fn adopted_members(
    kb: &KnowledgeBase,
    dataset: &Dataset,
    config: &RenderConfig,
) -> Result<Vec<EnsembleMember>, EnsembleError> {
    let schemes = binning_schemes();
    adopted_styles()
        .iter()
        .map(|a| {
            let scheme = &schemes[a.scheme];
            let thematic = dataset.classify(THEMATIC_ATTRIBUTE, &scheme.thematic)?;
            let uncertainty = dataset.classify(UNCERTAINTY_ATTRIBUTE, &scheme.uncertainty)?;
            let mut config = config.clone();
            config.palette.pattern_overlay = a.overlay;
            let style = build_style(
                kb,
                a.pairing,
                Implantation::Area,
                &thematic,
                &uncertainty,
                &config,
            )?;
            Ok(EnsembleMember {
                label: format!(
                    "{}-{}-{}",
                    a.label,
                    slug(a.pairing.thematic),
                    slug(a.pairing.uncertainty)
                ),
                thematic,
                uncertainty,
                style,
            })
        })
        .collect()
}

/// Everything the case-study run produces.
#[derive(Debug, Clone)]
pub struct CaseStudyBundle {
    /// Recommendation under the request's own binning (scheme 3).
    pub report: RecommendationReport,
    /// One report per binning scheme, in scheme order.
    pub scheme_reports: Vec<(String, RecommendationReport)>,
    pub maps: Vec<RenderedMap>,
    pub manifest: EnsembleManifest,
}

pub fn run(
    kb: &KnowledgeBase,
    dataset: &Dataset,
    config: &RenderConfig,
) -> Result<CaseStudyBundle, EnsembleError> {
    let req = request();
    let report = recommend(kb, &req)?;
    let scheme_reports = req
        .schemes()
        .iter()
        .map(|s| Ok((s.label.clone(), recommend(kb, &req.with_binning(s))?)))
        .collect::<Result<Vec<_>, EnsembleError>>()?;
    let members = adopted_members(kb, dataset, config)?;
    let (maps, manifest) = render_ensemble(dataset, &members)?;
    Ok(CaseStudyBundle {
        report,
        scheme_reports,
        maps,
        manifest,
    })
}
