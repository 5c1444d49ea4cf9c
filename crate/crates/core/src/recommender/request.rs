use serde::{Deserialize, Serialize};

use crate::data_model::BinningScheme;
use crate::knowledge_base::{Implantation, OperationalTask, PerceptionRequirement};

use super::RecommendError;

pub const REQUEST_SCHEMA: &str = "bivmap-request/1";

fn request_schema() -> String {
    REQUEST_SCHEMA.to_string()
}

/// Which dimension a task is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    Thematic,
    Uncertainty,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskAssignment {
    pub task: OperationalTask,
    pub target: Target,
}

impl TaskAssignment {
    pub fn new(task: OperationalTask, target: Target) -> Self {
        Self { task, target }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionSpec {
    pub name: String,
    pub binning: BinningScheme,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraints {
    /// `None` turns the constraint on exactly when the uncertainty dimension
    /// carries a Dissociative requirement.
    #[serde(default)]
    pub no_uncertainty_dominance: Option<bool>,
    #[serde(default)]
    pub include_uncertain_classifications: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankingWeights {
    pub intuitiveness: f64,
    pub performance: f64,
    pub preference: f64,
}

impl Default for RankingWeights {
    fn default() -> Self {
        Self {
            intuitiveness: 1.0,
            performance: 1.0,
            preference: 1.0,
        }
    }
}

impl RankingWeights {
    pub fn new(intuitiveness: f64, performance: f64, preference: f64) -> Self {
        Self {
            intuitiveness,
            performance,
            preference,
        }
    }

    pub fn validate(&self) -> Result<(), RecommendError> {
        let w = [self.intuitiveness, self.performance, self.preference];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(RecommendError::invalid(
                "ranking_weights",
                "weights must be finite and non-negative",
            ));
        }
        if w.iter().all(|x| *x == 0.0) {
            return Err(RecommendError::invalid(
                "ranking_weights",
                "at least one weight must be positive",
            ));
        }
        Ok(())
    }
}

/// One named pair of binning schemes for ensemble rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinningPair {
    pub label: String,
    pub thematic: BinningScheme,
    pub uncertainty: BinningScheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignRequest {
    #[serde(default = "request_schema")]
    pub schema: String,
    pub implantation: Implantation,
    pub thematic: DimensionSpec,
    pub uncertainty: DimensionSpec,
    pub tasks: Vec<TaskAssignment>,
    #[serde(default)]
    pub constraints: Constraints,
    #[serde(default)]
    pub ranking_weights: RankingWeights,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ensemble_schemes: Vec<BinningPair>,
}

/// Whether a task's requirement concerns the pairing (separability class)
/// rather than a single variable.
pub fn requirement_targets_pairing(requirement: PerceptionRequirement) -> bool {
    requirement.separability_class().is_some()
}

impl DesignRequest {
    /// Parses a request document, reporting the JSON path of the first bad field.
    pub fn from_json(text: &str) -> Result<Self, RecommendError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let request: DesignRequest = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." {
                "body".to_string()
            } else {
                path
            };
            RecommendError::invalid(field, e.into_inner().to_string())
        })?;
        Ok(request)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("request serializes")
    }

    /// Field-level validation beyond what parsing enforces.
    pub fn validate(
        &self,
        kb: &crate::knowledge_base::KnowledgeBase,
    ) -> Result<(), RecommendError> {
        if self.schema != REQUEST_SCHEMA {
            return Err(RecommendError::invalid(
                "schema",
                format!("expected `{REQUEST_SCHEMA}`"),
            ));
        }
        if self.tasks.is_empty() {
            return Err(RecommendError::invalid("tasks", "must be non-empty"));
        }
        for (i, t) in self.tasks.iter().enumerate() {
            let requirement = kb.task_requirement(t.task);
            let pairing_level = requirement_targets_pairing(requirement);
            if pairing_level != (t.target == Target::Both) {
                let expected = if pairing_level {
                    "Both"
                } else {
                    "Thematic or Uncertainty"
                };
                return Err(RecommendError::invalid(
                    format!("tasks[{i}].target"),
                    format!("{} ({requirement}) must target {expected}", t.task),
                ));
            }
        }
        for (field, scheme) in [
            ("thematic.binning", &self.thematic.binning),
            ("uncertainty.binning", &self.uncertainty.binning),
        ] {
            scheme
                .validate()
                .map_err(|e| RecommendError::invalid(field, e.to_string()))?;
        }
        for (i, pair) in self.ensemble_schemes.iter().enumerate() {
            for (side, scheme) in [
                ("thematic", &pair.thematic),
                ("uncertainty", &pair.uncertainty),
            ] {
                scheme.validate().map_err(|e| {
                    RecommendError::invalid(format!("ensemble_schemes[{i}].{side}"), e.to_string())
                })?;
            }
        }
        self.ranking_weights.validate()
    }

    /// The binning schemes an ensemble should cover: the explicit list, or the
    /// request's own binning as a single scheme labelled `base`.
    pub fn schemes(&self) -> Vec<BinningPair> {
        if self.ensemble_schemes.is_empty() {
            vec![BinningPair {
                label: "base".to_string(),
                thematic: self.thematic.binning.clone(),
                uncertainty: self.uncertainty.binning.clone(),
            }]
        } else {
            self.ensemble_schemes.clone()
        }
    }

    /// A copy of this request with the binning replaced by `scheme`.
    pub fn with_binning(&self, scheme: &BinningPair) -> DesignRequest {
        let mut out = self.clone();
        out.thematic.binning = scheme.thematic.clone();
        out.uncertainty.binning = scheme.uncertainty.clone();
        out.ensemble_schemes.clear();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge_base::KnowledgeBase;

    const MINIMAL: &str = r#"{
        "implantation": "Area",
        "thematic": {"name": "TSS", "binning": {"kind": "Quantile", "k": 3}},
        "uncertainty": {"name": "CV", "binning": {"kind": "Continuous"}},
        "tasks": [{"task": "Identify", "target": "Thematic"}]
    }"#;

    #[test]
    fn defaults_fill_in() {
        let r = DesignRequest::from_json(MINIMAL).unwrap();
        assert_eq!(r.schema, REQUEST_SCHEMA);
        assert_eq!(r.ranking_weights, RankingWeights::default());
        assert_eq!(r.constraints.no_uncertainty_dominance, None);
        r.validate(KnowledgeBase::bundled()).unwrap();
    }

    #[test]
    fn unknown_enum_names_the_field() {
        let bad = MINIMAL.replace("\"Identify\"", "\"Squint\"");
        let err = DesignRequest::from_json(&bad).unwrap_err();
        match err {
            RecommendError::InvalidRequest { field, .. } => assert_eq!(field, "tasks[0].task"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_tasks_message() {
        let bad = MINIMAL.replace(r#"[{"task": "Identify", "target": "Thematic"}]"#, "[]");
        let r = DesignRequest::from_json(&bad).unwrap();
        let err = r.validate(KnowledgeBase::bundled()).unwrap_err();
        assert_eq!(err.to_string(), "tasks: must be non-empty");
    }

    #[test]
    fn separability_tasks_must_target_both() {
        let bad = MINIMAL.replace(
            r#""Identify", "target": "Thematic""#,
            r#""Isolate", "target": "Thematic""#,
        );
        let r = DesignRequest::from_json(&bad).unwrap();
        assert!(r.validate(KnowledgeBase::bundled()).is_err());
        let bad = MINIMAL.replace(r#""target": "Thematic""#, r#""target": "Both""#);
        let r = DesignRequest::from_json(&bad).unwrap();
        assert!(r.validate(KnowledgeBase::bundled()).is_err());
    }

    #[test]
    fn zero_weights_rejected() {
        assert!(RankingWeights::new(0.0, 0.0, 0.0).validate().is_err());
        assert!(RankingWeights::new(0.0, -1.0, 2.0).validate().is_err());
        assert!(RankingWeights::new(0.0, 0.0, 1.0).validate().is_ok());
    }
}
