use serde::{Deserialize, Serialize};

use crate::knowledge_base::{Implantation, KnowledgeBase, SelectiveLength, VisualVariable};

use super::DataError;

/// How an attribute is classified before it is symbolised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum BinningScheme {
    /// Fixed class edges; a value equal to an edge falls in the upper class.
    Threshold { edges: Vec<f64> },
    /// `k` classes cut at empirical rank positions.
    Quantile { k: usize },
    /// Min-max normalised, unclassed.
    Continuous,
}

impl BinningScheme {
    pub fn validate(&self) -> Result<(), DataError> {
        match self {
            BinningScheme::Threshold { edges } => check_edges(edges),
            BinningScheme::Quantile { k } if *k < 2 => Err(DataError::BadK(*k)),
            _ => Ok(()),
        }
    }

    /// Number of classes, `None` for continuous schemes.
    pub fn n_bins(&self) -> Option<usize> {
        match self {
            BinningScheme::Threshold { edges } => Some(edges.len() + 1),
            BinningScheme::Quantile { k } => Some(*k),
            BinningScheme::Continuous => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.n_bins().is_some()
    }

    /// Short human label, e.g. `threshold(837, 2204)`.
    pub fn label(&self) -> String {
        match self {
            BinningScheme::Threshold { edges } => {
                let e: Vec<String> = edges.iter().map(|v| v.to_string()).collect();
                format!("threshold({})", e.join(", "))
            }
            BinningScheme::Quantile { k } => format!("quantile({k})"),
            BinningScheme::Continuous => "continuous".to_string(),
        }
    }
}

fn check_edges(edges: &[f64]) -> Result<(), DataError> {
    if edges.iter().any(|e| !e.is_finite()) {
        return Err(DataError::NonFinite);
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DataError::NonMonotonicEdges);
    }
    Ok(())
}

fn check_values(values: &[f64]) -> Result<(), DataError> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(DataError::NonFinite);
    }
    Ok(())
}

/// Classifies against fixed edges: below the first edge is class 0, at or above
/// the last edge is class `edges.len()`.
pub fn bin_threshold(values: &[f64], edges: &[f64]) -> Result<Vec<usize>, DataError> {
    check_edges(edges)?;
    check_values(values)?;
    Ok(values
        .iter()
        .map(|x| edges.partition_point(|e| e <= x))
        .collect())
}

/// The `k - 1` cut values: cut `j` is the sorted value at 1-based rank `ceil(j * n / k)`.
pub fn quantile_cuts(values: &[f64], k: usize) -> Result<Vec<f64>, DataError> {
    if k < 2 {
        return Err(DataError::BadK(k));
    }
    if values.is_empty() {
        return Err(DataError::EmptyValues);
    }
    check_values(values)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok((1..k)
        .map(|j| {
            let rank = (j * n).div_ceil(k).max(1);
            sorted[rank - 1]
        })
        .collect())
}

/// Quantile classes. A value equal to a cut stays in the lower class, so all-equal
/// input lands entirely in class 0.
pub fn bin_quantile(values: &[f64], k: usize) -> Result<Vec<usize>, DataError> {
    let cuts = quantile_cuts(values, k)?;
    Ok(values
        .iter()
        .map(|x| cuts.partition_point(|c| c < x))
        .collect())
}

/// Min-max normalisation to `[0, 1]`. Constant input maps to 0.
pub fn normalize_continuous(values: &[f64]) -> Result<(Vec<f64>, f64, f64), DataError> {
    if values.is_empty() {
        return Err(DataError::EmptyValues);
    }
    check_values(values)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let normalized = values
        .iter()
        .map(|x| if span > 0.0 { (x - min) / span } else { 0.0 })
        .collect();
    Ok((normalized, min, max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Classes {
    Discrete {
        n_bins: usize,
        /// Class boundaries used for legend labels (`n_bins - 1` values).
        breaks: Vec<f64>,
        indices: Vec<usize>,
    },
    Continuous {
        min: f64,
        max: f64,
        normalized: Vec<f64>,
    },
}

/// One attribute classified under a scheme, in dataset feature order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedAttribute {
    pub name: String,
    pub scheme: BinningScheme,
    pub classes: Classes,
}

impl BinnedAttribute {
    pub fn classify(
        name: impl Into<String>,
        values: &[f64],
        scheme: &BinningScheme,
    ) -> Result<Self, DataError> {
        scheme.validate()?;
        let classes = match scheme {
            BinningScheme::Threshold { edges } => Classes::Discrete {
                n_bins: edges.len() + 1,
                breaks: edges.clone(),
                indices: bin_threshold(values, edges)?,
            },
            BinningScheme::Quantile { k } => Classes::Discrete {
                n_bins: *k,
                breaks: quantile_cuts(values, *k)?,
                indices: bin_quantile(values, *k)?,
            },
            BinningScheme::Continuous => {
                let (normalized, min, max) = normalize_continuous(values)?;
                Classes::Continuous {
                    min,
                    max,
                    normalized,
                }
            }
        };
        Ok(Self {
            name: name.into(),
            scheme: scheme.clone(),
            classes,
        })
    }

    pub fn n_bins(&self) -> Option<usize> {
        match &self.classes {
            Classes::Discrete { n_bins, .. } => Some(*n_bins),
            Classes::Continuous { .. } => None,
        }
    }

    pub fn len(&self) -> usize {
        match &self.classes {
            Classes::Discrete { indices, .. } => indices.len(),
            Classes::Continuous { normalized, .. } => normalized.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum BinningViolation {
    #[error("Violation({n_bins} > {max}): {variable} supports at most {max} distinguishable levels at {implantation} implantation")]
    Violation {
        variable: VisualVariable,
        implantation: Implantation,
        n_bins: usize,
        max: u32,
    },
    #[error("{variable} is unavailable at {implantation} implantation")]
    UnavailableVariable {
        variable: VisualVariable,
        implantation: Implantation,
    },
}

/// Checks a discrete scheme against the variable's selective length. Continuous
/// schemes are always accepted.
pub fn validate_binning(
    kb: &KnowledgeBase,
    variable: VisualVariable,
    implantation: Implantation,
    scheme: &BinningScheme,
) -> Result<(), BinningViolation> {
    let Some(n_bins) = scheme.n_bins() else {
        return Ok(());
    };
    match kb.selective_length(variable, implantation).length {
        SelectiveLength::Unavailable => Err(BinningViolation::UnavailableVariable {
            variable,
            implantation,
        }),
        SelectiveLength::Levels(max) if n_bins > max as usize => Err(BinningViolation::Violation {
            variable,
            implantation,
            n_bins,
            max,
        }),
        SelectiveLength::Levels(_) => Ok(()),
    }
}
