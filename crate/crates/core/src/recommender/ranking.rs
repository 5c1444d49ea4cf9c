//! Step-5 ordering of accepted pairings by evidence about uncertainty cues.

use serde::{Deserialize, Serialize};

use crate::knowledge_base::{Pairing, VisualVariable};

use super::{RankingWeights, RecommendError};

use VisualVariable::*;

/// A ranked list of uncertainty cues; each tier is a group of tied variables.
/// Variables not listed share the final tier.
#[derive(Debug, Clone, Copy)]
pub struct EvidenceOrdering {
    pub name: &'static str,
    pub tiers: &'static [&'static [VisualVariable]],
}

/// Blur, then value, then size are the most intuitive uncertainty cues.
pub const INTUITIVENESS: EvidenceOrdering = EvidenceOrdering {
    name: "intuitiveness",
    tiers: &[&[Blur], &[Value], &[Size]],
};

/// Value performs best, followed equally by blur and transparency.
pub const PERFORMANCE: EvidenceOrdering = EvidenceOrdering {
    name: "performance",
    tiers: &[&[Value], &[Blur, Transparency]],
};

/// Users prefer saturation, then blur, then value.
pub const PREFERENCE: EvidenceOrdering = EvidenceOrdering {
    name: "preference",
    tiers: &[&[Saturation], &[Blur], &[Value]],
};

impl EvidenceOrdering {
    /// Borda points over all seven variables: position `p` (1-based) in a list of
    /// length `L` earns `L - p`; tied variables share the mean over their positions.
    pub fn points(&self, variable: VisualVariable) -> f64 {
        let len = VisualVariable::ALL.len() as f64;
        let mut start = 1usize;
        for tier in self.tiers {
            if tier.contains(&variable) {
                return tier_points(len, start, tier.len());
            }
            start += tier.len();
        }
        let listed: usize = self.tiers.iter().map(|t| t.len()).sum();
        tier_points(len, start, VisualVariable::ALL.len() - listed)
    }
}

fn tier_points(len: f64, start: usize, size: usize) -> f64 {
    let first = start as f64;
    let last = (start + size - 1) as f64;
    len - (first + last) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankBreakdown {
    pub intuitiveness: f64,
    pub performance: f64,
    pub preference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub rank: usize,
    pub pairing: Pairing,
    pub score: f64,
    pub breakdown: RankBreakdown,
}

/// Weighted Borda ranking of accepted pairings by their uncertainty variable.
/// Equal scores fall back to the variable names of (thematic, uncertainty).
pub fn rank_candidates(
    accepted: &[Pairing],
    weights: &RankingWeights,
) -> Result<Vec<RankedCandidate>, RecommendError> {
    if accepted.is_empty() {
        return Err(RecommendError::NoCandidates);
    }
    weights.validate()?;
    let mut scored: Vec<(Pairing, f64, RankBreakdown)> = accepted
        .iter()
        .map(|&pairing| {
            let u = pairing.uncertainty;
            let breakdown = RankBreakdown {
                intuitiveness: INTUITIVENESS.points(u),
                performance: PERFORMANCE.points(u),
                preference: PREFERENCE.points(u),
            };
            let score = weights.intuitiveness * breakdown.intuitiveness
                + weights.performance * breakdown.performance
                + weights.preference * breakdown.preference;
            (pairing, score, breakdown)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| a.0.name_key().cmp(&b.0.name_key()))
    });
    scored.dedup_by_key(|s| s.0);
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(i, (pairing, score, breakdown))| RankedCandidate {
            rank: i + 1,
            pairing,
            score,
            breakdown,
        })
        .collect())
}
