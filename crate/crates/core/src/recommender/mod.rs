//! Task-driven filtering and ranking of bivariate symbol candidates.
//!
//! [`recommend`] runs the whole pipeline: tasks become a [`RequirementProfile`],
//! every available pairing for the implantation is checked against the profile
//! and the data's binning, and survivors are ordered by [`rank_candidates`].
//! Every check is recorded so a report explains each rejection.

mod ranking;
mod request;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data_model::{validate_binning, BinningScheme};
use crate::knowledge_base::{
    KnowledgeBase, Pairing, PerceptionRequirement, SeparabilityClass, VisualVariable,
};

pub use ranking::{
    rank_candidates, EvidenceOrdering, RankBreakdown, RankedCandidate, INTUITIVENESS, PERFORMANCE,
    PREFERENCE,
};
pub use request::{
    requirement_targets_pairing, BinningPair, Constraints, DesignRequest, DimensionSpec,
    RankingWeights, Target, TaskAssignment, REQUEST_SCHEMA,
};

pub const REPORT_SCHEMA: &str = "bivmap-report/1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecommendError {
    #[error("task list is empty")]
    EmptyTaskList,
    #[error("{task} cannot target {target:?}")]
    InvalidTarget { task: String, target: Target },
    #[error("no accepted candidates to rank")]
    NoCandidates,
    #[error("{field}: {message}")]
    InvalidRequest { field: String, message: String },
}

impl RecommendError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        RecommendError::InvalidRequest {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Requirements per dimension, deduplicated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementProfile {
    pub thematic: BTreeSet<PerceptionRequirement>,
    pub uncertainty: BTreeSet<PerceptionRequirement>,
    pub pairing: BTreeSet<PerceptionRequirement>,
}

pub fn derive_requirements(
    kb: &KnowledgeBase,
    tasks: &[TaskAssignment],
) -> Result<RequirementProfile, RecommendError> {
    if tasks.is_empty() {
        return Err(RecommendError::EmptyTaskList);
    }
    let mut profile = RequirementProfile::default();
    for t in tasks {
        let requirement = kb.task_requirement(t.task);
        if requirement_targets_pairing(requirement) != (t.target == Target::Both) {
            return Err(RecommendError::InvalidTarget {
                task: t.task.name().to_string(),
                target: t.target,
            });
        }
        let set = match t.target {
            Target::Thematic => &mut profile.thematic,
            Target::Uncertainty => &mut profile.uncertainty,
            Target::Both => &mut profile.pairing,
        };
        set.insert(requirement);
    }
    Ok(profile)
}

/// Filter rules, in evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    Availability,
    Placement,
    ThematicPerception,
    UncertaintyPerception,
    ThematicBinning,
    UncertaintyBinning,
    Separability,
    Dominance,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleId::Availability => "availability",
            RuleId::Placement => "placement",
            RuleId::ThematicPerception => "thematic_perception",
            RuleId::UncertaintyPerception => "uncertainty_perception",
            RuleId::ThematicBinning => "thematic_binning",
            RuleId::UncertaintyBinning => "uncertainty_binning",
            RuleId::Separability => "separability",
            RuleId::Dominance => "dominance",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub rule: RuleId,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateTrace {
    pub pairing: Pairing,
    pub class: Option<SeparabilityClass>,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
}

impl CandidateTrace {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Requirements that no single symbol can satisfy together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictNotice {
    pub dimension: Target,
    pub requirements: Vec<PerceptionRequirement>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub pairing: Pairing,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationReport {
    pub schema: String,
    pub knowledge_base_checksum: String,
    pub request: DesignRequest,
    pub profile: RequirementProfile,
    pub dominance_constraint: bool,
    pub conflicts: Vec<ConflictNotice>,
    pub warnings: Vec<Warning>,
    pub candidates: Vec<CandidateTrace>,
    pub ranked: Vec<RankedCandidate>,
}

impl RecommendationReport {
    pub fn accepted(&self) -> Vec<Pairing> {
        self.candidates
            .iter()
            .filter(|c| c.accepted())
            .map(|c| c.pairing)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Short plain-text summary: accepted pairings with classes and the top three.
    pub fn summary(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let accepted: Vec<&CandidateTrace> =
            self.candidates.iter().filter(|c| c.accepted()).collect();
        let _ = writeln!(
            out,
            "{} of {} candidate pairings accepted ({} implantation)",
            accepted.len(),
            self.candidates.len(),
            self.request.implantation
        );
        for c in &accepted {
            let class = c.class.map(|k| format!("{k:?}")).unwrap_or_default();
            let _ = writeln!(out, "  {} {class}", c.pairing);
        }
        for notice in &self.conflicts {
            let _ = writeln!(out, "conflict: {}", notice.message);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {} {}", w.pairing, w.message);
        }
        if !self.ranked.is_empty() {
            let _ = writeln!(out, "top ranked:");
            for r in self.ranked.iter().take(3) {
                let _ = writeln!(out, "  {}. {} score {}", r.rank, r.pairing, r.score);
            }
        }
        out
    }
}

/// Whether the dominance constraint applies to this request and profile.
pub fn dominance_applies(request: &DesignRequest, profile: &RequirementProfile) -> bool {
    request
        .constraints
        .no_uncertainty_dominance
        .unwrap_or_else(|| {
            profile
                .uncertainty
                .contains(&PerceptionRequirement::Dissociative)
        })
}

fn list(reqs: &BTreeSet<PerceptionRequirement>) -> String {
    reqs.iter().map(|r| r.name()).collect::<Vec<_>>().join(", ")
}

fn perception_check(
    kb: &KnowledgeBase,
    rule: RuleId,
    variable: VisualVariable,
    reqs: &BTreeSet<PerceptionRequirement>,
) -> Check {
    let props = kb.variable_properties(variable);
    let unmet: Vec<String> = reqs
        .iter()
        .filter(|r| !props.satisfies(**r))
        .map(|r| {
            format!(
                "{r} required, {variable} is not {}",
                r.name().to_lowercase()
            )
        })
        .collect();
    if unmet.is_empty() {
        Check {
            rule,
            passed: true,
            detail: if reqs.is_empty() {
                "no requirements".to_string()
            } else {
                format!("{variable} meets {}", list(reqs))
            },
        }
    } else {
        Check {
            rule,
            passed: false,
            detail: unmet.join("; "),
        }
    }
}

fn binning_check(
    kb: &KnowledgeBase,
    rule: RuleId,
    variable: VisualVariable,
    implantation: crate::knowledge_base::Implantation,
    scheme: &BinningScheme,
    reqs: &BTreeSet<PerceptionRequirement>,
) -> Check {
    if let Err(v) = validate_binning(kb, variable, implantation, scheme) {
        return Check {
            rule,
            passed: false,
            detail: v.to_string(),
        };
    }
    if reqs.contains(&PerceptionRequirement::Selective) && !scheme.is_discrete() {
        return Check {
            rule,
            passed: false,
            detail: "Selective required, which needs discrete classes".to_string(),
        };
    }
    Check {
        rule,
        passed: true,
        detail: format!("{} fits {variable}", scheme.label()),
    }
}

/// Runs the six rule groups over every available pairing and records all checks.
pub fn filter_candidates(
    kb: &KnowledgeBase,
    request: &DesignRequest,
    profile: &RequirementProfile,
) -> Vec<CandidateTrace> {
    let implantation = request.implantation;
    let required_classes: Vec<SeparabilityClass> = profile
        .pairing
        .iter()
        .filter_map(|r| r.separability_class())
        .collect();
    let dominance = dominance_applies(request, profile);
    let include_uncertain = request.constraints.include_uncertain_classifications;

    kb.enumerate_pairings(implantation)
        .into_iter()
        .map(|entry| {
            let pairing = entry.pairing();
            let (t, u) = (pairing.thematic, pairing.uncertainty);
            let mut checks = Vec::with_capacity(8);

            checks.push(Check {
                rule: RuleId::Availability,
                passed: entry.available,
                detail: match entry.variant {
                    Some(v) => format!("available as {v:?}"),
                    None => "available".to_string(),
                },
            });

            checks.push(if t.is_uncertainty_only() {
                Check {
                    rule: RuleId::Placement,
                    passed: false,
                    detail: format!("{t} may only encode uncertainty"),
                }
            } else {
                Check {
                    rule: RuleId::Placement,
                    passed: true,
                    detail: "thematic slot holds a thematic-capable variable".to_string(),
                }
            });

            checks.push(perception_check(
                kb,
                RuleId::ThematicPerception,
                t,
                &profile.thematic,
            ));
            checks.push(perception_check(
                kb,
                RuleId::UncertaintyPerception,
                u,
                &profile.uncertainty,
            ));
            checks.push(binning_check(
                kb,
                RuleId::ThematicBinning,
                t,
                implantation,
                &request.thematic.binning,
                &profile.thematic,
            ));
            checks.push(binning_check(
                kb,
                RuleId::UncertaintyBinning,
                u,
                implantation,
                &request.uncertainty.binning,
                &profile.uncertainty,
            ));

            let separability = kb.separability_class(t, u, implantation).ok();
            checks.push(match separability {
                None => Check {
                    rule: RuleId::Separability,
                    passed: false,
                    detail: "no separability classification".to_string(),
                },
                Some(e) => {
                    let class_ok = required_classes.iter().all(|c| *c == e.class);
                    let flag_ok = !e.uncertain_not_recommended || include_uncertain;
                    let mut detail = if required_classes.is_empty() {
                        format!("{:?}, no class required", e.class)
                    } else if class_ok {
                        format!("{:?} as required", e.class)
                    } else {
                        let wanted: Vec<String> =
                            required_classes.iter().map(|c| format!("{c:?}")).collect();
                        format!(
                            "{} required, pairing is {:?}",
                            wanted.join(" and "),
                            e.class
                        )
                    };
                    if e.uncertain_not_recommended {
                        detail.push_str(if include_uncertain {
                            "; uncertain classification included by override"
                        } else {
                            "; classification uncertain, not recommended"
                        });
                    }
                    Check {
                        rule: RuleId::Separability,
                        passed: class_ok && flag_ok,
                        detail,
                    }
                }
            });

            let u_dissociative = kb.variable_properties(u).dissociative();
            let t_dissociative = kb.variable_properties(t).dissociative();
            checks.push(if !dominance {
                Check {
                    rule: RuleId::Dominance,
                    passed: true,
                    detail: "constraint off".to_string(),
                }
            } else if u_dissociative && !t_dissociative {
                Check {
                    rule: RuleId::Dominance,
                    passed: false,
                    detail: format!("dissociative {u} would dominate associative {t}"),
                }
            } else {
                Check {
                    rule: RuleId::Dominance,
                    passed: true,
                    detail: "uncertainty does not dominate".to_string(),
                }
            });

            let verdict = if checks.iter().all(|c| c.passed) {
                Verdict::Accepted
            } else {
                Verdict::Rejected
            };
            CandidateTrace {
                pairing,
                class: separability.map(|e| e.class),
                verdict,
                checks,
            }
        })
        .collect()
}

fn conflicts(profile: &RequirementProfile) -> Vec<ConflictNotice> {
    let mut out = Vec::new();
    let classes: Vec<PerceptionRequirement> = profile
        .pairing
        .iter()
        .copied()
        .filter(|r| r.separability_class().is_some())
        .collect();
    if classes.len() > 1 {
        out.push(ConflictNotice {
            dimension: Target::Both,
            message: format!(
                "tasks demand {} at once; no pairing has more than one class. Consider one map per requirement.",
                classes.iter().map(|r| r.name()).collect::<Vec<_>>().join(" and ")
            ),
            requirements: classes,
        });
    }
    for (dimension, set) in [
        (Target::Thematic, &profile.thematic),
        (Target::Uncertainty, &profile.uncertainty),
    ] {
        let both = [
            PerceptionRequirement::Associative,
            PerceptionRequirement::Dissociative,
        ];
        if both.iter().all(|r| set.contains(r)) {
            out.push(ConflictNotice {
                dimension,
                requirements: both.to_vec(),
                message: format!(
                    "{dimension:?} dimension must be both associative and dissociative. Consider one map per requirement."
                ),
            });
        }
    }
    out
}

fn is_colour(v: VisualVariable) -> bool {
    matches!(
        v,
        VisualVariable::Value | VisualVariable::Saturation | VisualVariable::Transparency
    )
}

fn nine_level_warnings(request: &DesignRequest, accepted: &[Pairing]) -> Vec<Warning> {
    let (Some(nt), Some(nu)) = (
        request.thematic.binning.n_bins(),
        request.uncertainty.binning.n_bins(),
    ) else {
        return Vec::new();
    };
    if nt * nu <= 9 {
        return Vec::new();
    }
    accepted
        .iter()
        .filter(|p| is_colour(p.thematic) && is_colour(p.uncertainty))
        .map(|&pairing| Warning {
            pairing,
            message: format!(
                "{} colour-colour bivariate levels; nine or fewer are easier to internalise",
                nt * nu
            ),
        })
        .collect()
}

/// Full pipeline: requirements, filtering, ranking.
pub fn recommend(
    kb: &KnowledgeBase,
    request: &DesignRequest,
) -> Result<RecommendationReport, RecommendError> {
    request.validate(kb)?;
    let profile = derive_requirements(kb, &request.tasks)?;
    let candidates = filter_candidates(kb, request, &profile);
    let accepted: Vec<Pairing> = candidates
        .iter()
        .filter(|c| c.accepted())
        .map(|c| c.pairing)
        .collect();
    let ranked = if accepted.is_empty() {
        Vec::new()
    } else {
        rank_candidates(&accepted, &request.ranking_weights)?
    };
    Ok(RecommendationReport {
        schema: REPORT_SCHEMA.to_string(),
        knowledge_base_checksum: kb.checksum().to_string(),
        request: request.clone(),
        dominance_constraint: dominance_applies(request, &profile),
        conflicts: conflicts(&profile),
        warnings: nine_level_warnings(request, &accepted),
        profile,
        candidates,
        ranked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge_base::{Implantation, OperationalTask::*};
    use PerceptionRequirement as R;
    use VisualVariable::*;

    fn kb() -> &'static KnowledgeBase {
        KnowledgeBase::bundled()
    }

    fn case_study_tasks() -> Vec<TaskAssignment> {
        vec![
            TaskAssignment::new(RankCompare, Target::Thematic),
            TaskAssignment::new(Locate, Target::Thematic),
            TaskAssignment::new(RankCompare, Target::Uncertainty),
            TaskAssignment::new(WeightedDistribution, Target::Uncertainty),
            TaskAssignment::new(WeightedInterpretation, Target::Uncertainty),
            TaskAssignment::new(Isolate, Target::Both),
        ]
    }

    fn request(tasks: Vec<TaskAssignment>, t: BinningScheme, u: BinningScheme) -> DesignRequest {
        DesignRequest {
            schema: REQUEST_SCHEMA.to_string(),
            implantation: Implantation::Area,
            thematic: DimensionSpec {
                name: "TSS".into(),
                binning: t,
            },
            uncertainty: DimensionSpec {
                name: "CV".into(),
                binning: u,
            },
            tasks,
            constraints: Constraints::default(),
            ranking_weights: RankingWeights::default(),
            ensemble_schemes: Vec::new(),
        }
    }

    fn thresholds() -> BinningScheme {
        BinningScheme::Threshold {
            edges: vec![837.0, 2204.0],
        }
    }

    #[test]
    fn case_study_profile() {
        let p = derive_requirements(kb(), &case_study_tasks()).unwrap();
        assert_eq!(p.thematic, BTreeSet::from([R::Ordinal, R::Selective]));
        assert_eq!(p.uncertainty, BTreeSet::from([R::Ordinal, R::Dissociative]));
        assert_eq!(p.pairing, BTreeSet::from([R::Separable]));
    }

    #[test]
    fn identify_only_profile() {
        let p =
            derive_requirements(kb(), &[TaskAssignment::new(Identify, Target::Thematic)]).unwrap();
        assert_eq!(p.thematic, BTreeSet::from([R::Selective]));
        assert!(p.uncertainty.is_empty() && p.pairing.is_empty());
    }

    #[test]
    fn duplicate_tasks_deduplicate() {
        let mut doubled = case_study_tasks();
        doubled.extend(case_study_tasks());
        assert_eq!(
            derive_requirements(kb(), &doubled).unwrap(),
            derive_requirements(kb(), &case_study_tasks()).unwrap()
        );
        assert_eq!(
            derive_requirements(kb(), &[]),
            Err(RecommendError::EmptyTaskList)
        );
    }

    #[test]
    fn case_study_accepted_set() {
        let req = request(
            case_study_tasks(),
            thresholds(),
            BinningScheme::Quantile { k: 3 },
        );
        let report = recommend(kb(), &req).unwrap();
        let accepted = report.accepted();
        for p in [
            Pairing::new(Size, Transparency),
            Pairing::new(Value, Size),
            Pairing::new(Value, Blur),
            Pairing::new(Size, Value),
        ] {
            assert!(accepted.contains(&p), "{p}");
        }
        assert!(accepted
            .iter()
            .all(|p| p.thematic != Texture && p.uncertainty != Texture));
        assert_eq!(accepted.len(), 9);
        assert!(report.dominance_constraint);
        assert!(report.conflicts.is_empty());
    }

    #[test]
    fn integral_requirement_limits_to_integral_cells() {
        let req = request(
            vec![TaskAssignment::new(Associate, Target::Both)],
            BinningScheme::Quantile { k: 3 },
            BinningScheme::Quantile { k: 3 },
        );
        let report = recommend(kb(), &req).unwrap();
        let allowed = [
            Pairing::new(Value, Saturation),
            Pairing::new(Value, Transparency),
            Pairing::new(Value, Value),
        ];
        let accepted = report.accepted();
        assert!(!accepted.is_empty());
        assert!(accepted.iter().all(|p| allowed.contains(p)));
    }

    #[test]
    fn five_blur_bins_fail_at_binning() {
        let req = request(
            vec![TaskAssignment::new(RankCompare, Target::Uncertainty)],
            BinningScheme::Quantile { k: 3 },
            BinningScheme::Quantile { k: 5 },
        );
        let traces = filter_candidates(kb(), &req, &derive_requirements(kb(), &req.tasks).unwrap());
        for t in traces.iter().filter(|t| t.pairing.uncertainty == Blur) {
            assert!(!t.accepted());
            let failing = t.first_failure().unwrap();
            assert_eq!(failing.rule, RuleId::UncertaintyBinning);
            assert!(failing.detail.contains("Violation(5 > 3)"));
        }
    }

    #[test]
    fn quantitative_uncertainty_needs_size() {
        let req = request(
            vec![TaskAssignment::new(RatioCompare, Target::Uncertainty)],
            BinningScheme::Quantile { k: 3 },
            BinningScheme::Quantile { k: 3 },
        );
        let report = recommend(kb(), &req).unwrap();
        assert!(!report.accepted().is_empty());
        assert!(report.accepted().iter().all(|p| p.uncertainty == Size));
    }

    #[test]
    fn conflicting_classes_give_notice_and_nothing_accepted() {
        let req = request(
            vec![
                TaskAssignment::new(Isolate, Target::Both),
                TaskAssignment::new(Associate, Target::Both),
            ],
            BinningScheme::Quantile { k: 3 },
            BinningScheme::Quantile { k: 3 },
        );
        let report = recommend(kb(), &req).unwrap();
        assert!(report.accepted().is_empty());
        assert!(report.ranked.is_empty());
        assert_eq!(report.conflicts.len(), 1);
        assert_eq!(report.conflicts[0].dimension, Target::Both);
    }

    #[test]
    fn traces_record_every_check() {
        let req = request(
            case_study_tasks(),
            thresholds(),
            BinningScheme::Quantile { k: 3 },
        );
        let report = recommend(kb(), &req).unwrap();
        assert_eq!(
            report.candidates.len(),
            kb().enumerate_pairings(Implantation::Area).len()
        );
        for c in &report.candidates {
            assert_eq!(c.checks.len(), 8);
            assert_eq!(c.accepted(), c.checks.iter().all(|k| k.passed));
        }
        let integral = report
            .candidates
            .iter()
            .find(|c| c.pairing == Pairing::new(Value, Saturation))
            .unwrap();
        let sep = integral
            .checks
            .iter()
            .find(|c| c.rule == RuleId::Separability)
            .unwrap();
        assert!(!sep.passed);
        assert!(sep.detail.starts_with("Separable required"));
    }

    #[test]
    fn selective_needs_discrete_classes() {
        let req = request(
            vec![TaskAssignment::new(Identify, Target::Uncertainty)],
            BinningScheme::Quantile { k: 3 },
            BinningScheme::Continuous,
        );
        let report = recommend(kb(), &req).unwrap();
        assert!(report.accepted().is_empty());
    }

    #[test]
    fn uncertain_cells_need_override() {
        let mut req = request(
            vec![TaskAssignment::new(PrioritisedInterpretation, Target::Both)],
            BinningScheme::Quantile { k: 3 },
            BinningScheme::Quantile { k: 3 },
        );
        req.implantation = Implantation::Line;
        let plain = recommend(kb(), &req).unwrap().accepted();
        assert!(!plain.contains(&Pairing::new(Size, Texture)));
        assert!(plain.contains(&Pairing::new(Value, Density)));
        req.constraints.include_uncertain_classifications = true;
        req.constraints.no_uncertainty_dominance = Some(false);
        let wide = recommend(kb(), &req).unwrap().accepted();
        assert!(wide.contains(&Pairing::new(Size, Texture)));
    }

    #[test]
    fn nine_level_warning_for_colour_pairs() {
        let req = request(
            vec![TaskAssignment::new(Associate, Target::Both)],
            BinningScheme::Quantile { k: 5 },
            BinningScheme::Quantile { k: 5 },
        );
        let report = recommend(kb(), &req).unwrap();
        assert!(report
            .warnings
            .iter()
            .any(|w| w.pairing == Pairing::new(Value, Value)));
        assert!(report.accepted().contains(&Pairing::new(Value, Value)));
    }

    #[test]
    fn report_is_deterministic() {
        let req = request(
            case_study_tasks(),
            thresholds(),
            BinningScheme::Quantile { k: 3 },
        );
        let a = recommend(kb(), &req).unwrap().to_json();
        let b = recommend(kb(), &req).unwrap().to_json();
        assert_eq!(a, b);
        assert_eq!(RecommendationReport::from_json(&a).unwrap().to_json(), a);
    }
}
