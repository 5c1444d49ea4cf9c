use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Graphic dimensions available for encoding either side of a bivariate symbol.
///
/// Declaration order is the column order of the printed pairing grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VisualVariable {
    Saturation,
    Blur,
    Transparency,
    Value,
    Size,
    Texture,
    Density,
}

impl VisualVariable {
    /// All variables in grid column order.
    pub const ALL: [VisualVariable; 7] = [
        VisualVariable::Saturation,
        VisualVariable::Blur,
        VisualVariable::Transparency,
        VisualVariable::Value,
        VisualVariable::Size,
        VisualVariable::Texture,
        VisualVariable::Density,
    ];

    /// Row order of the pairing grids (the variables allowed in the thematic slot).
    pub const THEMATIC_ROWS: [VisualVariable; 4] = [
        VisualVariable::Value,
        VisualVariable::Size,
        VisualVariable::Texture,
        VisualVariable::Density,
    ];

    /// Row order of the perceptive-property table.
    pub const PROPERTY_ROWS: [VisualVariable; 7] = [
        VisualVariable::Blur,
        VisualVariable::Transparency,
        VisualVariable::Saturation,
        VisualVariable::Value,
        VisualVariable::Size,
        VisualVariable::Texture,
        VisualVariable::Density,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VisualVariable::Saturation => "Saturation",
            VisualVariable::Blur => "Blur",
            VisualVariable::Transparency => "Transparency",
            VisualVariable::Value => "Value",
            VisualVariable::Size => "Size",
            VisualVariable::Texture => "Texture",
            VisualVariable::Density => "Density",
        }
    }

    /// Saturation, blur and transparency may only carry the uncertainty dimension.
    pub fn is_uncertainty_only(self) -> bool {
        matches!(
            self,
            VisualVariable::Saturation | VisualVariable::Blur | VisualVariable::Transparency
        )
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for VisualVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VisualVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VisualVariable::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown visual variable `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Implantation {
    Point,
    Line,
    Area,
}

impl Implantation {
    pub const ALL: [Implantation; 3] =
        [Implantation::Point, Implantation::Line, Implantation::Area];

    pub fn name(self) -> &'static str {
        match self {
            Implantation::Point => "Point",
            Implantation::Line => "Line",
            Implantation::Area => "Area",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Implantation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Implantation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Implantation::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown implantation `{s}`"))
    }
}

/// Whether a table value is backed by prior literature or inferred by the table authors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Evidence {
    Established,
    AuthorEstimate,
}

/// Perceptive properties of a single visual variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PerceptionSet {
    pub selective: bool,
    pub associative: bool,
    pub ordered: bool,
    pub quantitative: bool,
}

impl PerceptionSet {
    /// A cue is treated as dissociative whenever it is not associative.
    pub fn dissociative(&self) -> bool {
        !self.associative
    }

    /// Whether this variable satisfies a per-variable requirement. Separability
    /// classes are properties of pairings and always return `false` here.
    pub fn satisfies(&self, requirement: PerceptionRequirement) -> bool {
        match requirement {
            PerceptionRequirement::Selective => self.selective,
            PerceptionRequirement::Ordinal => self.ordered,
            PerceptionRequirement::Quantitative => self.quantitative,
            PerceptionRequirement::Associative => self.associative,
            PerceptionRequirement::Dissociative => self.dissociative(),
            _ => false,
        }
    }
}

/// A thematic/uncertainty variable assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pairing {
    pub thematic: VisualVariable,
    pub uncertainty: VisualVariable,
}

impl Pairing {
    pub fn new(thematic: VisualVariable, uncertainty: VisualVariable) -> Self {
        Self {
            thematic,
            uncertainty,
        }
    }

    /// Sort key used for deterministic tie-breaks: variable names compared as strings.
    pub fn name_key(&self) -> (&'static str, &'static str) {
        (self.thematic.name(), self.uncertainty.name())
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.thematic, self.uncertainty)
    }
}

impl FromStr for Pairing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (t, u) = trimmed
            .split_once(',')
            .ok_or_else(|| format!("expected `thematic,uncertainty`, got `{s}`"))?;
        Ok(Pairing::new(t.parse()?, u.parse()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairingVariant {
    BivariateChoropleth,
    LineWidth,
    WidthWithDashLength,
    Crosshatch,
}

impl PairingVariant {
    pub(crate) fn footnote(self) -> char {
        match self {
            PairingVariant::BivariateChoropleth => 'A',
            PairingVariant::LineWidth => 'B',
            PairingVariant::WidthWithDashLength => 'C',
            PairingVariant::Crosshatch => 'D',
        }
    }

    pub(crate) fn from_footnote(c: char) -> Option<Self> {
        match c {
            'A' => Some(PairingVariant::BivariateChoropleth),
            'B' => Some(PairingVariant::LineWidth),
            'C' => Some(PairingVariant::WidthWithDashLength),
            'D' => Some(PairingVariant::Crosshatch),
            _ => None,
        }
    }
}

/// Position of a pairing on the integral-separable continuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SeparabilityClass {
    Integral,
    Separable,
    Asymmetric,
    Configural,
}

impl SeparabilityClass {
    pub fn letter(self) -> char {
        match self {
            SeparabilityClass::Integral => 'I',
            SeparabilityClass::Separable => 'S',
            SeparabilityClass::Asymmetric => 'A',
            SeparabilityClass::Configural => 'C',
        }
    }

    pub(crate) fn from_letter(c: char) -> Option<Self> {
        match c {
            'I' => Some(SeparabilityClass::Integral),
            'S' => Some(SeparabilityClass::Separable),
            'A' => Some(SeparabilityClass::Asymmetric),
            'C' => Some(SeparabilityClass::Configural),
            _ => None,
        }
    }

    pub fn as_requirement(self) -> PerceptionRequirement {
        match self {
            SeparabilityClass::Integral => PerceptionRequirement::Integral,
            SeparabilityClass::Separable => PerceptionRequirement::Separable,
            SeparabilityClass::Asymmetric => PerceptionRequirement::Asymmetric,
            SeparabilityClass::Configural => PerceptionRequirement::Configural,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskArity {
    Univariate,
    Bivariate,
}

/// Map-reading actions used as proxies for end-user goals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperationalTask {
    Identify,
    CompareWithin,
    RankCompare,
    RatioCompare,
    Locate,
    Distribution,
    WeightedDistribution,
    Isolate,
    CompareBetween,
    Correlate,
    Associate,
    PrioritisedInterpretation,
    WeightedInterpretation,
    AssociateAndIsolate,
    Combine,
}

impl OperationalTask {
    pub const ALL: [OperationalTask; 15] = [
        OperationalTask::Identify,
        OperationalTask::CompareWithin,
        OperationalTask::RankCompare,
        OperationalTask::RatioCompare,
        OperationalTask::Locate,
        OperationalTask::Distribution,
        OperationalTask::WeightedDistribution,
        OperationalTask::Isolate,
        OperationalTask::CompareBetween,
        OperationalTask::Correlate,
        OperationalTask::Associate,
        OperationalTask::PrioritisedInterpretation,
        OperationalTask::WeightedInterpretation,
        OperationalTask::AssociateAndIsolate,
        OperationalTask::Combine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperationalTask::Identify => "Identify",
            OperationalTask::CompareWithin => "CompareWithin",
            OperationalTask::RankCompare => "RankCompare",
            OperationalTask::RatioCompare => "RatioCompare",
            OperationalTask::Locate => "Locate",
            OperationalTask::Distribution => "Distribution",
            OperationalTask::WeightedDistribution => "WeightedDistribution",
            OperationalTask::Isolate => "Isolate",
            OperationalTask::CompareBetween => "CompareBetween",
            OperationalTask::Correlate => "Correlate",
            OperationalTask::Associate => "Associate",
            OperationalTask::PrioritisedInterpretation => "PrioritisedInterpretation",
            OperationalTask::WeightedInterpretation => "WeightedInterpretation",
            OperationalTask::AssociateAndIsolate => "AssociateAndIsolate",
            OperationalTask::Combine => "Combine",
        }
    }

    pub fn arity(self) -> TaskArity {
        use OperationalTask::*;
        match self {
            Identify | CompareWithin | RankCompare | RatioCompare | Locate | Distribution
            | WeightedDistribution => TaskArity::Univariate,
            _ => TaskArity::Bivariate,
        }
    }
}

impl fmt::Display for OperationalTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperationalTask {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OperationalTask::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| format!("unknown operational task `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PerceptionRequirement {
    Selective,
    Ordinal,
    Quantitative,
    Associative,
    Dissociative,
    Separable,
    Integral,
    Asymmetric,
    Configural,
}

impl PerceptionRequirement {
    pub const ALL: [PerceptionRequirement; 9] = [
        PerceptionRequirement::Selective,
        PerceptionRequirement::Ordinal,
        PerceptionRequirement::Quantitative,
        PerceptionRequirement::Associative,
        PerceptionRequirement::Dissociative,
        PerceptionRequirement::Separable,
        PerceptionRequirement::Integral,
        PerceptionRequirement::Asymmetric,
        PerceptionRequirement::Configural,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PerceptionRequirement::Selective => "Selective",
            PerceptionRequirement::Ordinal => "Ordinal",
            PerceptionRequirement::Quantitative => "Quantitative",
            PerceptionRequirement::Associative => "Associative",
            PerceptionRequirement::Dissociative => "Dissociative",
            PerceptionRequirement::Separable => "Separable",
            PerceptionRequirement::Integral => "Integral",
            PerceptionRequirement::Asymmetric => "Asymmetric",
            PerceptionRequirement::Configural => "Configural",
        }
    }

    /// The separability class this requirement demands of a pairing, if any.
    pub fn separability_class(self) -> Option<SeparabilityClass> {
        match self {
            PerceptionRequirement::Separable => Some(SeparabilityClass::Separable),
            PerceptionRequirement::Integral => Some(SeparabilityClass::Integral),
            PerceptionRequirement::Asymmetric => Some(SeparabilityClass::Asymmetric),
            PerceptionRequirement::Configural => Some(SeparabilityClass::Configural),
            _ => None,
        }
    }

    /// Requirements a univariate task may map to.
    pub fn allowed_for(self, arity: TaskArity) -> bool {
        use PerceptionRequirement::*;
        match arity {
            TaskArity::Univariate => {
                matches!(
                    self,
                    Selective | Ordinal | Quantitative | Associative | Dissociative
                )
            }
            TaskArity::Bivariate => {
                matches!(
                    self,
                    Separable | Integral | Asymmetric | Configural | Dissociative
                )
            }
        }
    }
}

impl fmt::Display for PerceptionRequirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PerceptionRequirement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PerceptionRequirement::ALL
            .into_iter()
            .find(|r| r.name() == s.trim())
            .ok_or_else(|| format!("unknown perception requirement `{s}`"))
    }
}
