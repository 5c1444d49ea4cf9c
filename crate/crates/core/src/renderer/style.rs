use serde::{Deserialize, Serialize};

use crate::data_model::{validate_binning, BinnedAttribute, BinningScheme, Classes};
use crate::knowledge_base::{Implantation, KnowledgeBase, Pairing, VisualVariable};

use super::RenderError;

/// Document size of the map frame in user units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
}

impl Default for Canvas {
    fn default() -> Self {
        Self {
            width: 600.0,
            height: 600.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GlyphColour {
    #[default]
    Black,
    White,
}

/// Endpoint configuration for every concrete ladder. Ladders interpolate evenly
/// between `(first, last)`; the first entry is bin 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PaletteConfig {
    /// Hue angle in degrees; `None` renders achromatic greys.
    pub hue: Option<f64>,
    /// Hue of the uncertainty ramp in bivariate choropleths (defaults to hue + 200).
    pub secondary_hue: Option<f64>,
    /// Saturation of the base colour when saturation is not itself encoded.
    pub base_saturation: f64,
    /// Lightness used when value is not encoded.
    pub base_lightness: f64,
    pub lightness: (f64, f64),
    pub saturation: (f64, f64),
    pub opacity: (f64, f64),
    pub blur_radius: (f64, f64),
    pub dot_radius: (f64, f64),
    pub marker_radius: (f64, f64),
    pub hatch_spacing: (f64, f64),
    pub texture_cell: (f64, f64),
    /// Lattice pitch of dot glyphs.
    pub lattice: f64,
    /// Draw pattern glyphs over a coloured fill instead of on a blank ground.
    pub pattern_overlay: bool,
    pub glyph_colour: GlyphColour,
}

impl Default for PaletteConfig {
    fn default() -> Self {
        Self {
            hue: Some(8.0),
            secondary_hue: None,
            base_saturation: 0.75,
            base_lightness: 0.5,
            lightness: (0.92, 0.25),
            saturation: (0.85, 0.10),
            opacity: (1.0, 0.15),
            blur_radius: (0.0, 2.5),
            dot_radius: (1.5, 6.0),
            marker_radius: (3.0, 10.0),
            hatch_spacing: (8.0, 2.0),
            texture_cell: (12.0, 4.0),
            lattice: 14.0,
            pattern_overlay: false,
            glyph_colour: GlyphColour::Black,
        }
    }
}

/// Rendering configuration as read from a config file (`[palette]`, `[canvas]`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub palette: PaletteConfig,
    pub canvas: Canvas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RenderMode {
    PatternOnFill,
    PatternOnly,
    FillOnly,
    Crosshatch,
    BivariateChoropleth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternGlyph {
    Dot,
    Hatch45,
    Cross,
}

/// The concrete quantity a ladder varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderQuantity {
    Lightness,
    Saturation,
    Opacity,
    BlurRadius,
    GlyphRadius,
    MarkerRadius,
    HatchSpacing,
    CellSize,
}

/// Concrete levels for one dimension. Continuous ladders have no discrete
/// levels and map normalised values through `endpoints`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub variable: VisualVariable,
    pub quantity: LadderQuantity,
    pub endpoints: (f64, f64),
    pub levels: Vec<f64>,
}

impl Ladder {
    fn new(
        variable: VisualVariable,
        quantity: LadderQuantity,
        endpoints: (f64, f64),
        n_bins: Option<usize>,
    ) -> Self {
        let levels = match n_bins {
            Some(1) => vec![endpoints.0],
            Some(n) => (0..n)
                .map(|i| lerp(endpoints, i as f64 / (n - 1) as f64))
                .collect(),
            None => Vec::new(),
        };
        Self {
            variable,
            quantity,
            endpoints,
            levels,
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn at(&self, key: LevelKey) -> f64 {
        match key {
            LevelKey::Bin(i) => self.levels[i],
            LevelKey::Continuous(q) => lerp(self.endpoints, f64::from(q) / LevelKey::STEPS as f64),
        }
    }
}

pub(crate) fn lerp((a, b): (f64, f64), t: f64) -> f64 {
    a + (b - a) * t
}

/// A class index, or a continuous value quantised to thousandths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LevelKey {
    Bin(usize),
    Continuous(u16),
}

impl LevelKey {
    pub const STEPS: u16 = 1000;

    pub fn continuous(normalized: f64) -> Self {
        LevelKey::Continuous((normalized.clamp(0.0, 1.0) * f64::from(Self::STEPS)).round() as u16)
    }

    pub fn id_part(&self) -> String {
        match self {
            LevelKey::Bin(i) => i.to_string(),
            LevelKey::Continuous(q) => format!("c{q:04}"),
        }
    }
}

/// Legend axis text for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub title: String,
    pub scheme: BinningScheme,
    /// One label per class, or `[min, max]` for continuous schemes.
    pub labels: Vec<String>,
}

/// Fully concrete parameterisation of one bivariate map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapStyle {
    pub pairing: Pairing,
    pub implantation: Implantation,
    pub mode: RenderMode,
    pub thematic_ladder: Ladder,
    pub uncertainty_ladder: Ladder,
    pub base_hue: Option<f64>,
    pub pattern_glyph: Option<PatternGlyph>,
    pub thematic_axis: Axis,
    pub uncertainty_axis: Axis,
    pub palette: PaletteConfig,
    pub canvas: Canvas,
}

fn is_pattern(v: VisualVariable) -> bool {
    matches!(
        v,
        VisualVariable::Size | VisualVariable::Texture | VisualVariable::Density
    )
}

pub(crate) fn is_colour(v: VisualVariable) -> bool {
    matches!(
        v,
        VisualVariable::Value | VisualVariable::Saturation | VisualVariable::Transparency
    )
}

fn select_mode(pairing: Pairing, implantation: Implantation, overlay: bool) -> RenderMode {
    use VisualVariable::*;
    match (pairing.thematic, pairing.uncertainty) {
        (Value, Value) => RenderMode::BivariateChoropleth,
        (Density, Density) => RenderMode::Crosshatch,
        (t, u) if is_pattern(t) || is_pattern(u) => {
            let single = is_pattern(t) != is_pattern(u);
            if overlay && single && implantation == Implantation::Area {
                RenderMode::PatternOnFill
            } else {
                RenderMode::PatternOnly
            }
        }
        _ => RenderMode::FillOnly,
    }
}

fn ladder_spec(
    variable: VisualVariable,
    implantation: Implantation,
    palette: &PaletteConfig,
) -> (LadderQuantity, (f64, f64)) {
    use VisualVariable::*;
    match variable {
        Value => (LadderQuantity::Lightness, palette.lightness),
        Saturation => (LadderQuantity::Saturation, palette.saturation),
        Transparency => (LadderQuantity::Opacity, palette.opacity),
        Blur => (LadderQuantity::BlurRadius, palette.blur_radius),
        Size if implantation == Implantation::Point => {
            (LadderQuantity::MarkerRadius, palette.marker_radius)
        }
        Size => (LadderQuantity::GlyphRadius, palette.dot_radius),
        Density => (LadderQuantity::HatchSpacing, palette.hatch_spacing),
        Texture => (LadderQuantity::CellSize, palette.texture_cell),
    }
}

fn check_endpoints(quantity: LadderQuantity, (a, b): (f64, f64)) -> Result<(), RenderError> {
    let bad = |why: &str| {
        Err(RenderError::LadderEndpointInvalid(format!(
            "{quantity:?} ({a}, {b}): {why}"
        )))
    };
    if !a.is_finite() || !b.is_finite() {
        return bad("endpoints must be finite");
    }
    if a == b {
        return bad("endpoints must differ");
    }
    let unit = matches!(
        quantity,
        LadderQuantity::Lightness | LadderQuantity::Saturation | LadderQuantity::Opacity
    );
    if unit && !((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b)) {
        return bad("must lie in [0, 1]");
    }
    if quantity == LadderQuantity::BlurRadius && (a < 0.0 || b < 0.0) {
        return bad("must be non-negative");
    }
    let positive = matches!(
        quantity,
        LadderQuantity::GlyphRadius
            | LadderQuantity::MarkerRadius
            | LadderQuantity::HatchSpacing
            | LadderQuantity::CellSize
    );
    if positive && (a <= 0.0 || b <= 0.0) {
        return bad("must be positive");
    }
    Ok(())
}

pub(crate) fn fmt_label(x: f64) -> String {
    let s = if x.abs() >= 100.0 {
        format!("{x:.0}")
    } else if x.abs() >= 1.0 {
        format!("{x:.2}")
    } else {
        format!("{x:.3}")
    };
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

fn axis(binned: &BinnedAttribute) -> Axis {
    let labels = match &binned.classes {
        Classes::Continuous { min, max, .. } => vec![fmt_label(*min), fmt_label(*max)],
        Classes::Discrete { n_bins, breaks, .. } => {
            // thresholds put edge values in the upper class, quantile cuts keep them low
            let upper = matches!(binned.scheme, BinningScheme::Threshold { .. });
            (0..*n_bins)
                .map(|k| {
                    if breaks.is_empty() {
                        "all".to_string()
                    } else if k == 0 {
                        format!("{} {}", if upper { "<" } else { "≤" }, fmt_label(breaks[0]))
                    } else if k == n_bins - 1 {
                        format!(
                            "{} {}",
                            if upper { "≥" } else { ">" },
                            fmt_label(breaks[k - 1])
                        )
                    } else {
                        format!("{} – {}", fmt_label(breaks[k - 1]), fmt_label(breaks[k]))
                    }
                })
                .collect()
        }
    };
    Axis {
        title: binned.name.clone(),
        scheme: binned.scheme.clone(),
        labels,
    }
}

/// Builds a concrete style for an available pairing and its two classified attributes.
pub fn build_style(
    kb: &KnowledgeBase,
    pairing: Pairing,
    implantation: Implantation,
    thematic: &BinnedAttribute,
    uncertainty: &BinnedAttribute,
    config: &RenderConfig,
) -> Result<MapStyle, RenderError> {
    if implantation == Implantation::Line {
        return Err(RenderError::UnsupportedImplantation(implantation));
    }
    if !kb
        .pairing_available(pairing.thematic, pairing.uncertainty, implantation)
        .available
    {
        return Err(RenderError::NotAvailable {
            pairing,
            implantation,
        });
    }
    validate_binning(kb, pairing.thematic, implantation, &thematic.scheme)?;
    validate_binning(kb, pairing.uncertainty, implantation, &uncertainty.scheme)?;
    if config.canvas.width <= 0.0 || config.canvas.height <= 0.0 {
        return Err(RenderError::LadderEndpointInvalid(
            "canvas dimensions must be positive".to_string(),
        ));
    }

    let palette = &config.palette;
    if palette.lattice <= 0.0 {
        return Err(RenderError::LadderEndpointInvalid(
            "lattice pitch must be positive".to_string(),
        ));
    }
    let mut ladders = Vec::with_capacity(2);
    for (variable, binned) in [
        (pairing.thematic, thematic),
        (pairing.uncertainty, uncertainty),
    ] {
        let (quantity, endpoints) = ladder_spec(variable, implantation, palette);
        check_endpoints(quantity, endpoints)?;
        ladders.push(Ladder::new(variable, quantity, endpoints, binned.n_bins()));
    }
    let uncertainty_ladder = ladders.pop().expect("two ladders");
    let thematic_ladder = ladders.pop().expect("two ladders");

    let mode = select_mode(pairing, implantation, palette.pattern_overlay);
    let pattern_glyph = if implantation == Implantation::Point {
        None
    } else {
        match mode {
            RenderMode::Crosshatch => Some(PatternGlyph::Hatch45),
            RenderMode::PatternOnly | RenderMode::PatternOnFill => {
                let v = if is_pattern(pairing.thematic) {
                    pairing.thematic
                } else {
                    pairing.uncertainty
                };
                Some(match v {
                    VisualVariable::Size => PatternGlyph::Dot,
                    VisualVariable::Density => PatternGlyph::Hatch45,
                    _ => PatternGlyph::Cross,
                })
            }
            _ => None,
        }
    };

    Ok(MapStyle {
        pairing,
        implantation,
        mode,
        thematic_ladder,
        uncertainty_ladder,
        base_hue: palette.hue,
        pattern_glyph,
        thematic_axis: axis(thematic),
        uncertainty_axis: axis(uncertainty),
        palette: palette.clone(),
        canvas: config.canvas,
    })
}
