//! Concrete symbol parameters for one (thematic level, uncertainty level) pair.

use crate::knowledge_base::Implantation;

use super::style::{GlyphColour, LadderQuantity, LevelKey, MapStyle, PatternGlyph, RenderMode};

/// An HSL colour with opacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Paint {
    pub hue: f64,
    pub saturation: f64,
    pub lightness: f64,
    pub opacity: f64,
}

impl Paint {
    pub fn rgb(&self) -> [u8; 3] {
        hsl_to_rgb(self.hue, self.saturation, self.lightness)
    }

    pub fn hex(&self) -> String {
        let [r, g, b] = self.rgb();
        format!("#{r:02x}{g:02x}{b:02x}")
    }
}

pub fn hsl_to_rgb(hue: f64, s: f64, l: f64) -> [u8; 3] {
    let h = hue.rem_euclid(360.0) / 60.0;
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to = |v: f64| ((v + m).clamp(0.0, 1.0) * 255.0).round() as u8;
    [to(r), to(g), to(b)]
}

/// Multiply blend of two colours, as used for bivariate choropleth fills.
pub fn multiply(a: [u8; 3], b: [u8; 3]) -> [u8; 3] {
    let m = |x: u8, y: u8| ((f64::from(x) * f64::from(y)) / 255.0).round() as u8;
    [m(a[0], b[0]), m(a[1], b[1]), m(a[2], b[2])]
}

pub fn hex(rgb: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])
}

/// One repeating glyph layer (dots, hatching or crosses).
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphLayer {
    pub glyph: PatternGlyph,
    /// Dot radius, hatch spacing or texture cell size.
    pub size: f64,
    /// Hatch angle in degrees.
    pub angle: f64,
    pub colour: String,
    pub opacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub fill: Option<(String, f64)>,
    pub layers: Vec<GlyphLayer>,
    pub blur: Option<f64>,
    pub marker_radius: Option<f64>,
    /// Colour channel values for inspection.
    pub paint: Paint,
    pub thematic_level: f64,
    pub uncertainty_level: f64,
}

pub fn symbol(style: &MapStyle, kt: LevelKey, ku: LevelKey) -> Symbol {
    let palette = &style.palette;
    let mut paint = Paint {
        hue: style.base_hue.unwrap_or(0.0),
        saturation: if style.base_hue.is_some() {
            palette.base_saturation
        } else {
            0.0
        },
        lightness: palette.base_lightness,
        opacity: 1.0,
    };
    let mut blur = None;
    let mut marker_radius = (style.implantation == Implantation::Point)
        .then(|| (palette.marker_radius.0 + palette.marker_radius.1) / 2.0);
    let mut glyph_sizes = Vec::new();

    let t = style.thematic_ladder.at(kt);
    let u = style.uncertainty_ladder.at(ku);
    for (ladder, x) in [(&style.thematic_ladder, t), (&style.uncertainty_ladder, u)] {
        match ladder.quantity {
            LadderQuantity::Lightness => paint.lightness = x,
            LadderQuantity::Saturation => paint.saturation = x,
            LadderQuantity::Opacity => paint.opacity = x,
            LadderQuantity::BlurRadius => blur = Some(x),
            LadderQuantity::MarkerRadius => marker_radius = Some(x),
            LadderQuantity::GlyphRadius => glyph_sizes.push((PatternGlyph::Dot, x)),
            LadderQuantity::HatchSpacing => glyph_sizes.push((PatternGlyph::Hatch45, x)),
            LadderQuantity::CellSize => glyph_sizes.push((PatternGlyph::Cross, x)),
        }
    }

    let colour = (paint.hex(), paint.opacity);
    let ink = match palette.glyph_colour {
        GlyphColour::Black => "#000000",
        GlyphColour::White => "#ffffff",
    };
    let layer = |(glyph, size): (PatternGlyph, f64), i: usize, colour: (String, f64)| GlyphLayer {
        glyph,
        size,
        angle: if i == 0 { 45.0 } else { -45.0 },
        colour: colour.0,
        opacity: colour.1,
    };

    let (fill, layers) = match style.mode {
        RenderMode::BivariateChoropleth => {
            let second = palette
                .secondary_hue
                .unwrap_or(style.base_hue.map_or(0.0, |h| h + 200.0));
            let sat = if style.base_hue.is_some() {
                palette.base_saturation
            } else {
                0.0
            };
            let a = hsl_to_rgb(paint.hue, sat, t);
            let b = hsl_to_rgb(second, sat, u);
            (Some((hex(multiply(a, b)), 1.0)), Vec::new())
        }
        RenderMode::FillOnly => (Some(colour), Vec::new()),
        RenderMode::PatternOnFill => (
            Some(colour),
            glyph_sizes
                .into_iter()
                .enumerate()
                .map(|(i, g)| layer(g, i, (ink.to_string(), 1.0)))
                .collect(),
        ),
        RenderMode::PatternOnly | RenderMode::Crosshatch => {
            if style.implantation == Implantation::Point {
                (Some(colour), Vec::new())
            } else {
                (
                    None,
                    glyph_sizes
                        .into_iter()
                        .enumerate()
                        .map(|(i, g)| layer(g, i, colour.clone()))
                        .collect(),
                )
            }
        }
    };

    Symbol {
        fill,
        layers,
        blur,
        marker_radius,
        paint,
        thematic_level: t,
        uncertainty_level: u,
    }
}
