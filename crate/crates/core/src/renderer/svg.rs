use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::data_model::{Geometry, Ring};
use crate::knowledge_base::Implantation;

use super::style::{is_colour, Canvas, LevelKey, MapStyle, PatternGlyph};
use super::symbol::{symbol, Symbol};

pub(crate) const LEGEND_WIDTH: f64 = 300.0;
const MARGIN: f64 = 20.0;
const SWATCH: f64 = 32.0;
const GAP: f64 = 4.0;
const GRADIENT_STEPS: u16 = 10;

/// Formats a coordinate with six decimals, trimming trailing zeros.
pub fn fmt_num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" || s.is_empty() {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// XML-safe element id for a feature identifier.
pub fn feature_element_id(id: &str) -> String {
    let body: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("feat-{body}")
}

pub fn level_id(kt: LevelKey, ku: LevelKey) -> String {
    format!("lvl-t{}-u{}", kt.id_part(), ku.id_part())
}

/// Uniform fit of geographic coordinates into the map frame, y pointing down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanvasTransform {
    pub scale: f64,
    pub offset_x: f64,
    pub offset_y: f64,
    pub min_x: f64,
    pub max_y: f64,
}

impl CanvasTransform {
    pub fn fit(bbox: [f64; 4], canvas: Canvas) -> Self {
        let [min_x, min_y, max_x, max_y] = bbox;
        let (w, h) = (max_x - min_x, max_y - min_y);
        let avail_w = (canvas.width - 2.0 * MARGIN).max(1.0);
        let avail_h = (canvas.height - 2.0 * MARGIN).max(1.0);
        let sx = if w > 0.0 { avail_w / w } else { f64::INFINITY };
        let sy = if h > 0.0 { avail_h / h } else { f64::INFINITY };
        let scale = match sx.min(sy) {
            s if s.is_finite() => s,
            _ => 1.0,
        };
        Self {
            scale,
            offset_x: MARGIN + (avail_w - w * scale) / 2.0,
            offset_y: MARGIN + (avail_h - h * scale) / 2.0,
            min_x,
            max_y,
        }
    }

    pub fn apply(&self, [x, y]: [f64; 2]) -> [f64; 2] {
        [
            self.offset_x + (x - self.min_x) * self.scale,
            self.offset_y + (self.max_y - y) * self.scale,
        ]
    }

    pub fn invert(&self, [px, py]: [f64; 2]) -> [f64; 2] {
        [
            (px - self.offset_x) / self.scale + self.min_x,
            self.max_y - (py - self.offset_y) / self.scale,
        ]
    }
}

fn ring_path(out: &mut String, ring: &Ring, transform: &CanvasTransform) {
    for (i, p) in ring.iter().enumerate() {
        let [x, y] = transform.apply(*p);
        let _ = write!(
            out,
            "{}{} {} ",
            if i == 0 { "M" } else { "L" },
            fmt_num(x),
            fmt_num(y)
        );
    }
    out.push_str("Z ");
}

pub fn path_data(geometry: &Geometry, transform: &CanvasTransform) -> String {
    let mut d = String::new();
    for polygon in geometry.polygons() {
        for ring in polygon {
            ring_path(&mut d, ring, transform);
        }
    }
    d.trim_end().to_string()
}

fn blur_attr(sym: &Symbol, base: &str) -> String {
    match sym.blur {
        Some(_) => format!(r#" filter="url(#{base}-blur)""#),
        None => String::new(),
    }
}

/// `<defs>` content for one level pair.
pub(crate) fn write_level_defs(out: &mut String, style: &MapStyle, kt: LevelKey, ku: LevelKey) {
    let sym = symbol(style, kt, ku);
    let base = level_id(kt, ku);
    let data = format!(
        r#"data-t-level="{}" data-u-level="{}" data-lightness="{}" data-saturation="{}" data-opacity="{}""#,
        fmt_num(sym.thematic_level),
        fmt_num(sym.uncertainty_level),
        fmt_num(sym.paint.lightness),
        fmt_num(sym.paint.saturation),
        fmt_num(sym.paint.opacity),
    );
    if let Some(b) = sym.blur {
        let _ = writeln!(
            out,
            r#"<filter id="{base}-blur" x="-20%" y="-20%" width="140%" height="140%" data-blur="{b}"><feGaussianBlur stdDeviation="{b}"/></filter>"#,
            b = fmt_num(b)
        );
    }
    for (n, layer) in sym.layers.iter().enumerate() {
        let id = format!("{base}-g{n}");
        let s = layer.size;
        let paint = format!(
            r#"stroke="{}" stroke-opacity="{}" stroke-width="0.8""#,
            layer.colour,
            fmt_num(layer.opacity)
        );
        match layer.glyph {
            PatternGlyph::Dot => {
                let l = style.palette.lattice;
                let _ = writeln!(
                    out,
                    r#"<pattern id="{id}" class="glyph" patternUnits="userSpaceOnUse" width="{l}" height="{l}" data-radius="{r}"><circle cx="{c}" cy="{c}" r="{r}" fill="{col}" fill-opacity="{op}"/></pattern>"#,
                    l = fmt_num(l),
                    c = fmt_num(l / 2.0),
                    r = fmt_num(s),
                    col = layer.colour,
                    op = fmt_num(layer.opacity),
                );
            }
            PatternGlyph::Hatch45 => {
                let _ = writeln!(
                    out,
                    r#"<pattern id="{id}" class="glyph" patternUnits="userSpaceOnUse" width="{s}" height="{s}" patternTransform="rotate({a})" data-spacing="{s}"><line x1="{h}" y1="0" x2="{h}" y2="{s}" {paint}/></pattern>"#,
                    s = fmt_num(s),
                    h = fmt_num(s / 2.0),
                    a = fmt_num(layer.angle),
                );
            }
            PatternGlyph::Cross => {
                let h = s / 2.0;
                let arm = 0.3 * s;
                let _ = writeln!(
                    out,
                    r#"<pattern id="{id}" class="glyph" patternUnits="userSpaceOnUse" width="{s}" height="{s}" data-cell="{s}"><path d="M{x0} {h}H{x1}M{h} {x0}V{x1}" fill="none" {paint}/></pattern>"#,
                    s = fmt_num(s),
                    h = fmt_num(h),
                    x0 = fmt_num(h - arm),
                    x1 = fmt_num(h + arm),
                );
            }
        }
    }
    match style.implantation {
        Implantation::Point => {
            let r = fmt_num(sym.marker_radius.unwrap_or(5.0));
            let (fill, op) = sym.fill.clone().unwrap_or(("#000000".to_string(), 1.0));
            let _ = write!(
                out,
                r##"<g id="{base}" class="level" {data} data-radius="{r}"><circle r="{r}" fill="{fill}" fill-opacity="{op}" stroke="#333333" stroke-width="0.5"{blur}/>"##,
                op = fmt_num(op),
                blur = blur_attr(&sym, &base),
            );
            for n in 0..sym.layers.len() {
                let _ = write!(out, r#"<circle r="{r}" fill="url(#{base}-g{n})"/>"#);
            }
            out.push_str("</g>\n");
        }
        _ => {
            let (w, h) = (
                fmt_num(style.canvas.width + LEGEND_WIDTH),
                fmt_num(style.canvas.height.max(legend_height(style) + 2.0 * MARGIN)),
            );
            let _ = write!(
                out,
                r#"<pattern id="{base}" class="level" patternUnits="userSpaceOnUse" x="0" y="0" width="{w}" height="{h}" {data}>"#
            );
            if let Some((fill, op)) = &sym.fill {
                let _ = write!(
                    out,
                    r#"<rect width="{w}" height="{h}" fill="{fill}" fill-opacity="{}"/>"#,
                    fmt_num(*op)
                );
            }
            for n in 0..sym.layers.len() {
                let _ = write!(
                    out,
                    r#"<rect width="{w}" height="{h}" fill="url(#{base}-g{n})"/>"#
                );
            }
            out.push_str("</pattern>\n");
        }
    }
}

fn discrete_keys(n: Option<usize>) -> Option<Vec<LevelKey>> {
    n.map(|n| (0..n).map(LevelKey::Bin).collect())
}

fn mid(n: Option<usize>) -> LevelKey {
    match n {
        Some(n) => LevelKey::Bin(n / 2),
        None => LevelKey::continuous(0.5),
    }
}

fn gradient_keys() -> Vec<LevelKey> {
    (0..=GRADIENT_STEPS)
        .map(|i| LevelKey::Continuous(i * (LevelKey::STEPS / GRADIENT_STEPS)))
        .collect()
}

pub(crate) struct LegendLayout {
    pub swatches: Vec<(LevelKey, LevelKey)>,
    /// Gradient bars: (dimension, keys) with the other dimension held at its middle.
    pub gradients: Vec<(&'static str, Vec<(LevelKey, LevelKey)>)>,
}

pub(crate) fn legend_layout(style: &MapStyle) -> LegendLayout {
    let nt = style.thematic_ladder.levels.len();
    let nu = style.uncertainty_ladder.levels.len();
    let nt = (nt > 0).then_some(nt);
    let nu = (nu > 0).then_some(nu);
    let mut swatches = Vec::new();
    match (discrete_keys(nt), discrete_keys(nu)) {
        (Some(ts), Some(us)) => {
            for &t in &ts {
                for &u in &us {
                    swatches.push((t, u));
                }
            }
        }
        (Some(ts), None) => swatches.extend(ts.iter().map(|&t| (t, mid(nu)))),
        (None, Some(us)) => swatches.extend(us.iter().map(|&u| (mid(nt), u))),
        (None, None) => {}
    }
    let mut gradients = Vec::new();
    if nt.is_none() {
        gradients.push((
            "thematic",
            gradient_keys().into_iter().map(|t| (t, mid(nu))).collect(),
        ));
    }
    if nu.is_none() {
        gradients.push((
            "uncertainty",
            gradient_keys().into_iter().map(|u| (mid(nt), u)).collect(),
        ));
    }
    LegendLayout {
        swatches,
        gradients,
    }
}

pub(crate) fn legend_keys(style: &MapStyle) -> BTreeSet<(LevelKey, LevelKey)> {
    let layout = legend_layout(style);
    let mut keys: BTreeSet<_> = layout.swatches.into_iter().collect();
    for (_, g) in layout.gradients {
        keys.extend(g);
    }
    keys
}

fn grid_dims(style: &MapStyle) -> (usize, usize) {
    let rows = style.thematic_ladder.levels.len();
    let cols = style.uncertainty_ladder.levels.len();
    match (rows, cols) {
        (0, 0) => (0, 0),
        (0, c) => (1, c),
        (r, 0) => (r, 1),
        (r, c) => (r, c),
    }
}

/// Whether the nine-level advisory applies: two colour variables with more
/// than nine combined classes.
pub fn nine_level_advisory(style: &MapStyle) -> bool {
    let nt = style.thematic_ladder.levels.len();
    let nu = style.uncertainty_ladder.levels.len();
    is_colour(style.pairing.thematic) && is_colour(style.pairing.uncertainty) && nt * nu > 9
}

pub(crate) fn legend_height(style: &MapStyle) -> f64 {
    let (rows, _) = grid_dims(style);
    let layout = legend_layout(style);
    40.0 + rows as f64 * (SWATCH + GAP)
        + 70.0
        + layout.gradients.len() as f64 * 50.0
        + if nine_level_advisory(style) {
            30.0
        } else {
            0.0
        }
}

fn swatch_element(
    style: &MapStyle,
    kt: LevelKey,
    ku: LevelKey,
    x: f64,
    y: f64,
    w: f64,
    class: &str,
) -> String {
    let base = level_id(kt, ku);
    let sym = symbol(style, kt, ku);
    match style.implantation {
        Implantation::Point => format!(
            r##"<g class="{class}" data-t="{}" data-u="{}"><rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#cccccc" stroke-width="0.5"/><use href="#{base}" x="{}" y="{}"/></g>"##,
            kt.id_part(),
            ku.id_part(),
            fmt_num(x),
            fmt_num(y),
            fmt_num(w),
            fmt_num(SWATCH),
            fmt_num(x + w / 2.0),
            fmt_num(y + SWATCH / 2.0),
        ),
        _ => format!(
            r##"<rect class="{class}" data-t="{}" data-u="{}" x="{}" y="{}" width="{}" height="{}" fill="url(#{base})" stroke="#595959" stroke-width="0.5"{}/>"##,
            kt.id_part(),
            ku.id_part(),
            fmt_num(x),
            fmt_num(y),
            fmt_num(w),
            fmt_num(SWATCH),
            blur_attr(&sym, &base),
        ),
    }
}

fn text(out: &mut String, x: f64, y: f64, class: &str, anchor: &str, body: &str) {
    let _ = writeln!(
        out,
        r#"<text class="{class}" x="{}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="10">{}</text>"#,
        fmt_num(x),
        fmt_num(y),
        escape(body)
    );
}

/// Legend group positioned at `(ox, oy)`; references the level defs by id.
pub(crate) fn legend_group(style: &MapStyle, ox: f64, oy: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<g id="legend" class="legend" transform="translate({} {})">"#,
        fmt_num(ox),
        fmt_num(oy)
    );
    let t_title = format!("{} ({})", style.thematic_axis.title, style.pairing.thematic);
    let u_title = format!(
        "{} ({})",
        style.uncertainty_axis.title, style.pairing.uncertainty
    );
    let layout = legend_layout(style);
    let (rows, cols) = grid_dims(style);
    let x0 = 80.0;
    let y0 = 30.0;
    text(
        &mut out,
        0.0,
        12.0,
        "axis-title thematic",
        "start",
        &t_title,
    );

    let t_discrete = !style.thematic_ladder.is_continuous();
    let u_discrete = !style.uncertainty_ladder.is_continuous();
    for &(kt, ku) in &layout.swatches {
        let row = match kt {
            LevelKey::Bin(i) => i,
            LevelKey::Continuous(_) => 0,
        };
        let col = match ku {
            LevelKey::Bin(j) => j,
            LevelKey::Continuous(_) => 0,
        };
        // higher thematic classes sit higher in the grid
        let x = x0 + col as f64 * (SWATCH + GAP);
        let y = y0 + (rows - 1 - row) as f64 * (SWATCH + GAP);
        out.push_str(&swatch_element(style, kt, ku, x, y, SWATCH, "swatch"));
        out.push('\n');
    }
    if t_discrete {
        for (i, label) in style.thematic_axis.labels.iter().enumerate() {
            let y = y0 + (rows - 1 - i) as f64 * (SWATCH + GAP) + SWATCH / 2.0 + 3.0;
            text(&mut out, x0 - 6.0, y, "axis-label thematic", "end", label);
        }
    }
    let mut y = y0 + rows as f64 * (SWATCH + GAP);
    if u_discrete && rows > 0 {
        for (j, label) in style.uncertainty_axis.labels.iter().enumerate() {
            let x = x0 + j as f64 * (SWATCH + GAP) + SWATCH / 2.0;
            let _ = writeln!(
                out,
                r#"<text class="axis-label uncertainty" transform="translate({} {}) rotate(35)" font-family="sans-serif" font-size="10">{}</text>"#,
                fmt_num(x),
                fmt_num(y + 10.0),
                escape(label)
            );
        }
    }
    y += 60.0;
    text(&mut out, x0, y, "axis-title uncertainty", "start", &u_title);
    let _ = cols;

    for (dimension, keys) in &layout.gradients {
        y += 12.0;
        let step_w = 200.0 / keys.len() as f64;
        let _ = writeln!(
            out,
            r#"<g class="gradient-bar" data-dimension="{dimension}">"#
        );
        for (n, &(kt, ku)) in keys.iter().enumerate() {
            out.push_str(&swatch_element(
                style,
                kt,
                ku,
                n as f64 * step_w,
                y,
                step_w,
                "gradient-step",
            ));
            out.push('\n');
        }
        let axis = if *dimension == "thematic" {
            &style.thematic_axis
        } else {
            &style.uncertainty_axis
        };
        let (lo, hi) = (
            axis.labels.first().cloned().unwrap_or_default(),
            axis.labels.last().cloned().unwrap_or_default(),
        );
        text(
            &mut out,
            0.0,
            y + SWATCH + 12.0,
            "gradient-label",
            "start",
            &format!("{} {lo}", axis.title),
        );
        text(
            &mut out,
            200.0,
            y + SWATCH + 12.0,
            "gradient-label",
            "end",
            &hi,
        );
        out.push_str("</g>\n");
        y += SWATCH + 20.0;
    }
    if nine_level_advisory(style) {
        y += 16.0;
        text(
            &mut out,
            0.0,
            y,
            "advisory",
            "start",
            &format!(
                "Advisory: {} colour classes exceed nine distinguishable levels",
                style.thematic_ladder.levels.len() * style.uncertainty_ladder.levels.len()
            ),
        );
    }
    out.push_str("</g>\n");
    out
}

pub(crate) fn document_open(out: &mut String, width: f64, height: f64, style: &MapStyle) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" data-pairing="{}" data-mode="{:?}" data-implantation="{}">"#,
        escape(&style.pairing.to_string()),
        style.mode,
        style.implantation,
        w = fmt_num(width),
        h = fmt_num(height),
    );
    let _ = writeln!(
        out,
        r##"<rect class="background" width="{}" height="{}" fill="#ffffff"/>"##,
        fmt_num(width),
        fmt_num(height)
    );
}

pub(crate) fn feature_element(
    out: &mut String,
    style: &MapStyle,
    id: &str,
    geometry: &Geometry,
    kt: LevelKey,
    ku: LevelKey,
    transform: &CanvasTransform,
) {
    let base = level_id(kt, ku);
    let _ = write!(
        out,
        r#"<g id="{}" class="feature" data-id="{}" data-t="{}" data-u="{}">"#,
        feature_element_id(id),
        escape(id),
        kt.id_part(),
        ku.id_part()
    );
    match geometry {
        Geometry::Point(p) => {
            let [x, y] = transform.apply(*p);
            let _ = write!(
                out,
                r##"<use href="#{base}" x="{}" y="{}"/>"##,
                fmt_num(x),
                fmt_num(y)
            );
        }
        _ => {
            let sym = symbol(style, kt, ku);
            let _ = write!(
                out,
                r##"<path d="{}" fill="url(#{base})" fill-rule="evenodd" stroke="#595959" stroke-width="0.6"{}/>"##,
                path_data(geometry, transform),
                blur_attr(&sym, &base)
            );
        }
    }
    out.push_str("</g>\n");
}
