//! Independent oracles shared by the integration tests and the acceptance run.
//!
//! Nothing here calls into the crate's own lookup or filtering logic: the rule
//! oracle reads the raw TOML through `toml::Value`, the transcription audit
//! compares against a hand-written grid, and the render checks parse the SVG.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use bivmap::data_model::{BinnedAttribute, Classes, Dataset};
use bivmap::knowledge_base::{
    Evidence, Implantation, KnowledgeBase, SelectiveLength, TableDump, VisualVariable,
};
use bivmap::renderer::{CanvasTransform, MapStyle};

pub const TRANSCRIPTION: &str = include_str!("../fixtures/rule_tables.txt");

fn json_name<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_value(x)
        .unwrap()
        .as_str()
        .expect("unit enum")
        .to_string()
}

// ---------------------------------------------------------------------------
// Transcription audit

/// Cell-by-cell comparison outcome.
#[derive(Debug, Default)]
pub struct Audit {
    pub cells: usize,
    pub mismatches: Vec<String>,
    pub asterisks: usize,
}

impl Audit {
    pub fn agreement(&self) -> f64 {
        1.0 - self.mismatches.len() as f64 / self.cells.max(1) as f64
    }
}

struct Grid {
    table: String,
    scope: String,
    columns: Vec<String>,
    rows: Vec<(String, Vec<String>)>,
}

fn parse_transcription(text: &str) -> Vec<Grid> {
    let mut grids: Vec<Grid> = Vec::new();
    let mut pending_header = false;
    for line in text.lines() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("== ") {
            let (table, scope) = rest.split_once(' ').expect("== table scope");
            grids.push(Grid {
                table: table.to_string(),
                scope: scope.to_string(),
                columns: Vec::new(),
                rows: Vec::new(),
            });
            pending_header = true;
            continue;
        }
        let grid = grids.last_mut().expect("cell row before header");
        let mut cells: Vec<String> = line.split('|').map(str::to_string).collect();
        let head = cells.remove(0);
        if pending_header {
            grid.columns = cells;
            pending_header = false;
        } else {
            assert_eq!(cells.len(), grid.columns.len(), "ragged row `{line}`");
            grid.rows.push((head, cells));
        }
    }
    grids
}

fn var(name: &str) -> VisualVariable {
    name.parse().unwrap_or_else(|e| panic!("{e}"))
}

fn imp(name: &str) -> Implantation {
    name.parse().unwrap_or_else(|e| panic!("{e}"))
}

fn marked(evidence: Evidence, s: String) -> String {
    match evidence {
        Evidence::Established => format!("_{s}_"),
        Evidence::AuthorEstimate => s,
    }
}

/// Renders one knowledge-base cell in the transcription notation.
fn kb_cell(kb: &KnowledgeBase, table: &str, scope: &str, row: &str, column: &str) -> String {
    match table {
        "availability" => {
            let e = kb.pairing_available(var(row), var(column), imp(scope));
            if !e.available {
                return String::new();
            }
            match e.variant {
                None => "Y".to_string(),
                Some(v) => {
                    let letter = match json_name(&v).as_str() {
                        "BivariateChoropleth" => 'A',
                        "LineWidth" => 'B',
                        "WidthWithDashLength" => 'C',
                        "Crosshatch" => 'D',
                        other => panic!("variant {other}"),
                    };
                    format!("Y^{letter}")
                }
            }
        }
        "properties" => {
            let r = kb.property_row(var(row));
            let cell = match column {
                "Selective" => r.selective,
                "Associative" => r.associative,
                "Ordered" => r.ordered,
                "Quantitative" => r.quantitative,
                other => panic!("property column {other}"),
            };
            marked(
                cell.evidence,
                if cell.observed { "Y" } else { "-" }.to_string(),
            )
        }
        "lengths" => {
            let e = kb.selective_length(var(row), imp(column));
            match e.length {
                SelectiveLength::Levels(n) => marked(e.evidence, n.to_string()),
                SelectiveLength::Unavailable => String::new(),
            }
        }
        "separability" => match kb.separability_class(var(row), var(column), imp(scope)) {
            Err(_) => String::new(),
            Ok(e) => {
                let mut s = marked(e.evidence, e.class.letter().to_string());
                if e.uncertain_not_recommended {
                    s.push('*');
                }
                s
            }
        },
        "tasks" => {
            let entry = kb
                .tasks()
                .iter()
                .find(|t| json_name(&t.task) == row)
                .unwrap_or_else(|| panic!("task {row} missing"));
            match column {
                "Arity" => json_name(&entry.arity),
                "Requirement" => json_name(&entry.requirement),
                other => panic!("task column {other}"),
            }
        }
        other => panic!("unknown table {other}"),
    }
}

/// Compares every transcribed cell against the knowledge base, and checks that
/// the knowledge base holds no rows beyond the transcription.
pub fn audit_transcription(kb: &KnowledgeBase, text: &str) -> Audit {
    let mut audit = Audit::default();
    let mut row_counts: BTreeMap<String, usize> = BTreeMap::new();
    for grid in parse_transcription(text) {
        *row_counts.entry(grid.table.clone()).or_default() += grid.rows.len();
        for (row, cells) in &grid.rows {
            for (column, expected) in grid.columns.iter().zip(cells) {
                audit.cells += 1;
                if expected.ends_with('*') {
                    audit.asterisks += 1;
                }
                let got = kb_cell(kb, &grid.table, &grid.scope, row, column);
                if &got != expected {
                    audit.mismatches.push(format!(
                        "{} {} [{row}, {column}]: transcribed `{expected}`, encoded `{got}`",
                        grid.table, grid.scope
                    ));
                }
            }
        }
    }
    if let TableDump::Tasks(rows) = kb.table(bivmap::knowledge_base::TableId::Tasks) {
        if rows.len() != row_counts.get("tasks").copied().unwrap_or(0) {
            audit
                .mismatches
                .push(format!("tasks: {} encoded rows", rows.len()));
        }
    }
    audit
}

// ---------------------------------------------------------------------------
// Brute-force filter over the raw rule file

/// A requirement profile plus the request fields the filter reads, in plain
/// strings so the oracle shares no types with the implementation.
#[derive(Debug, Clone)]
pub struct RawProfile {
    pub thematic: Vec<&'static str>,
    pub uncertainty: Vec<&'static str>,
    pub pairing: Vec<&'static str>,
    /// `None` for a continuous scheme.
    pub thematic_bins: Option<usize>,
    pub uncertainty_bins: Option<usize>,
    pub dominance: Option<bool>,
    pub include_uncertain: bool,
}

pub struct RawRules {
    doc: toml::Table,
}

fn strip(cell: &str) -> &str {
    cell.trim_start_matches('[')
        .trim_end_matches('*')
        .trim_end_matches(']')
}

impl RawRules {
    pub fn parse(text: &str) -> Self {
        Self {
            doc: text
                .parse::<toml::Table>()
                .expect("rule file parses as TOML"),
        }
    }

    fn strings(&self, path: &[&str]) -> Vec<String> {
        let mut v = &self.doc[path[0]];
        for key in &path[1..] {
            v = &v[*key];
        }
        v.as_array()
            .expect("array")
            .iter()
            .map(|c| c.as_str().expect("string cell").to_string())
            .collect()
    }

    fn maybe_strings(&self, path: &[&str]) -> Option<Vec<String>> {
        let mut v = self.doc.get(path[0])?;
        for key in &path[1..] {
            v = v.get(*key)?;
        }
        Some(
            v.as_array()?
                .iter()
                .map(|c| c.as_str().unwrap().to_string())
                .collect(),
        )
    }

    pub fn variables(&self) -> Vec<String> {
        self.strings(&["variables", "columns"])
    }

    fn column(&self, table: &[&str], name: &str) -> usize {
        let mut path = table.to_vec();
        path.push("columns");
        self.strings(&path)
            .iter()
            .position(|c| c == name)
            .unwrap_or_else(|| panic!("no column {name}"))
    }

    fn property(&self, variable: &str, column: &str) -> bool {
        let row = self.strings(&["properties", variable]);
        strip(&row[self.column(&["properties"], column)]) != "-"
    }

    fn satisfies(&self, variable: &str, requirement: &str) -> bool {
        match requirement {
            "Selective" => self.property(variable, "Selective"),
            "Ordinal" => self.property(variable, "Ordered"),
            "Quantitative" => self.property(variable, "Quantitative"),
            "Associative" => self.property(variable, "Associative"),
            "Dissociative" => !self.property(variable, "Associative"),
            other => panic!("not a per-variable requirement: {other}"),
        }
    }

    fn bins_fit(
        &self,
        variable: &str,
        implantation: &str,
        bins: Option<usize>,
        reqs: &[&str],
    ) -> bool {
        let Some(n) = bins else {
            // unclassed data cannot be selective
            return !reqs.contains(&"Selective");
        };
        let row = self.strings(&["lengths", variable]);
        let cell = strip(&row[self.column(&["lengths"], implantation)]);
        match cell.parse::<usize>() {
            Ok(max) => n <= max,
            Err(_) => false,
        }
    }

    /// Pairings accepted for `implantation` under `profile`, as (thematic, uncertainty) names.
    pub fn accepted(&self, implantation: &str, profile: &RawProfile) -> BTreeSet<(String, String)> {
        let columns = self.variables();
        let uncertainty_only = self.strings(&["variables", "uncertainty_only"]);
        let dominance = profile
            .dominance
            .unwrap_or(profile.uncertainty.contains(&"Dissociative"));
        let letters: Vec<&str> = profile
            .pairing
            .iter()
            .map(|r| match *r {
                "Integral" => "I",
                "Separable" => "S",
                "Asymmetric" => "A",
                "Configural" => "C",
                other => panic!("not a class: {other}"),
            })
            .collect();

        let mut out = BTreeSet::new();
        let rows = self.doc["availability"][implantation].as_table().unwrap();
        for thematic in rows.keys() {
            let avail = self.strings(&["availability", implantation, thematic]);
            let sep = self
                .maybe_strings(&["separability", implantation, thematic])
                .unwrap_or_default();
            for (j, uncertainty) in columns.iter().enumerate() {
                if avail[j].is_empty() {
                    continue;
                }
                let (t, u) = (thematic.as_str(), uncertainty.as_str());
                let ok = !uncertainty_only.iter().any(|v| v == t)
                    && profile.thematic.iter().all(|r| self.satisfies(t, r))
                    && profile.uncertainty.iter().all(|r| self.satisfies(u, r))
                    && self.bins_fit(t, implantation, profile.thematic_bins, &profile.thematic)
                    && self.bins_fit(
                        u,
                        implantation,
                        profile.uncertainty_bins,
                        &profile.uncertainty,
                    )
                    && {
                        let cell = sep.get(j).map(String::as_str).unwrap_or("");
                        let class = strip(cell);
                        !class.is_empty()
                            && letters.iter().all(|l| *l == class)
                            && (!cell.ends_with('*') || profile.include_uncertain)
                    }
                    && !(dominance
                        && !self.property(u, "Associative")
                        && self.property(t, "Associative"));
                if ok {
                    out.insert((t.to_string(), u.to_string()));
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Quantile classes by sorting

/// Class of each value: sort, take the cut for class j at 1-based rank
/// ceil(j*n/k), and count the cuts strictly below the value.
pub fn quantile_oracle(values: &[f64], k: usize) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let cuts: Vec<f64> = (1..k)
        .map(|j| {
            let rank = ((j * n) as f64 / k as f64).ceil() as usize;
            sorted[rank.max(1) - 1]
        })
        .collect();
    values
        .iter()
        .map(|x| cuts.iter().filter(|c| *c < x).count())
        .collect()
}

// ---------------------------------------------------------------------------
// Rendered document checks

fn key_order(key: &str) -> f64 {
    match key.strip_prefix('c') {
        Some(q) => q.parse::<f64>().unwrap() / 1000.0,
        None => key.parse::<f64>().unwrap(),
    }
}

fn expected_key(binned: &BinnedAttribute, i: usize) -> Result<String, f64> {
    match &binned.classes {
        Classes::Discrete { indices, .. } => Ok(indices[i].to_string()),
        Classes::Continuous { normalized, .. } => Err(normalized[i]),
    }
}

fn path_points(d: &str) -> Vec<[f64; 2]> {
    let nums: Vec<f64> = d
        .split(|c: char| c.is_whitespace() || c == 'M' || c == 'L' || c == 'Z')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().unwrap())
        .collect();
    nums.chunks(2).map(|c| [c[0], c[1]]).collect()
}

/// Counts of what the invariant check looked at, for reporting.
#[derive(Debug, Default)]
pub struct RenderSummary {
    pub features: usize,
    pub swatches: usize,
    pub gradient_steps: usize,
    pub level_patterns: usize,
}

fn monotone(values: &BTreeMap<String, f64>) -> Result<(), String> {
    let mut ordered: Vec<(f64, f64)> = values.iter().map(|(k, v)| (key_order(k), *v)).collect();
    ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if ordered.len() < 2 {
        return Ok(());
    }
    let rising = ordered.windows(2).all(|w| w[1].1 > w[0].1);
    let falling = ordered.windows(2).all(|w| w[1].1 < w[0].1);
    if rising || falling {
        Ok(())
    } else {
        Err(format!("ladder not strictly monotone: {ordered:?}"))
    }
}

/// Checks a map document against the dataset it was drawn from: one feature
/// group per feature in order, keys matching the classes, geometry matching
/// the canvas fit, strictly monotone ladders, and the expected legend size.
pub fn check_render(
    svg: &str,
    dataset: &Dataset,
    thematic: &BinnedAttribute,
    uncertainty: &BinnedAttribute,
    style: &MapStyle,
) -> Result<RenderSummary, String> {
    let doc = roxmltree::Document::parse(svg).map_err(|e| e.to_string())?;
    let mut summary = RenderSummary::default();
    let transform = CanvasTransform::fit(dataset.bbox(), style.canvas);

    // level patterns: key -> ladder value, per dimension
    let mut t_levels: BTreeMap<String, f64> = BTreeMap::new();
    let mut u_levels: BTreeMap<String, f64> = BTreeMap::new();
    let mut pattern_ids = BTreeSet::new();
    for node in doc.descendants().filter(|n| n.has_tag_name("pattern")) {
        let id = node.attribute("id").unwrap_or_default();
        pattern_ids.insert(id.to_string());
        if node.attribute("class") != Some("level") {
            continue;
        }
        summary.level_patterns += 1;
        let rest = id.strip_prefix("lvl-t").ok_or(format!("level id {id}"))?;
        let (t_key, u_key) = rest.split_once("-u").ok_or(format!("level id {id}"))?;
        for (key, attr, levels) in [
            (t_key, "data-t-level", &mut t_levels),
            (u_key, "data-u-level", &mut u_levels),
        ] {
            let value: f64 = node
                .attribute(attr)
                .ok_or(format!("{id} lacks {attr}"))?
                .parse()
                .map_err(|_| format!("{id} {attr}"))?;
            if let Some(prev) = levels.insert(key.to_string(), value) {
                if prev != value {
                    return Err(format!("{attr} for key {key} differs across patterns"));
                }
            }
        }
    }
    monotone(&t_levels)?;
    monotone(&u_levels)?;

    let features: Vec<_> = doc
        .descendants()
        .filter(|n| n.has_tag_name("g") && n.attribute("class") == Some("feature"))
        .collect();
    summary.features = features.len();
    if features.len() != dataset.len() {
        return Err(format!(
            "{} feature groups for {} features",
            features.len(),
            dataset.len()
        ));
    }
    for (i, (node, feature)) in features.iter().zip(&dataset.features).enumerate() {
        if node.attribute("data-id") != Some(feature.id.as_str()) {
            return Err(format!(
                "feature {i} is {:?}, expected {}",
                node.attribute("data-id"),
                feature.id
            ));
        }
        for (attr, binned) in [("data-t", thematic), ("data-u", uncertainty)] {
            let got = node
                .attribute(attr)
                .ok_or(format!("{} lacks {attr}", feature.id))?;
            match expected_key(binned, i) {
                Ok(k) if k == got => {}
                Ok(k) => return Err(format!("{} {attr}={got}, expected {k}", feature.id)),
                Err(norm) => {
                    if (key_order(got) - norm).abs() > 0.0005 + 1e-12 {
                        return Err(format!("{} {attr}={got}, normalized {norm}", feature.id));
                    }
                }
            }
        }
        let path = node
            .children()
            .find(|n| n.has_tag_name("path"))
            .ok_or(format!("{} has no path", feature.id))?;
        let fill = path.attribute("fill").unwrap_or_default();
        let target = fill
            .strip_prefix("url(#")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or(format!("{} fill {fill}", feature.id))?;
        if !pattern_ids.contains(target) {
            return Err(format!("{} fills with undefined {target}", feature.id));
        }
        let drawn = path_points(path.attribute("d").unwrap_or_default());
        let source: Vec<[f64; 2]> = feature.geometry.positions().collect();
        if drawn.len() != source.len() {
            return Err(format!(
                "{}: {} drawn vertices, {} source",
                feature.id,
                drawn.len(),
                source.len()
            ));
        }
        for (p, q) in drawn.iter().zip(&source) {
            let expected = transform.apply(*q);
            if (p[0] - expected[0]).abs() > 1e-6 || (p[1] - expected[1]).abs() > 1e-6 {
                return Err(format!("{}: vertex {p:?} vs {expected:?}", feature.id));
            }
        }
    }

    summary.swatches = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("swatch"))
        .count();
    summary.gradient_steps = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("gradient-step"))
        .count();
    let expected_swatches = match (thematic.n_bins(), uncertainty.n_bins()) {
        (Some(a), Some(b)) => a * b,
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => 0,
    };
    let expected_steps = match (thematic.n_bins(), uncertainty.n_bins()) {
        (Some(_), Some(_)) => 0,
        (None, None) => 22,
        _ => 11,
    };
    if summary.swatches != expected_swatches || summary.gradient_steps != expected_steps {
        return Err(format!(
            "legend has {} swatches and {} gradient steps, expected {expected_swatches} and {expected_steps}",
            summary.swatches, summary.gradient_steps
        ));
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Randomized profiles

pub const PER_VARIABLE: [&str; 5] = [
    "Selective",
    "Ordinal",
    "Quantitative",
    "Associative",
    "Dissociative",
];
pub const CLASSES: [&str; 4] = ["Integral", "Separable", "Asymmetric", "Configural"];

fn subset<R: rand::RngExt>(rng: &mut R, pool: &[&'static str], p: f64) -> Vec<&'static str> {
    pool.iter()
        .copied()
        .filter(|_| rng.random_bool(p))
        .collect()
}

fn bins<R: rand::RngExt>(rng: &mut R) -> Option<usize> {
    if rng.random_bool(0.2) {
        None
    } else {
        Some(rng.random_range(2..=6))
    }
}

pub fn random_profile<R: rand::RngExt>(rng: &mut R) -> RawProfile {
    RawProfile {
        thematic: subset(rng, &PER_VARIABLE, 0.3),
        uncertainty: subset(rng, &PER_VARIABLE, 0.3),
        // mostly zero or one class, occasionally a conflicting pair
        pairing: subset(rng, &CLASSES, 0.2),
        thematic_bins: bins(rng),
        uncertainty_bins: bins(rng),
        dominance: match rng.random_range(0..3) {
            0 => None,
            1 => Some(true),
            _ => Some(false),
        },
        include_uncertain: rng.random_bool(0.3),
    }
}

/// The same profile in the crate's own types, for `filter_candidates`.
pub fn to_request(
    raw: &RawProfile,
    implantation: Implantation,
) -> (
    bivmap::recommender::DesignRequest,
    bivmap::recommender::RequirementProfile,
) {
    use bivmap::data_model::BinningScheme;
    use bivmap::knowledge_base::{OperationalTask, PerceptionRequirement};
    use bivmap::recommender::{
        Constraints, DesignRequest, DimensionSpec, RankingWeights, RequirementProfile, Target,
        TaskAssignment, REQUEST_SCHEMA,
    };
    let reqs = |names: &[&str]| -> BTreeSet<PerceptionRequirement> {
        names.iter().map(|n| n.parse().unwrap()).collect()
    };
    let scheme = |b: Option<usize>| match b {
        Some(k) => BinningScheme::Quantile { k },
        None => BinningScheme::Continuous,
    };
    let request = DesignRequest {
        schema: REQUEST_SCHEMA.to_string(),
        implantation,
        thematic: DimensionSpec {
            name: "t".into(),
            binning: scheme(raw.thematic_bins),
        },
        uncertainty: DimensionSpec {
            name: "u".into(),
            binning: scheme(raw.uncertainty_bins),
        },
        tasks: vec![TaskAssignment::new(OperationalTask::Isolate, Target::Both)],
        constraints: Constraints {
            no_uncertainty_dominance: raw.dominance,
            include_uncertain_classifications: raw.include_uncertain,
        },
        ranking_weights: RankingWeights::default(),
        ensemble_schemes: Vec::new(),
    };
    let profile = RequirementProfile {
        thematic: reqs(&raw.thematic),
        uncertainty: reqs(&raw.uncertainty),
        pairing: reqs(&raw.pairing),
    };
    (request, profile)
}

/// Runs `profiles` random profiles per implantation through both the crate
/// filter and the raw oracle; returns (comparisons, discrepancies).
pub fn oracle_sweep(
    kb: &KnowledgeBase,
    rules_toml: &str,
    seed: u64,
    profiles: usize,
) -> (usize, Vec<String>) {
    use rand::SeedableRng;
    let raw = RawRules::parse(rules_toml);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut compared = 0;
    let mut diffs = Vec::new();
    for implantation in Implantation::ALL {
        for _ in 0..profiles {
            let profile = random_profile(&mut rng);
            let (request, typed) = to_request(&profile, implantation);
            let got: BTreeSet<(String, String)> =
                bivmap::recommender::filter_candidates(kb, &request, &typed)
                    .iter()
                    .filter(|c| c.accepted())
                    .map(|c| {
                        (
                            c.pairing.thematic.name().to_string(),
                            c.pairing.uncertainty.name().to_string(),
                        )
                    })
                    .collect();
            let want = raw.accepted(implantation.name(), &profile);
            compared += 1;
            if got != want {
                diffs.push(format!(
                    "{implantation} {profile:?}: filter {got:?}, oracle {want:?}"
                ));
            }
        }
    }
    (compared, diffs)
}
