//! Regenerates the synthetic sub-catchment fixture bundled with the library.
//!
//! ```text
//! cargo run -p bivmap-core --example generate_fixture -- crates/core/data/case_study_fixture.geojson
//! ```
//!
//! The fixture is an 8 x 5 grid of jittered quadrilaterals that tile without
//! gaps. Mean suspended sediment follows a smooth gradient plus noise so that
//! values straddle the 837 and 2204 mg/L thresholds; the standard deviation is
//! drawn so the coefficient of variation lies between 0.1 and 0.9.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const COLS: usize = 8;
const ROWS: usize = 5;
const CELL: f64 = 0.2;
const ORIGIN: [f64; 2] = [145.4, -20.6];

fn round(x: f64, places: i32) -> f64 {
    let f = 10f64.powi(places);
    (x * f).round() / f
}

fn main() {
    let out = std::env::args().nth(1);
    let mut rng = ChaCha8Rng::seed_from_u64(1996);

    // shared vertex lattice; interior vertices are jittered
    let mut lattice = vec![[0.0; 2]; (COLS + 1) * (ROWS + 1)];
    for j in 0..=ROWS {
        for i in 0..=COLS {
            let interior_x = i > 0 && i < COLS;
            let interior_y = j > 0 && j < ROWS;
            let dx = if interior_x {
                rng.random_range(-0.25..0.25)
            } else {
                0.0
            };
            let dy = if interior_y {
                rng.random_range(-0.25..0.25)
            } else {
                0.0
            };
            lattice[j * (COLS + 1) + i] = [
                round(ORIGIN[0] + (i as f64 + dx) * CELL, 6),
                round(ORIGIN[1] + (j as f64 + dy) * CELL, 6),
            ];
        }
    }
    let vertex = |i: usize, j: usize| lattice[j * (COLS + 1) + i];

    let mut features = Vec::new();
    for j in 0..ROWS {
        for i in 0..COLS {
            let n = j * COLS + i + 1;
            let ring = vec![
                vertex(i, j),
                vertex(i + 1, j),
                vertex(i + 1, j + 1),
                vertex(i, j + 1),
                vertex(i, j),
            ];
            // gradient from the south-west (low) to the north-east (high)
            let trend = (i as f64 / (COLS - 1) as f64 + j as f64 / (ROWS - 1) as f64) / 2.0;
            let log_mean = 5.9 + 2.4 * trend + rng.random_range(-0.45..0.45);
            let mean = round(log_mean.exp(), 1);
            let cv: f64 = rng.random_range(0.1..0.9);
            let sd = round(mean * cv, 1);
            features.push(json!({
                "type": "Feature",
                "id": format!("SC{n:02}"),
                "properties": {
                    "subcatchment": format!("SC{n:02}"),
                    "TSS_mean": mean,
                    "TSS_sd": sd,
                    "label": format!("Sub-catchment {n}"),
                },
                "geometry": {"type": "Polygon", "coordinates": [ring]},
            }));
        }
    }
    let doc = json!({"type": "FeatureCollection", "features": features});
    let text = serde_json::to_string_pretty(&doc).expect("fixture serializes") + "\n";
    match out {
        Some(path) => std::fs::write(&path, text).expect("write fixture"),
        None => print!("{text}"),
    }
}
