//! Classify the case-study attributes with threshold, quantile and continuous schemes.
//!
//!     cargo run -p bivmap-core --example binning

use bivmap::casestudy;
use bivmap::data_model::{bin_quantile, bin_threshold, BinningScheme, Classes};

fn main() {
    // edge values fall into the upper class
    println!(
        "{:?}",
        bin_threshold(&[836.0, 837.0, 2204.0], &[837.0, 2204.0]).unwrap()
    );
    // ties stay in the lower class
    println!(
        "{:?}",
        bin_quantile(&[1.0, 1.0, 1.0, 2.0, 3.0, 4.0], 3).unwrap()
    );

    let dataset = casestudy::fixture();
    for (attribute, scheme) in [
        (
            "TSS_mean",
            BinningScheme::Threshold {
                edges: vec![837.0, 2204.0],
            },
        ),
        ("CV", BinningScheme::Quantile { k: 3 }),
        ("CV", BinningScheme::Continuous),
    ] {
        let binned = dataset.classify(attribute, &scheme).unwrap();
        match &binned.classes {
            Classes::Discrete {
                n_bins,
                breaks,
                indices,
            } => {
                let counts: Vec<usize> = (0..*n_bins)
                    .map(|b| indices.iter().filter(|&&i| i == b).count())
                    .collect();
                println!(
                    "{attribute} {}: breaks {breaks:?}, counts {counts:?}",
                    scheme.label()
                );
            }
            Classes::Continuous { min, max, .. } => {
                println!("{attribute} {}: range {min:.3} .. {max:.3}", scheme.label());
            }
        }
    }
}
