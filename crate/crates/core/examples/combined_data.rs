//! Train one model on the union of three process regimes and score it on
//! each regime's own test split.
//!
//!     cargo run --release --example combined_data

use weldnet::block::BlockMetaParams;
use weldnet::dataset::{synthesize_weld_in, WeldRanges};
use weldnet::experiment::{combined_study, Method, MethodSettings};

fn main() -> weldnet::Result<()> {
    let regimes = [
        ("thin", WeldRanges { voltage: (18.0, 26.0), current: (80.0, 160.0), speed: (2.0, 5.0) }),
        ("medium", WeldRanges::default()),
        ("heavy", WeldRanges { voltage: (30.0, 45.0), current: (220.0, 340.0), speed: (6.0, 12.0) }),
    ];
    let sets = regimes
        .iter()
        .enumerate()
        .map(|(i, (name, r))| Ok((name.to_string(), synthesize_weld_in(120, 0.02, 30 + i as u64, r)?)))
        .collect::<weldnet::Result<Vec<_>>>()?;
    let settings = MethodSettings {
        metas: vec![BlockMetaParams { neurons: 6, gamma: 1.5, iterations: 2000, ..Default::default() }],
        ..Default::default()
    };
    let study = combined_study(Method::Nrn, &settings, &sets, 0.2, &[1, 2, 3, 4, 5])?;
    print!("{}", study.to_text());
    Ok(())
}
