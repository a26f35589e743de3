//! Train at 1 to 4 hidden layers over ten seeds and compare the 95% RMSE
//! intervals between depths.
//!
//!     cargo run --release --example depth_study

use weldnet::block::BlockMetaParams;
use weldnet::dataset::synthesize_weld;
use weldnet::experiment::{depth_study, MethodSettings};

fn main() -> weldnet::Result<()> {
    let data = synthesize_weld(150, 0.02, 8)?;
    let settings = MethodSettings {
        metas: vec![BlockMetaParams { neurons: 4, ..Default::default() }],
        ..Default::default()
    };
    let seeds: Vec<u64> = (1..=10).collect();
    let study = depth_study(&settings, &data, &[1, 2, 3, 4], 0.2, &seeds)?;
    print!("{}", study.to_text());
    Ok(())
}
