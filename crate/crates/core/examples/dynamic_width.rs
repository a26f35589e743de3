//! Start from two hidden neurons and let the trainer adjust the width every
//! 250 iterations.
//!
//!     cargo run --release --example dynamic_width

use weldnet::block::BlockMetaParams;
use weldnet::dataset::synthesize_weld;
use weldnet::model::{train_all, FitConfig};

fn main() -> weldnet::Result<()> {
    let data = synthesize_weld(200, 0.02, 12)?;
    let meta = BlockMetaParams { neurons: 2, iterations: 4000, ..Default::default() };
    let fixed = FitConfig::default();
    let dynamic = FitConfig { dynamic_width: true, ..Default::default() };
    for seed in 0..5 {
        let (a, ta) = train_all(&[meta; 2], &data, seed, &fixed)?;
        let (b, tb) = train_all(&[meta; 2], &data, seed, &dynamic)?;
        for k in 0..2 {
            println!(
                "seed {seed} {:<12} fixed k={} cost {:.3e} | dynamic k={} cost {:.3e}",
                data.target_names[k],
                a.blocks[k].width(),
                ta[k].last_cost().unwrap(),
                b.blocks[k].width(),
                tb[k].last_cost().unwrap()
            );
        }
    }
    Ok(())
}
