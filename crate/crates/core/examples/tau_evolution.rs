//! Print the per-iteration weighted estimate, mean error and gradient norms
//! of one block as CSV, ready for plotting.
//!
//!     cargo run --example tau_evolution > tau.csv

use weldnet::block::{BlockMetaParams, RegressionBlock, TrainOptions};
use weldnet::dataset::{standardize, synthesize_weld};

fn main() -> weldnet::Result<()> {
    let (data, _) = standardize(&synthesize_weld(150, 0.02, 3)?)?;
    let meta = BlockMetaParams { neurons: 4, gamma: 1.5, ..Default::default() };
    let mut block = RegressionBlock::new(meta, data.n_features(), 11)?;
    let trace = block.train(&data.features, data.targets.column(1), &TrainOptions::default())?;

    print!("{}", trace.to_csv_string());
    let chosen = trace.records.iter().filter(|r| r.tau != 0.0).count();
    eprintln!("nonzero tau on {chosen} of {} iterations, final tau {:.4e}", trace.len(), block.tau);
    Ok(())
}
