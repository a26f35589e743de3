//! Generate a synthetic weld dataset, train one block per target and score
//! the aggregate model on a held-out split.
//!
//!     cargo run --example synth_and_train

use weldnet::block::BlockMetaParams;
use weldnet::dataset::{split, synthesize_weld};
use weldnet::metrics::MetricsReport;
use weldnet::model::{train_all, FitConfig};

fn main() -> weldnet::Result<()> {
    let data = synthesize_weld(200, 0.02, 7)?;
    let (train, test) = split(&data, 0.2, 7)?;

    let metas = [
        BlockMetaParams { neurons: 4, gamma: 2.0, ..Default::default() },
        BlockMetaParams { neurons: 6, gamma: 1.5, iterations: 2000, ..Default::default() },
    ];
    let (model, traces) = train_all(&metas, &train, 7, &FitConfig::default())?;
    for (name, trace) in train.target_names.iter().zip(&traces) {
        println!("{name}: {} iterations, final cost {:.3e}", trace.len(), trace.last_cost().unwrap());
    }

    let pred = model.predict(&test.features)?;
    let report = MetricsReport::from_predictions(&test.target_names, &test.targets, &pred)?;
    print!("\n{}", report.to_text());
    Ok(())
}
