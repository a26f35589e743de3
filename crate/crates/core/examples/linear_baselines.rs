//! Closed-form least squares and gradient-descent polynomial regression on
//! the same expanded features.
//!
//!     cargo run --example linear_baselines

use weldnet::baselines::{mcr_fit, normal_equation_fit, McrParams};
use weldnet::dataset::{split, standardize, synthesize_weld};
use weldnet::metrics::rmse;

fn main() -> weldnet::Result<()> {
    let data = synthesize_weld(200, 0.02, 4)?;
    let (train, test) = split(&data, 0.2, 4)?;
    let (train_s, scaler) = standardize(&train)?;
    let test_x = scaler.apply(&test.features)?;

    for degree in 0..=2 {
        let ner = normal_equation_fit(&train_s, degree)?;
        let params = McrParams { alpha: 0.1, degree, iterations: 12000, ..Default::default() };
        let mcr = mcr_fit(&params, &train_s, 1)?;
        let gap = (&ner.theta - &mcr.theta).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let p_ner = ner.predict(&test_x)?;
        let p_mcr = mcr.predict(&test_x)?;
        print!("degree {degree}: max |theta_ner - theta_mcr| = {gap:.2e}");
        for (k, name) in test.target_names.iter().enumerate() {
            let y = test.targets.column(k).to_vec();
            let a = rmse(&y, &p_ner.column(k).to_vec())?;
            let b = rmse(&y, &p_mcr.column(k).to_vec())?;
            print!("  {name}: ner {a:.4} mcr {b:.4}");
        }
        println!();
    }
    Ok(())
}
