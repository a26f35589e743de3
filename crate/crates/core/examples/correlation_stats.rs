//! Correlation between the two targets and the least-squares line relating
//! them.
//!
//!     cargo run --example correlation_stats

use weldnet::dataset::synthesize_weld;
use weldnet::metrics::{linear_fit, CorrelationRow, MetricsReport};

fn main() -> weldnet::Result<()> {
    let data = synthesize_weld(300, 0.05, 2)?;
    let p = data.target(0).to_vec();
    let w = data.target(1).to_vec();

    let report = MetricsReport {
        correlations: vec![CorrelationRow::compute("penetration", "width", &p, &w)?],
        ..Default::default()
    };
    print!("{}", report.to_text());
    let (slope, intercept) = linear_fit(&p, &w)?;
    println!("\nwidth = {slope:.4} * penetration + {intercept:.4}");
    Ok(())
}
