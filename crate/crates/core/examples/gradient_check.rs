//! Compare the block's analytic gradients with central finite differences of
//! the data term of the cost.
//!
//!     cargo run --example gradient_check

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weldnet::block::{BlockMetaParams, RegressionBlock};

fn main() -> weldnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = Array2::from_shape_fn((8, 3), |_| rng.random_range(-1.0..1.0));
    let y = Array1::from_shape_fn(8, |_| rng.random_range(0.0..2.0));
    let m = y.len() as f64;
    let h = 1e-5;

    for depth in 1..=3 {
        let meta = BlockMetaParams { neurons: 4, depth, ..Default::default() };
        let block = RegressionBlock::new(meta, 3, depth as u64)?;
        let grads = block.gradients(&x, y.view(), 0.0, 1.0)?;
        let mut worst: f64 = 0.0;
        for (layer, g) in grads.layers.iter().enumerate() {
            for ((i, j), &analytic) in g.indexed_iter() {
                let mut plus = block.clone();
                let mut minus = block.clone();
                plus.weights_mut().nth(layer).unwrap()[[i, j]] += h;
                minus.weights_mut().nth(layer).unwrap()[[i, j]] -= h;
                let fd = (plus.cost(&x, y.view())? - minus.cost(&x, y.view())?) / (2.0 * h);
                let rel = (analytic + m * fd).abs() / analytic.abs().max(1e-7);
                worst = worst.max(rel);
            }
        }
        println!("depth {depth}: {} layers, max relative error {worst:.2e}", grads.layers.len());
    }
    Ok(())
}
