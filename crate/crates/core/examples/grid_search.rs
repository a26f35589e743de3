//! Cross-validated grid search for each target, printing the top of each
//! leaderboard.
//!
//!     cargo run --release --example grid_search

use weldnet::dataset::synthesize_weld;
use weldnet::model::FitConfig;
use weldnet::search::{search_all, SearchSpace};

fn main() -> weldnet::Result<()> {
    let data = synthesize_weld(200, 0.02, 5)?;
    let space = SearchSpace {
        neurons: vec![2, 4, 8],
        degree: vec![0, 1],
        gamma: vec![1.0, 2.0],
        ..Default::default()
    };
    println!("{} points per target", space.size());
    let results = search_all(&space, &data, 5, 1, &FitConfig::default(), None)?;
    for (name, (best, board)) in data.target_names.iter().zip(&results) {
        println!("\n{name}: best {best:?}");
        for row in board.rows.iter().take(5) {
            let m = row.meta;
            println!(
                "  #{:<3} neurons={:<2} degree={} alpha={} gamma={}  cv rmse {:.5} +- {:.5}",
                row.index, m.neurons, m.degree, m.alpha, m.gamma, row.mean_cv_rmse, row.std_cv_rmse
            );
        }
    }
    Ok(())
}
