//! Write a trained model to JSON, read it back and check predictions agree.
//!
//!     cargo run --example save_load

use weldnet::block::BlockMetaParams;
use weldnet::dataset::synthesize_weld;
use weldnet::model::{load, save, train_all, FitConfig, SavedModel};

fn main() -> weldnet::Result<()> {
    let data = synthesize_weld(100, 0.02, 1)?;
    let meta = BlockMetaParams { neurons: 3, depth: 2, ..Default::default() };
    let (model, _) = train_all(&[meta; 2], &data, 1, &FitConfig::default())?;
    let saved = SavedModel::Network(model);

    let path = std::env::temp_dir().join("weldnet_example_model.json");
    save(&saved, &path)?;
    let back = load(&path)?;
    let same = back.predict(&data.features)? == saved.predict(&data.features)?;
    println!("wrote {}; identical predictions after reload: {same}", path.display());
    Ok(())
}
