//! Same architecture and iteration budget, five update rules, three seeds.
//!
//!     cargo run --release --example optimizer_comparison

use weldnet::block::BlockMetaParams;
use weldnet::dataset::synthesize_weld;
use weldnet::experiment::{compare, Method, MethodSettings};

fn main() -> weldnet::Result<()> {
    let data = synthesize_weld(200, 0.02, 9)?;
    let mut settings = MethodSettings {
        metas: vec![BlockMetaParams { neurons: 4, gamma: 2.0, ..Default::default() }],
        ..Default::default()
    };
    settings.alpha_overrides.insert(Method::Adagrad, 0.1);
    settings.alpha_overrides.insert(Method::Rmsprop, 0.01);
    settings.alpha_overrides.insert(Method::Nesterov, 0.05);

    let methods = [Method::Nrn, Method::Ann, Method::Adagrad, Method::Rmsprop, Method::Nesterov];
    let table = compare(&methods, &settings, &data, 0.2, &[1, 2, 3])?;
    print!("{}", table.to_text());
    Ok(())
}
