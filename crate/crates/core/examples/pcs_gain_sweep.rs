//! Shaping gain over uniform signaling across A/sigma, both with ZF
//! precoding, using the bundled 8-PAM preset.
//!
//! ```text
//! cargo run --release --example pcs_gain_sweep
//! ```

use std::path::Path;

use vlc_shaper::experiment::{load_config, run_point, Method};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = load_config(&Path::new(env!("CARGO_MANIFEST_DIR")).join("presets/paper_fig2.json"))?;
    let channel = cfg.room.channel()?;
    println!("{:>6}  {:>9}  {:>9}  {:>7}", "dB", "joint", "uniform", "gap");
    for &db in &cfg.noise.a_over_sigma_db {
        let joint = run_point(&cfg, &channel, Method::ZfAo, db, cfg.seed)?;
        let uniform = run_point(&cfg, &channel, Method::UniformBaselineZf, db, cfg.seed)?;
        println!(
            "{db:>6}  {:>9.4}  {:>9.4}  {:>7.4}",
            joint.sum_rate,
            uniform.sum_rate,
            joint.sum_rate - uniform.sum_rate
        );
    }
    Ok(())
}
