//! Runs a JSON experiment config end to end and prints the PMF report of
//! its first point.
//!
//! ```text
//! cargo run --release --example sweep_to_csv -- crates/core/presets/paper_fig3.json out/fig3
//! ```

use std::path::PathBuf;

use vlc_shaper::experiment::{load_config, pmf_report, run_sweep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("presets/paper_fig3.json")
    });
    let cfg = load_config(&config)?;
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| cfg.output_dir.clone());

    let result = run_sweep(&cfg, &out)?;
    for p in &result.points {
        println!("{} dB: {:.4} bits in {} ms", p.a_over_sigma_db, p.sum_rate, p.wall_ms);
    }
    print!("{}", pmf_report(&result, cfg.noise.a_over_sigma_db[0])?);
    println!("CSV files written to {}", out.display());
    Ok(())
}
