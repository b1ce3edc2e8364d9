//! Penalty-method firefly search over general precoders and PMFs, 4-PAM at
//! 62 dB (power convention) with a small population.
//!
//! ```text
//! cargo run --release --example firefly_design
//! ```

use vlc_shaper::channel::{build_channel_matrix, reference_room, ChannelParams};
use vlc_shaper::firefly::{run_fa, FaConfig};
use vlc_shaper::{GridPolicy, NoiseModel, Problem};

fn main() -> vlc_shaper::Result<()> {
    let (leds, users) = reference_room();
    let h = build_channel_matrix(&leds, &users, &ChannelParams::reference())?;
    let problem = Problem::shared_pam(h, 4, 10f64.powf(6.2), NoiseModel::new(1.0)?, GridPolicy::with_points(8))?;

    let cfg = FaConfig { population: 20, generations: 20, seed: 3, ..FaConfig::default() };
    let out = run_fa(&cfg, &problem)?;
    for row in &out.trace.rows {
        println!(
            "generation {:>2}: fitness {:.4}, sum rate {:.4}, penalty {:.2e}",
            row.generation, row.best_fitness, row.best_sum_rate_bits, row.penalty
        );
    }
    println!("projected incumbent: {:.4} bits {:?}", out.sum_rate.total, out.sum_rate.per_user);
    println!("PMFs:\n{}", out.p.as_matrix());
    Ok(())
}
