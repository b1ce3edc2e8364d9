//! Joint PMF and zero-forcing precoder design by alternating optimization
//! in the reference room, 8-PAM at 60 dB (power convention).
//!
//! ```text
//! cargo run --release --example zf_ao_design
//! ```

use vlc_shaper::channel::{build_channel_matrix, reference_room, ChannelParams};
use vlc_shaper::zf_ao::{run_ao, AoConfig};
use vlc_shaper::{GridPolicy, NoiseModel, Problem};

fn main() -> vlc_shaper::Result<()> {
    let (leds, users) = reference_room();
    let h = build_channel_matrix(&leds, &users, &ChannelParams::reference())?;
    let problem = Problem::shared_pam(h, 8, 1e6, NoiseModel::new(1.0)?, GridPolicy::default())?;

    let joint = run_ao(&problem, &AoConfig::default())?;
    let uniform = run_ao(&problem, &AoConfig { optimize_pmf: false, ..AoConfig::default() })?;

    for row in &joint.trace.rows {
        println!(
            "outer {:>2} step {:>2}: {:.5} bits (max row L1 {:.3})",
            row.outer_iter, row.inner_iter, row.sum_rate_bits, row.max_row_l1
        );
    }
    println!("joint design: {:.4} bits, uniform signaling: {:.4} bits", joint.sum_rate.total, uniform.sum_rate.total);
    for k in 0..joint.p.users() {
        let probs: Vec<String> = joint.p.row(k).iter().map(|p| format!("{p:.3}")).collect();
        println!("user {} PMF: [{}]", k + 1, probs.join(" "));
    }
    println!("precoder:\n{}", joint.w.as_matrix());
    Ok(())
}
