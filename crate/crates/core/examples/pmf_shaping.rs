//! Optimal 8-PAM input distribution of an interference-free link as the
//! effective SNR grows.
//!
//! ```text
//! cargo run --example pmf_shaping
//! ```

use vlc_shaper::constellation::{pmf_entropy, Constellation};
use vlc_shaper::zf_ao::{solve_pmf_row, PmfSolverConfig};
use vlc_shaper::GridPolicy;

fn main() -> vlc_shaper::Result<()> {
    let pam = Constellation::pam(8, 1.0)?;
    let start = vec![1.0 / 8.0; 8];
    for gain in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let sol = solve_pmf_row(gain, pam.amplitudes(), &start, 1.0, GridPolicy::default(), &PmfSolverConfig::default())?;
        let probs: Vec<String> = sol.p.iter().map(|p| format!("{p:.3}")).collect();
        println!(
            "A/sigma = {gain:>5}: rate {:.4} bits, H(p) {:.3}, p = [{}]",
            sol.rate,
            pmf_entropy(&sol.p)?,
            probs.join(" ")
        );
    }
    Ok(())
}
