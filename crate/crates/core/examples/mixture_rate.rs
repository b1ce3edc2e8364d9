//! Achievable rate of one user under multi-user interference, from the
//! entropies of the received Gaussian mixtures.
//!
//! ```text
//! cargo run --example mixture_rate
//! ```

use nalgebra::DMatrix;
use vlc_shaper::constellation::{uniform_pmf, Constellation};
use vlc_shaper::rate::{differential_entropy, mixture_interference, mixture_signal, rate_general};
use vlc_shaper::{GridPolicy, NoiseModel};

fn main() -> vlc_shaper::Result<()> {
    let h_1 = [1.0, 0.3];
    let w = DMatrix::from_row_slice(2, 2, &[0.8, -0.2, 0.1, 0.7]);
    let pam = vec![Constellation::pam(4, 3.0)?; 2];
    let p = uniform_pmf(2, 4)?;
    let policy = GridPolicy::default();

    let sig = mixture_signal(&h_1, &w, &pam, &p, 1.0)?;
    let int = mixture_interference(&h_1, &w, &pam, &p, 1.0, 0)?;
    let h_y = differential_entropy(&sig, &policy.grid_for(&sig)?)?;
    let h_i = differential_entropy(&int, &policy.grid_for(&int)?)?;
    println!("{} signal components, {} interference components", sig.len(), int.len());
    println!("h(y) = {h_y:.4} bits, h(interference + noise) = {h_i:.4} bits");

    let r = rate_general(&h_1, &w, &pam, &p, NoiseModel::new(1.0)?, policy, 0)?;
    println!("rate of user 1: {r:.4} bits/channel use");
    Ok(())
}
