//! Property checks over seeded random instances, shared by the proptest
//! suite and the acceptance runner.

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{random_simplex, Instance};
use vlc_shaper::channel::ChannelMatrix;
use vlc_shaper::constellation::{pmf_entropy, Constellation};
use vlc_shaper::precoder::max_row_l1;
use vlc_shaper::rate::{mixture_interference, mixture_signal, penalty, rate_general, rate_zf, zf_rate_and_gradient};
use vlc_shaper::zf_ao::{ccp_linearize, run_ao, zf_basis, zf_residual, AoConfig};
use vlc_shaper::{GridPolicy, NoiseModel, PenaltyWeights, PrecodingMatrix, Problem};

pub type Check = Result<(), TestCaseError>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_channel(rng: &mut ChaCha8Rng) -> ChannelMatrix {
    let k = rng.gen_range(1..=3);
    let n = rng.gen_range(k..=6);
    let scale = if rng.gen_bool(0.5) { 1.0 } else { 1e-6 };
    ChannelMatrix::new(DMatrix::from_fn(k, n, |_, _| scale * rng.gen_range(0.05..1.0))).unwrap()
}

pub fn mixture_weights_sum_to_one(seed: u64) -> Check {
    let inst = Instance::random(&mut rng(seed));
    let sig = mixture_signal(&inst.h_k, &inst.w, &inst.constellations, &inst.pmf, 1.0).unwrap();
    let int = mixture_interference(&inst.h_k, &inst.w, &inst.constellations, &inst.pmf, 1.0, inst.k).unwrap();
    for mix in [sig, int] {
        let s: f64 = mix.weights().iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12, "weights sum to {}", s);
    }
    Ok(())
}

pub fn zf_precoders_null_interference(seed: u64) -> Check {
    let mut r = rng(seed);
    let h = random_channel(&mut r);
    let basis = zf_basis(&h).unwrap();
    let raw: Vec<f64> = (0..h.users()).map(|_| r.gen_range(0.0..2.0)).collect();
    let g = basis.project(&raw);
    prop_assert!(basis.is_feasible(&g, 1e-9));
    let w = basis.precoder(&g).unwrap();
    let res = zf_residual(&h, w.as_matrix());
    prop_assert!(res <= 1e-9, "relative leakage {}", res);
    prop_assert!(basis.gains().iter().all(|&c| c > 0.0));
    Ok(())
}

pub fn designs_respect_row_budget(seed: u64) -> Check {
    let mut r = rng(seed);
    let raw = DMatrix::from_fn(r.gen_range(1..=5), r.gen_range(1..=3), |_, _| r.gen_range(-2.0..2.0));
    let w = PrecodingMatrix::project(raw).unwrap();
    prop_assert!(max_row_l1(w.as_matrix()) <= 1.0 + 1e-9);

    let h = random_channel(&mut r);
    let peak = r.gen_range(0.5..3.0) / h.as_matrix().max();
    let pr = Problem::shared_pam(h, 2, peak, NoiseModel::new(1.0).unwrap(), GridPolicy::with_points(8)).unwrap();
    let out = run_ao(&pr, &AoConfig { outer_iters: 3, ..AoConfig::default() }).unwrap();
    prop_assert!(max_row_l1(out.w.as_matrix()) <= 1.0 + 1e-9);
    for row in &out.trace.rows {
        prop_assert!(row.max_row_l1 <= 1.0 + 1e-9);
        prop_assert!(row.zf_residual <= 1e-9);
    }
    Ok(())
}

fn entry() -> impl Strategy<Value = f64> {
    prop_oneof![0.0..=1.0, -0.5..1.5, Just(0.0), Just(1.0)]
}

/// Raw `(P, W)` pairs of random shape, mostly near the feasible set.
pub fn raw_pair() -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (1usize..=3, 2usize..=4, 1usize..=4).prop_flat_map(|(k, m, n)| {
        (
            prop::collection::vec(entry(), k * m).prop_map(move |v| DMatrix::from_vec(k, m, v).scale(1.0 / m as f64)),
            prop::collection::vec(entry(), n * k).prop_map(move |v| DMatrix::from_vec(n, k, v).scale(1.0 / k as f64)),
        )
    })
}

pub fn penalty_vanishes_exactly_on_feasible_set(p: &DMatrix<f64>, w: &DMatrix<f64>) -> Check {
    let feasible = (0..w.nrows()).all(|n| w.row(n).iter().map(|x| x.abs()).sum::<f64>() <= 1.0)
        && p.iter().all(|&x| (0.0..=1.0).contains(&x))
        && (0..p.nrows()).all(|k| p.row(k).sum() <= 1.0);
    let v = penalty(p, w, &PenaltyWeights::default());
    prop_assert!(v >= 0.0);
    prop_assert_eq!(v == 0.0, feasible, "penalty {} for feasible={}", v, feasible);
    Ok(())
}

pub fn rates_within_entropy_bounds(seed: u64) -> Check {
    let mut r = rng(seed);
    let inst = Instance::random(&mut r);
    let noise = NoiseModel::new(1.0).unwrap();
    let rate = rate_general(&inst.h_k, &inst.w, &inst.constellations, &inst.pmf, noise, GridPolicy::default(), inst.k)
        .unwrap();
    let h = pmf_entropy(&inst.pmf.row(inst.k)).unwrap();
    prop_assert!(rate >= 0.0 && rate <= h + 1e-9, "rate {} entropy {}", rate, h);

    let m = r.gen_range(2..=8);
    let c = Constellation::pam(m, 1.0).unwrap();
    let p = random_simplex(m, &mut r);
    let z = rate_zf(r.gen_range(0.0..20.0), &c, &p, noise, GridPolicy::default()).unwrap();
    let hz = pmf_entropy(&p).unwrap();
    prop_assert!(z >= 0.0 && z <= hz, "zf rate {} entropy {}", z, hz);
    Ok(())
}

pub fn gradient_matches_finite_differences(seed: u64) -> Check {
    let mut r = rng(seed);
    let m = r.gen_range(2..=8);
    let amps = Constellation::pam(m, 1.0).unwrap().amplitudes().to_vec();
    let gain = r.gen_range(0.3..6.0);
    let p = random_simplex(m, &mut r);
    let policy = GridPolicy::default();
    let (_, grad) = zf_rate_and_gradient(gain, &amps, &p, 1.0, policy).unwrap();
    let h = 1e-6;
    for j in 0..m {
        let mut up = p.clone();
        let mut dn = p.clone();
        up[j] += h;
        dn[j] -= h;
        let fd = (zf_rate_and_gradient(gain, &amps, &up, 1.0, policy).unwrap().0
            - zf_rate_and_gradient(gain, &amps, &dn, 1.0, policy).unwrap().0)
            / (2.0 * h);
        let rel = (grad[j] - fd).abs() / grad[j].abs().max(1e-3);
        prop_assert!(rel < 1e-4, "component {}: analytic {} fd {}", j, grad[j], fd);
    }
    Ok(())
}

pub fn linearization_error_is_second_order(seed: u64) -> Check {
    let mut r = rng(seed);
    let n = r.gen_range(1..=4);
    let w0: Vec<f64> = (0..n).map(|_| r.gen_range(-0.5..0.5)).collect();
    let h: Vec<f64> = (0..n).map(|_| r.gen_range(0.1..1.0)).collect();
    let dir: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let (a, y, sigma) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), r.gen_range(0.5..1.5));
    let lin = ccp_linearize(&w0, &h, a, y, sigma);
    let exact = |w: &[f64]| {
        let z = y - h.iter().zip(w).map(|(p, q)| p * q).sum::<f64>() * a;
        (-z * z / (2.0 * sigma * sigma)).exp()
    };
    let err = |d: f64| {
        let w: Vec<f64> = w0.iter().zip(&dir).map(|(x, v)| x + d * v).collect();
        (lin.eval(&w) - exact(&w)).abs()
    };
    prop_assert!((lin.eval(&w0) - exact(&w0)).abs() < 1e-15);
    let (e1, e2) = (err(1e-3), err(5e-4));
    // a vanishing second derivative leaves only rounding noise
    if e1 > 1e-13 {
        let ratio = e1 / e2;
        prop_assert!((ratio - 4.0).abs() < 0.1, "halving the step scaled the error by {}", ratio);
    }
    Ok(())
}

pub fn zf_rate_is_concave_in_pmf(seed: u64) -> Check {
    let mut r = rng(seed);
    let m = r.gen_range(2..=8);
    let c = Constellation::pam(m, 1.0).unwrap();
    let gain = r.gen_range(0.1..8.0);
    let (a, b) = (random_simplex(m, &mut r), random_simplex(m, &mut r));
    let theta: f64 = r.gen_range(0.01..0.99);
    let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| theta * x + (1.0 - theta) * y).collect();
    let noise = NoiseModel::new(1.0).unwrap();
    let f = |p: &[f64]| rate_zf(gain, &c, p, noise, GridPolicy::default()).unwrap();
    let (fm, fa, fb) = (f(&mid), f(&a), f(&b));
    prop_assert!(fm >= theta * fa + (1.0 - theta) * fb - 1e-6, "{} < chord {}", fm, theta * fa + (1.0 - theta) * fb);
    Ok(())
}
