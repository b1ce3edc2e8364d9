//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::StandardNormal;
use vlc_shaper::constellation::{Constellation, PmfMatrix};

pub mod invariants;

/// Every symbol tuple of the selected users as (mean, weight), by odometer.
pub fn enumerate_tuples(gains: &[f64], amps: &[Vec<f64>], pmf: &[Vec<f64>], users: &[usize]) -> Vec<(f64, f64)> {
    let mut idx = vec![0usize; users.len()];
    let mut out = Vec::new();
    loop {
        let mut mean = 0.0;
        let mut weight = 1.0;
        for (slot, &u) in users.iter().enumerate() {
            mean += gains[u] * amps[u][idx[slot]];
            weight *= pmf[u][idx[slot]];
        }
        out.push((mean, weight));
        let mut pos = 0;
        loop {
            if pos == users.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < amps[users[pos]].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

pub fn mixture_pdf(y: f64, comps: &[(f64, f64)], sigma: f64) -> f64 {
    let norm = 1.0 / ((2.0 * PI).sqrt() * sigma);
    comps.iter().map(|(m, w)| w * norm * (-(y - m).powi(2) / (2.0 * sigma * sigma)).exp()).sum()
}

/// Monte Carlo estimate of I(x_k; y_k) in bits, where
/// `y_k = sum_i gains[i] a_i + n` and the other users act as noise.
pub fn mc_rate(
    gains: &[f64],
    amps: &[Vec<f64>],
    pmf: &[Vec<f64>],
    sigma: f64,
    k: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> f64 {
    let all: Vec<usize> = (0..gains.len()).collect();
    let others: Vec<usize> = all.iter().copied().filter(|&i| i != k).collect();
    let sig = enumerate_tuples(gains, amps, pmf, &all);
    let int = enumerate_tuples(gains, amps, pmf, &others);
    let pickers: Vec<WeightedIndex<f64>> = pmf.iter().map(|r| WeightedIndex::new(r).unwrap()).collect();
    let mut acc = 0.0;
    for _ in 0..samples {
        let mut y = 0.0;
        let mut own = 0.0;
        for (i, pick) in pickers.iter().enumerate() {
            let s = gains[i] * amps[i][pick.sample(rng)];
            y += s;
            if i == k {
                own = s;
            }
        }
        let z: f64 = rng.sample(StandardNormal);
        y += sigma * z;
        acc += (mixture_pdf(y - own, &int, sigma) / mixture_pdf(y, &sig, sigma)).log2();
    }
    acc / samples as f64
}

/// All points of the probability simplex in `m` coordinates on a lattice
/// with `steps` subdivisions.
pub fn simplex_lattice(m: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(m: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == m - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(m, left - c, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, steps, steps, &mut Vec::new(), &mut out);
    out
}

pub fn random_simplex(m: usize, rng: &mut impl Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..m).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-3).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &t in &idx[i..=j] {
                r[t] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&rx), mean(&ry));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Random small general-mode instance for user `k`.
pub struct Instance {
    pub h_k: Vec<f64>,
    pub w: DMatrix<f64>,
    pub constellations: Vec<Constellation>,
    pub pmf: PmfMatrix,
    pub k: usize,
}

impl Instance {
    pub fn random(rng: &mut impl Rng) -> Self {
        let users = rng.gen_range(1..=2);
        let leds = rng.gen_range(users..=4);
        let m = rng.gen_range(2..=4);
        let peak = rng.gen_range(0.5..4.0);
        let h_k: Vec<f64> = (0..leds).map(|_| rng.gen_range(0.1..1.0)).collect();
        let bound = 1.0 / users as f64;
        let w = DMatrix::from_fn(leds, users, |_, _| rng.gen_range(-bound..bound));
        let rows: Vec<Vec<f64>> = (0..users).map(|_| random_simplex(m, rng)).collect();
        Self {
            h_k,
            w,
            constellations: vec![Constellation::pam(m, peak).unwrap(); users],
            pmf: PmfMatrix::from_rows(&rows).unwrap(),
            k: rng.gen_range(0..users),
        }
    }

    pub fn gains(&self) -> Vec<f64> {
        (0..self.w.ncols()).map(|i| self.w.column(i).iter().zip(&self.h_k).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn amps(&self) -> Vec<Vec<f64>> {
        self.constellations.iter().map(|c| c.amplitudes().to_vec()).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.pmf.users()).map(|k| self.pmf.row(k)).collect()
    }
}

