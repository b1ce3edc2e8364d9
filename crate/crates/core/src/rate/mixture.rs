//! Scalar Gaussian mixtures with a common component variance and their
//! differential entropy by fixed-step Riemann summation.

use std::f64::consts::{LN_2, PI};

use crate::error::{invalid, Error, Result};

/// Densities below this are skipped in the entropy sum.
const DENSITY_FLOOR: f64 = 1e-300;
/// Components farther than this many sigma from a grid point are ignored
/// when evaluating the density there (`exp(-72)` relative contribution).
const WINDOW_SIGMAS: f64 = 12.0;
/// Required coverage of the grid around every component mean.
const COVERAGE_SIGMAS: f64 = 6.0;

/// `sum_j w_j N(y; mu_j, sigma^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    means: Vec<f64>,
    weights: Vec<f64>,
    sigma: f64,
}

impl GaussianMixture {
    pub fn new(means: Vec<f64>, weights: Vec<f64>, sigma: f64) -> Result<Self> {
        if means.len() != weights.len() || means.is_empty() {
            return Err(Error::Dimension(format!(
                "{} means vs {} weights",
                means.len(),
                weights.len()
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid("sigma", format!("must be > 0, got {sigma}")));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(invalid("means", "must be finite"));
        }
        crate::constellation::check_pmf(weights.iter().copied())?;
        Ok(Self { means, weights, sigma })
    }

    /// Built by trusted callers whose weights are products of PMF rows.
    pub(crate) fn from_parts(means: Vec<f64>, weights: Vec<f64>, sigma: f64) -> Self {
        debug_assert_eq!(means.len(), weights.len());
        Self { means, weights, sigma }
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    fn mean_range(&self) -> (f64, f64) {
        self.means
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| (lo.min(m), hi.max(m)))
    }

    /// Density at a single point.
    pub fn density(&self, y: f64) -> f64 {
        let norm = 1.0 / ((2.0 * PI).sqrt() * self.sigma);
        let inv2s2 = 0.5 / (self.sigma * self.sigma);
        norm * self
            .means
            .iter()
            .zip(&self.weights)
            .map(|(m, w)| w * (-(y - m) * (y - m) * inv2s2).exp())
            .sum::<f64>()
    }

    /// Densities on every point of `grid`, evaluated with a sliding window
    /// over the sorted component means.
    pub fn densities_on(&self, grid: &QuadratureGrid) -> Vec<f64> {
        let mut comps: Vec<(f64, f64)> = self
            .means
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&m, &w)| (m, w))
            .collect();
        comps.sort_by(|a, b| a.0.total_cmp(&b.0));

        let norm = 1.0 / ((2.0 * PI).sqrt() * self.sigma);
        let inv2s2 = 0.5 / (self.sigma * self.sigma);
        let reach = WINDOW_SIGMAS * self.sigma;
        let (mut start, mut end) = (0usize, 0usize);
        let mut out = Vec::with_capacity(grid.n_points());
        for y in grid.points() {
            while start < comps.len() && comps[start].0 < y - reach {
                start += 1;
            }
            if end < start {
                end = start;
            }
            while end < comps.len() && comps[end].0 <= y + reach {
                end += 1;
            }
            let s: f64 = comps[start..end]
                .iter()
                .map(|&(m, w)| w * (-(y - m) * (y - m) * inv2s2).exp())
                .sum();
            out.push(norm * s);
        }
        out
    }
}

/// Uniform partition of `[lo, hi]` into `n_points` cells of width `delta`;
/// the density is sampled at cell midpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    lo: f64,
    hi: f64,
    n_points: usize,
    delta: f64,
}

impl QuadratureGrid {
    pub fn new(lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("grid", format!("need lo < hi, got [{lo}, {hi}]")));
        }
        if n_points < 2 {
            return Err(invalid("grid", "need at least 2 points"));
        }
        Ok(Self { lo, hi, n_points, delta: (hi - lo) / n_points as f64 })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.lo + (i as f64 + 0.5) * self.delta)
    }
}

/// How grids are derived from mixtures: step `sigma / points_per_sigma` and
/// `tail_sigmas` of margin beyond the extreme means.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPolicy {
    pub points_per_sigma: usize,
    #[serde(default = "default_tail")]
    pub tail_sigmas: f64,
}

fn default_tail() -> f64 {
    8.0
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self { points_per_sigma: 16, tail_sigmas: 8.0 }
    }
}

impl GridPolicy {
    pub fn with_points(points_per_sigma: usize) -> Self {
        Self { points_per_sigma, ..Self::default() }
    }

    /// Grid spanning `[lo_mean - tail, hi_mean + tail]`.
    pub fn grid_for_range(&self, lo_mean: f64, hi_mean: f64, sigma: f64) -> Result<QuadratureGrid> {
        if self.points_per_sigma < 4 {
            return Err(invalid("points_per_sigma", "must be >= 4"));
        }
        let lo = lo_mean - self.tail_sigmas * sigma;
        let hi = hi_mean + self.tail_sigmas * sigma;
        let delta = sigma / self.points_per_sigma as f64;
        // the small slack keeps exact multiples from rounding up a cell
        let n = (((hi - lo) / delta) - 1e-9).ceil().max(2.0) as usize;
        QuadratureGrid::new(lo, lo + n as f64 * delta, n)
    }

    pub fn grid_for(&self, mix: &GaussianMixture) -> Result<QuadratureGrid> {
        let (lo, hi) = mix.mean_range();
        self.grid_for_range(lo, hi, mix.sigma)
    }
}

/// Grid from the extreme means with 8 sigma margins.
pub fn auto_grid(mix: &GaussianMixture, points_per_sigma: usize) -> Result<QuadratureGrid> {
    GridPolicy::with_points(points_per_sigma).grid_for(mix)
}

/// `-sum f log2 f * delta` over the grid, in bits.
pub fn differential_entropy(mix: &GaussianMixture, grid: &QuadratureGrid) -> Result<f64> {
    let margin = COVERAGE_SIGMAS * mix.sigma;
    for &m in &mix.means {
        if m - margin < grid.lo || m + margin > grid.hi {
            return Err(Error::GridCoverage { lo: grid.lo, hi: grid.hi, mean: m });
        }
    }
    Ok(entropy_of_densities(&mix.densities_on(grid), grid.delta))
}

pub(crate) fn entropy_of_densities(f: &[f64], delta: f64) -> f64 {
    let s: f64 = f.iter().filter(|&&v| v >= DENSITY_FLOOR).map(|&v| v * v.ln()).sum();
    -s * delta / LN_2
}

/// `0.5 log2(2 pi e sigma^2)`.
pub fn gaussian_entropy_bits(sigma: f64) -> f64 {
    0.5 * (2.0 * PI * std::f64::consts::E * sigma * sigma).log2()
}
