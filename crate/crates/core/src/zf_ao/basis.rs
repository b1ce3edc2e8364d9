use nalgebra::DMatrix;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::precoder::PrecodingMatrix;

/// Singular values below this fraction of the largest mark the channel as
/// rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Scaled right pseudo-inverse of the channel. Column k is orthogonal to
/// every other user's channel; any `B diag(g)` with `g >= 0` and
/// `sum_k g_k |B_nk| <= 1` for every LED row n is a feasible ZF precoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ZfBasis {
    basis: DMatrix<f64>,
    gains: Vec<f64>,
}

impl ZfBasis {
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `c_k = h_k^T b_k`.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn users(&self) -> usize {
        self.basis.ncols()
    }

    pub fn precoder(&self, g: &[f64]) -> Result<PrecodingMatrix> {
        if g.len() != self.users() {
            return Err(Error::Dimension(format!("{} gains for {} users", g.len(), self.users())));
        }
        let mut w = self.basis.clone();
        for (k, gk) in g.iter().enumerate() {
            w.column_mut(k).scale_mut(*gk);
        }
        PrecodingMatrix::new(w)
    }

    /// Row-L1 loads `sum_k g_k |B_nk|` per LED.
    pub fn loads(&self, g: &[f64]) -> Vec<f64> {
        (0..self.basis.nrows())
            .map(|n| (0..self.users()).map(|k| g[k] * self.basis[(n, k)].abs()).sum())
            .collect()
    }

    pub fn is_feasible(&self, g: &[f64], tol: f64) -> bool {
        g.iter().all(|&x| x >= -tol) && self.loads(g).iter().all(|&l| l <= 1.0 + tol)
    }

    /// Largest gain user k could take alone.
    pub fn max_gain(&self, k: usize) -> f64 {
        (0..self.basis.nrows())
            .map(|n| self.basis[(n, k)].abs())
            .filter(|&a| a > 0.0)
            .map(|a| 1.0 / a)
            .fold(f64::INFINITY, f64::min)
    }

    /// Euclidean projection onto `{g >= 0, |B| g <= 1}` by Dykstra's
    /// alternating projections, finished with an exact feasibility repair.
    pub fn project(&self, g: &[f64]) -> Vec<f64> {
        let k = self.users();
        let rows: Vec<Vec<f64>> = (0..self.basis.nrows())
            .map(|n| (0..k).map(|j| self.basis[(n, j)].abs()).collect::<Vec<f64>>())
            .filter(|a| a.iter().any(|&v| v > 0.0))
            .collect();
        let mut x = g.to_vec();
        if self.is_feasible(&x, 0.0) {
            return x;
        }
        let sets = rows.len() + 1;
        let mut incr = vec![vec![0.0; k]; sets];
        for _ in 0..20_000 {
            let before = x.clone();
            for (s, inc) in incr.iter_mut().enumerate() {
                let y: Vec<f64> = x.iter().zip(inc.iter()).map(|(a, b)| a + b).collect();
                let proj = if s == 0 {
                    y.iter().map(|v| v.max(0.0)).collect::<Vec<f64>>()
                } else {
                    let a = &rows[s - 1];
                    let dot: f64 = a.iter().zip(&y).map(|(p, q)| p * q).sum();
                    if dot <= 1.0 {
                        y.clone()
                    } else {
                        let nn: f64 = a.iter().map(|v| v * v).sum();
                        let t = (dot - 1.0) / nn;
                        y.iter().zip(a).map(|(q, p)| q - t * p).collect()
                    }
                };
                for j in 0..k {
                    inc[j] = y[j] - proj[j];
                }
                x = proj;
            }
            let change: f64 = x.iter().zip(&before).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if change < 1e-15 {
                break;
            }
        }
        x.iter_mut().for_each(|v| *v = v.max(0.0));
        let worst = self.loads(&x).into_iter().fold(0.0, f64::max);
        if worst > 1.0 {
            x.iter_mut().for_each(|v| *v /= worst);
        }
        x
    }
}

/// Right pseudo-inverse `H^T (H H^T)^-1`, scaled so the largest row L1 norm
/// is exactly one.
pub fn zf_basis(h: &ChannelMatrix) -> Result<ZfBasis> {
    let hm = h.as_matrix();
    let (k, nt) = (hm.nrows(), hm.ncols());
    if nt < k {
        return Err(Error::ZfInfeasible(format!("{k} users but only {nt} LEDs")));
    }
    let sv = hm.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smax > 0.0) || smin <= RANK_TOL * smax {
        return Err(Error::ZfInfeasible(format!(
            "channel matrix is rank deficient (singular values {smin:e} / {smax:e})"
        )));
    }
    let gram = hm * hm.transpose();
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::ZfInfeasible("H H^T is singular".into()))?;
    let mut basis = hm.transpose() * inv;
    let scale = crate::precoder::max_row_l1(&basis);
    basis /= scale;
    let gains: Vec<f64> = (0..k).map(|j| hm.row(j).dot(&basis.column(j).transpose())).collect();
    if gains.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::ZfInfeasible("non-positive effective gain".into()));
    }
    Ok(ZfBasis { basis, gains })
}

/// Largest normalized cross-user leakage `|h_k^T w_i| / (||h_k|| ||w_i||)`
/// over `i != k`.
pub fn zf_residual(h: &ChannelMatrix, w: &DMatrix<f64>) -> f64 {
    let hm = h.as_matrix();
    let mut worst: f64 = 0.0;
    for k in 0..hm.nrows() {
        let hk = hm.row(k);
        for i in 0..w.ncols() {
            if i == k {
                continue;
            }
            let wi = w.column(i);
            let den = hk.norm() * wi.norm();
            if den > 0.0 {
                worst = worst.max((hk.dot(&wi.transpose())).abs() / den);
            }
        }
    }
    worst
}
