//! Bipolar M-PAM alphabets and per-user symbol distributions.

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

/// Tolerance on PMF row sums.
pub const PMF_SUM_TOL: f64 = 1e-9;

/// Equally spaced bipolar amplitudes on `[-peak, peak]`.
pub fn pam_amplitudes(m: usize, peak: f64) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(invalid("m", format!("alphabet size must be >= 2, got {m}")));
    }
    if !(peak.is_finite() && peak > 0.0) {
        return Err(invalid("peak", format!("must be > 0, got {peak}")));
    }
    let den = (m - 1) as f64;
    Ok((1..=m).map(|i| (2.0 * i as f64 - m as f64 - 1.0) / den * peak).collect())
}

/// An M-PAM alphabet with peak amplitude `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    peak: f64,
    amplitudes: Vec<f64>,
}

impl Constellation {
    pub fn pam(m: usize, peak: f64) -> Result<Self> {
        Ok(Self { peak, amplitudes: pam_amplitudes(m, peak)? })
    }

    pub fn m(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }
}

/// K x M matrix whose row k is the symbol distribution of user k.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfMatrix(DMatrix<f64>);

impl PmfMatrix {
    /// Wraps a row-stochastic matrix, rejecting negative entries or rows not
    /// summing to one.
    pub fn new(probs: DMatrix<f64>) -> Result<Self> {
        for k in 0..probs.nrows() {
            check_pmf(probs.row(k).iter().copied())?;
        }
        Ok(Self(probs))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("PMF matrix needs at least one row".into()));
        }
        let m = rows[0].len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("PMF rows have different lengths".into()));
        }
        Self::new(DMatrix::from_fn(rows.len(), m, |k, j| rows[k][j]))
    }

    pub fn users(&self) -> usize {
        self.0.nrows()
    }

    pub fn m(&self) -> usize {
        self.0.ncols()
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        self.0.row(k).iter().copied().collect()
    }

    pub fn set_row(&mut self, k: usize, row: &[f64]) -> Result<()> {
        check_pmf(row.iter().copied())?;
        for (j, &p) in row.iter().enumerate() {
            self.0[(k, j)] = p;
        }
        Ok(())
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// True when every entry lies strictly inside (0, 1).
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&p| p > 0.0 && p < 1.0)
    }
}

/// Every entry equal to `1/m`.
pub fn uniform_pmf(k: usize, m: usize) -> Result<PmfMatrix> {
    if k < 1 {
        return Err(invalid("k", "need at least one user"));
    }
    if m < 2 {
        return Err(invalid("m", "alphabet size must be >= 2"));
    }
    Ok(PmfMatrix(DMatrix::from_element(k, m, 1.0 / m as f64)))
}

pub(crate) fn check_pmf(row: impl Iterator<Item = f64>) -> Result<()> {
    let mut sum = 0.0;
    for p in row {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::InvalidPmf(format!("entry {p} is not a probability")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PMF_SUM_TOL {
        return Err(Error::InvalidPmf(format!("row sums to {sum}")));
    }
    Ok(())
}

/// Shannon entropy of a probability vector, in bits.
pub fn pmf_entropy(row: &[f64]) -> Result<f64> {
    check_pmf(row.iter().copied())?;
    Ok(entropy_bits(row))
}

pub(crate) fn entropy_bits(row: &[f64]) -> f64 {
    -row.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

/// Total-variation distance between a row and the uniform distribution.
pub fn tv_to_uniform(row: &[f64]) -> f64 {
    let u = 1.0 / row.len() as f64;
    0.5 * row.iter().map(|p| (p - u).abs()).sum::<f64>()
}
