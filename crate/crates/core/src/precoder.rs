use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

/// Slack allowed on the row-L1 bound when validating precoders.
pub const ROW_L1_TOL: f64 = 1e-9;

/// N_T x K precoder whose rows respect `||row||_1 <= 1`, so every LED drive
/// signal stays inside `[-A, A]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingMatrix(DMatrix<f64>);

impl PrecodingMatrix {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        if w.iter().any(|x| !x.is_finite()) {
            return Err(invalid("precoder", "entries must be finite"));
        }
        let l1 = max_row_l1(&w);
        if l1 > 1.0 + ROW_L1_TOL {
            return Err(invalid("precoder", format!("max row L1 norm {l1} exceeds 1")));
        }
        Ok(Self(w))
    }

    pub fn zeros(leds: usize, users: usize) -> Self {
        Self(DMatrix::zeros(leds, users))
    }

    /// Scales down every row whose L1 norm exceeds one.
    pub fn project(mut w: DMatrix<f64>) -> Result<Self> {
        for n in 0..w.nrows() {
            let l1: f64 = w.row(n).iter().map(|x| x.abs()).sum();
            if l1 > 1.0 {
                w.row_mut(n).scale_mut(1.0 / l1);
            }
        }
        Self::new(w)
    }

    pub fn leds(&self) -> usize {
        self.0.nrows()
    }

    pub fn users(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn check_shape(&self, leds: usize, users: usize) -> Result<()> {
        if self.leds() != leds || self.users() != users {
            return Err(Error::Dimension(format!(
                "precoder is {}x{}, expected {leds}x{users}",
                self.leds(),
                self.users()
            )));
        }
        Ok(())
    }
}

/// Largest row L1 norm.
pub fn max_row_l1(w: &DMatrix<f64>) -> f64 {
    (0..w.nrows())
        .map(|n| w.row(n).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
