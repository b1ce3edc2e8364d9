//! Line-of-sight optical channel gains for an indoor LED/photodiode layout.
//!
//! The gain of one LED-to-PD link follows the Lambertian emission model with
//! an optical filter and a non-imaging concentrator at the receiver:
//!
//! ```text
//! h = eta * gamma * A_r / d^2 * L(phi) * T_s * g(psi) * cos(psi),   psi <= FOV
//! L(phi) = (l + 1) / (2 pi) * cos^l(phi),  l = -ln 2 / ln cos(theta_half)
//! g(psi) = kappa^2 / sin^2(FOV)
//! ```
//!
//! and is exactly zero outside the receiver field of view.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const NORMAL_TOL: f64 = 1e-12;

/// Photometric parameters shared by every link in the room.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// LED electrical-to-optical conversion factor (W/A).
    pub eta: f64,
    /// Photodiode responsivity (A/W).
    pub gamma_pd: f64,
    /// Photodiode active area (m^2).
    pub area_r: f64,
    /// LED semi-angle at half illuminance (rad).
    pub theta_half: f64,
    /// Receiver field of view (rad).
    pub fov: f64,
    /// Optical filter gain.
    pub ts: f64,
    /// Concentrator refractive index.
    pub kappa: f64,
}

impl ChannelParams {
    /// Parameters of the reference indoor setup: 60 degree LEDs, 1 cm^2 PD
    /// with 60 degree FOV, unit filter gain and a kappa = 1.5 concentrator.
    pub fn reference() -> Self {
        Self {
            eta: 0.44,
            gamma_pd: 0.54,
            area_r: 1e-4,
            theta_half: 60f64.to_radians(),
            fov: 60f64.to_radians(),
            ts: 1.0,
            kappa: 1.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eta", self.eta),
            ("gamma_pd", self.gamma_pd),
            ("area_r", self.area_r),
            ("theta_half", self.theta_half),
            ("fov", self.fov),
            ("ts", self.ts),
            ("kappa", self.kappa),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if self.theta_half >= PI / 2.0 {
            return Err(invalid("theta_half", "must lie in (0, pi/2)"));
        }
        if self.fov > PI / 2.0 {
            return Err(invalid("fov", "must lie in (0, pi/2]"));
        }
        Ok(())
    }

    /// Lambertian order `l = -ln 2 / ln cos(theta_half)`.
    pub fn lambertian_order(&self) -> f64 {
        -(2f64.ln()) / self.theta_half.cos().ln()
    }

    fn concentrator_gain(&self) -> f64 {
        self.kappa * self.kappa / self.fov.sin().powi(2)
    }
}

/// Positions and boresight orientations of one LED/PD pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub tx_pos: Vector3<f64>,
    pub rx_pos: Vector3<f64>,
    pub tx_normal: Vector3<f64>,
    pub rx_normal: Vector3<f64>,
}

/// LEDs point straight down.
pub fn downward() -> Vector3<f64> {
    Vector3::new(0.0, 0.0, -1.0)
}

/// Photodiodes point straight up.
pub fn upward() -> Vector3<f64> {
    Vector3::new(0.0, 0.0, 1.0)
}

impl LinkGeometry {
    /// Ceiling-mounted LED facing down, PD facing up.
    pub fn ceiling(tx_pos: Vector3<f64>, rx_pos: Vector3<f64>) -> Self {
        Self { tx_pos, rx_pos, tx_normal: downward(), rx_normal: upward() }
    }

    pub fn validate(&self) -> Result<()> {
        for n in [self.tx_normal, self.rx_normal] {
            let norm = n.norm();
            if !((norm - 1.0).abs() <= NORMAL_TOL) {
                return Err(Error::NonUnitNormal(norm));
            }
        }
        if (self.rx_pos - self.tx_pos).norm() == 0.0 {
            return Err(Error::ZeroDistance);
        }
        Ok(())
    }
}

/// LoS gain of a single link.
pub fn los_gain(geom: &LinkGeometry, params: &ChannelParams) -> Result<f64> {
    geom.validate()?;
    params.validate()?;
    let v = geom.rx_pos - geom.tx_pos;
    let d = v.norm();
    let dir = v / d;
    // emission angle at the LED, incidence angle at the PD
    let cos_phi = geom.tx_normal.dot(&dir).clamp(-1.0, 1.0);
    let cos_psi = (-geom.rx_normal.dot(&dir)).clamp(-1.0, 1.0);
    if cos_phi <= 0.0 || cos_psi <= 0.0 {
        return Ok(0.0);
    }
    let psi = cos_psi.acos();
    if psi > params.fov {
        return Ok(0.0);
    }
    let l = params.lambertian_order();
    let emission = (l + 1.0) / (2.0 * PI) * cos_phi.powf(l);
    Ok(params.eta * params.gamma_pd * params.area_r / (d * d)
        * emission
        * params.ts
        * params.concentrator_gain()
        * cos_psi)
}

/// K x N_T matrix of LoS gains; row k is user k's channel vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix(DMatrix<f64>);

impl ChannelMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::Dimension("channel matrix must be non-empty".into()));
        }
        if entries.iter().any(|h| !h.is_finite() || *h < 0.0) {
            return Err(invalid("channel", "entries must be finite and >= 0"));
        }
        Ok(Self(entries))
    }

    pub fn users(&self) -> usize {
        self.0.nrows()
    }

    pub fn leds(&self) -> usize {
        self.0.ncols()
    }

    /// Channel vector of user `k` as a row.
    pub fn row(&self, k: usize) -> nalgebra::RowDVector<f64> {
        self.0.row(k).into_owned()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Returns the matrix scaled by `factor`. Used to sweep SNR without
    /// touching the geometry.
    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }
}

/// Builds the channel matrix with every LED facing down and every PD facing up.
pub fn build_channel_matrix(
    led_positions: &[Vector3<f64>],
    user_positions: &[Vector3<f64>],
    params: &ChannelParams,
) -> Result<ChannelMatrix> {
    build_channel_matrix_oriented(led_positions, user_positions, params, downward(), upward())
}

/// Same as [`build_channel_matrix`] with explicit common orientations.
pub fn build_channel_matrix_oriented(
    led_positions: &[Vector3<f64>],
    user_positions: &[Vector3<f64>],
    params: &ChannelParams,
    tx_normal: Vector3<f64>,
    rx_normal: Vector3<f64>,
) -> Result<ChannelMatrix> {
    if led_positions.is_empty() || user_positions.is_empty() {
        return Err(Error::Dimension("need at least one LED and one user".into()));
    }
    let mut h = DMatrix::zeros(user_positions.len(), led_positions.len());
    for (k, rx) in user_positions.iter().enumerate() {
        for (n, tx) in led_positions.iter().enumerate() {
            let geom = LinkGeometry { tx_pos: *tx, rx_pos: *rx, tx_normal, rx_normal };
            h[(k, n)] = los_gain(&geom, params)?;
        }
    }
    ChannelMatrix::new(h)
}

/// LED and user positions of the reference 5 x 5 x 3 m room.
pub fn reference_room() -> (Vec<Vector3<f64>>, Vec<Vector3<f64>>) {
    let s = 2f64.sqrt();
    let leds = vec![
        Vector3::new(s, s, 3.0),
        Vector3::new(s, -s, 3.0),
        Vector3::new(-s, s, 3.0),
        Vector3::new(-s, -s, 3.0),
    ];
    let users = vec![Vector3::new(1.25, -1.6, 0.5), Vector3::new(-2.25, -0.33, 0.5)];
    (leds, users)
}
