//! JSON experiment configuration.
//!
//! Angles are given in degrees and positions in meters. Unknown keys are
//! rejected; omitted solver sections fall back to their defaults.

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{build_channel_matrix_oriented, ChannelMatrix, ChannelParams};
use crate::firefly::FaConfig;
use crate::rate::GridPolicy;
use crate::zf_ao::AoConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn bad(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DbConvention {
    /// `20 log10(A / sigma)`.
    #[default]
    Amplitude,
    /// `10 log10(A / sigma)`.
    Power,
}

impl DbConvention {
    /// Peak amplitude for unit noise at `db`.
    pub fn peak(self, db: f64) -> f64 {
        match self {
            DbConvention::Amplitude => 10f64.powf(db / 20.0),
            DbConvention::Power => 10f64.powf(db / 10.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum Method {
    Fa,
    ZfAo,
    UniformBaselineFa,
    UniformBaselineZf,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fa => "fa",
            Method::ZfAo => "zf_ao",
            Method::UniformBaselineFa => "uniform_baseline_fa",
            Method::UniformBaselineZf => "uniform_baseline_zf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotometryConfig {
    pub eta: f64,
    pub gamma_pd: f64,
    pub area_r_m2: f64,
    pub theta_half_deg: f64,
    pub fov_deg: f64,
    pub ts: f64,
    pub kappa: f64,
}

impl PhotometryConfig {
    pub fn to_params(&self) -> ChannelParams {
        ChannelParams {
            eta: self.eta,
            gamma_pd: self.gamma_pd,
            area_r: self.area_r_m2,
            theta_half: self.theta_half_deg.to_radians(),
            fov: self.fov_deg.to_radians(),
            ts: self.ts,
            kappa: self.kappa,
        }
    }
}

fn down() -> [f64; 3] {
    [0.0, 0.0, -1.0]
}

fn up() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomConfig {
    pub leds: Vec<[f64; 3]>,
    pub users: Vec<[f64; 3]>,
    pub photometry: PhotometryConfig,
    #[serde(default = "down")]
    pub tx_normal: [f64; 3],
    #[serde(default = "up")]
    pub rx_normal: [f64; 3],
}

impl RoomConfig {
    pub fn channel(&self) -> crate::Result<ChannelMatrix> {
        let v = |p: &[f64; 3]| Vector3::new(p[0], p[1], p[2]);
        let leds: Vec<_> = self.leds.iter().map(v).collect();
        let users: Vec<_> = self.users.iter().map(v).collect();
        build_channel_matrix_oriented(
            &leds,
            &users,
            &self.photometry.to_params(),
            v(&self.tx_normal),
            v(&self.rx_normal),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationConfig {
    /// Alphabet size M.
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub a_over_sigma_db: Vec<f64>,
    #[serde(default)]
    pub db_convention: DbConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub room: RoomConfig,
    pub modulation: ModulationConfig,
    pub noise: NoiseConfig,
    pub method: Method,
    #[serde(default)]
    pub fa: FaConfig,
    #[serde(default)]
    pub ao: AoConfig,
    #[serde(default)]
    pub quadrature: GridPolicy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let r = &self.room;
        if r.leds.is_empty() {
            return Err(bad("room.leds", "need at least one LED"));
        }
        if r.users.is_empty() {
            return Err(bad("room.users", "need at least one user"));
        }
        if let Err(e) = r.photometry.to_params().validate() {
            return Err(bad("room.photometry", e.to_string()));
        }
        for (name, n) in [("room.tx_normal", r.tx_normal), ("room.rx_normal", r.rx_normal)] {
            let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(bad(name, format!("must be a unit vector (norm {norm})")));
            }
        }
        if self.modulation.m < 2 {
            return Err(bad("modulation.m", "alphabet size must be >= 2"));
        }
        if self.noise.a_over_sigma_db.is_empty() {
            return Err(bad("noise.a_over_sigma_db", "need at least one point"));
        }
        if self.noise.a_over_sigma_db.iter().any(|d| !d.is_finite()) {
            return Err(bad("noise.a_over_sigma_db", "points must be finite"));
        }
        if self.quadrature.points_per_sigma < 4 {
            return Err(bad("quadrature.points_per_sigma", "must be >= 4"));
        }
        if let Err(e) = self.fa.validate() {
            return Err(bad("fa", e.to_string()));
        }
        if let Err(e) = self.ao.validate() {
            return Err(bad("ao", e.to_string()));
        }
        Ok(())
    }
}

/// Reads and validates a JSON config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    ExperimentConfig::from_json(&text)
}
