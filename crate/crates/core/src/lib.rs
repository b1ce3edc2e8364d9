//! Joint probabilistic constellation shaping and precoding for amplitude
//! constrained multi-user visible-light broadcast channels.
//!
//! The crate builds line-of-sight channel matrices from room geometry
//! ([`channel`]), evaluates exact achievable rates of M-PAM users through
//! Gaussian-mixture entropies ([`rate`]), and maximizes the sum rate either
//! with a penalty-method firefly search over general precoders
//! ([`firefly`]) or with zero-forcing precoding solved by alternating
//! optimization ([`zf_ao`]). [`experiment`] drives A/sigma sweeps from JSON
//! configs and writes CSV reports.

pub mod channel;
pub mod constellation;
pub mod error;
pub mod experiment;
pub mod firefly;
pub mod precoder;
pub mod problem;
pub mod rate;
pub mod zf_ao;

pub use channel::{build_channel_matrix, los_gain, ChannelMatrix, ChannelParams, LinkGeometry};
pub use constellation::{pam_amplitudes, pmf_entropy, uniform_pmf, Constellation, PmfMatrix};
pub use error::{Error, Result};
pub use precoder::PrecodingMatrix;
pub use problem::Problem;
pub use rate::{GridPolicy, NoiseModel, PenaltyWeights, RateMode};
