use crate::channel::ChannelMatrix;
use crate::constellation::{Constellation, PmfMatrix};
use crate::error::{invalid, Error, Result};
use crate::precoder::PrecodingMatrix;
use crate::rate::{self, GridPolicy, NoiseModel, RateMode, SumRate};

/// Everything needed to evaluate rates: channel, per-user alphabets, noise
/// and the quadrature policy.
#[derive(Debug, Clone)]
pub struct Problem {
    channel: ChannelMatrix,
    constellations: Vec<Constellation>,
    noise: NoiseModel,
    grid: GridPolicy,
}

impl Problem {
    pub fn new(
        channel: ChannelMatrix,
        constellations: Vec<Constellation>,
        noise: NoiseModel,
        grid: GridPolicy,
    ) -> Result<Self> {
        if constellations.len() != channel.users() {
            return Err(Error::Dimension(format!(
                "{} constellations for {} users",
                constellations.len(),
                channel.users()
            )));
        }
        let m = constellations[0].m();
        if constellations.iter().any(|c| c.m() != m) {
            return Err(invalid("constellations", "all users must share the alphabet size"));
        }
        if grid.points_per_sigma < 4 {
            return Err(invalid("points_per_sigma", "must be >= 4"));
        }
        Ok(Self { channel, constellations, noise, grid })
    }

    /// Every user gets the same `m`-PAM alphabet with peak `peak`.
    pub fn shared_pam(
        channel: ChannelMatrix,
        m: usize,
        peak: f64,
        noise: NoiseModel,
        grid: GridPolicy,
    ) -> Result<Self> {
        let c = Constellation::pam(m, peak)?;
        let k = channel.users();
        Self::new(channel, vec![c; k], noise, grid)
    }

    pub fn channel(&self) -> &ChannelMatrix {
        &self.channel
    }

    pub fn constellations(&self) -> &[Constellation] {
        &self.constellations
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn grid(&self) -> GridPolicy {
        self.grid
    }

    pub fn with_grid(mut self, grid: GridPolicy) -> Self {
        self.grid = grid;
        self
    }

    pub fn users(&self) -> usize {
        self.channel.users()
    }

    pub fn leds(&self) -> usize {
        self.channel.leds()
    }

    pub fn m(&self) -> usize {
        self.constellations[0].m()
    }

    pub fn sum_rate(&self, w: &PrecodingMatrix, p: &PmfMatrix, mode: RateMode) -> Result<SumRate> {
        rate::sum_rate(self, w.as_matrix(), p, mode)
    }
}
