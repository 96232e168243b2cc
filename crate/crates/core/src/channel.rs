//! Binary symmetric and binary-input AWGN channels, and the log-likelihood
//! cost vector fed to the decoder.
//!
//! Randomness comes from ChaCha8 seeded with the run seed; trial `t` reads
//! stream `t` of that generator (see [`trial_rng`]), so every trial is
//! reproducible on its own and independent of execution order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("BSC crossover probability must lie in (0, 0.5), got {0}")]
    Crossover(f64),
    #[error("AWGN noise standard deviation must be positive and finite, got {0}")]
    Sigma(f64),
    #[error("cannot parse channel {0:?}; expected bsc:P or awgn:SIGMA")]
    Syntax(String),
    #[error("cost {index} is not finite")]
    NonFiniteCost { index: usize },
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelModel {
    Bsc { p: f64 },
    /// BPSK over AWGN with 0 ↦ +1, 1 ↦ −1.
    Awgn { sigma: f64 },
}

impl ChannelModel {
    pub fn bsc(p: f64) -> Result<Self, ChannelError> {
        if p > 0.0 && p < 0.5 {
            Ok(Self::Bsc { p })
        } else {
            Err(ChannelError::Crossover(p))
        }
    }

    pub fn awgn(sigma: f64) -> Result<Self, ChannelError> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(Self::Awgn { sigma })
        } else {
            Err(ChannelError::Sigma(sigma))
        }
    }

    /// Sends `codeword` through the channel. BSC outputs are 0.0/1.0; every
    /// bit consumes exactly one draw, so runs at different `p` with the same
    /// generator flip nested sets of positions.
    pub fn transmit<R: Rng + ?Sized>(&self, codeword: &[u8], rng: &mut R) -> Vec<f64> {
        match *self {
            ChannelModel::Bsc { p } => codeword
                .iter()
                .map(|&x| {
                    let flip = rng.random::<f64>() < p;
                    ((x & 1) ^ flip as u8) as f64
                })
                .collect(),
            ChannelModel::Awgn { sigma } => codeword
                .iter()
                .map(|&x| {
                    let noise: f64 = rng.sample(StandardNormal);
                    bpsk(x) + sigma * noise
                })
                .collect(),
        }
    }

    pub fn transmit_seeded(&self, codeword: &[u8], seed: u64) -> Vec<f64> {
        self.transmit(codeword, &mut trial_rng(seed, 0))
    }

    /// `γ_i = ln(Pr(y_i | 0) / Pr(y_i | 1))`.
    pub fn llr_costs(&self, received: &[f64]) -> CostVector {
        let gammas = match *self {
            ChannelModel::Bsc { p } => {
                let mag = ((1.0 - p) / p).ln();
                received.iter().map(|&y| if y >= 0.5 { -mag } else { mag }).collect()
            }
            ChannelModel::Awgn { sigma } => {
                let slope = 2.0 / (sigma * sigma);
                received.iter().map(|&y| slope * y).collect()
            }
        };
        CostVector(gammas)
    }
}

pub fn bpsk(bit: u8) -> f64 {
    if bit & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelModel::Bsc { p } => write!(f, "bsc:{p}"),
            ChannelModel::Awgn { sigma } => write!(f, "awgn:{sigma}"),
        }
    }
}

impl FromStr for ChannelModel {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || ChannelError::Syntax(s.to_string());
        let (kind, value) = s.split_once(':').ok_or_else(syntax)?;
        let value: f64 = value.trim().parse().map_err(|_| syntax())?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "bsc" => Self::bsc(value),
            "awgn" => Self::awgn(value),
            _ => Err(syntax()),
        }
    }
}

/// Per-bit objective weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(gammas: Vec<f64>) -> Result<Self, ChannelError> {
        match gammas.iter().position(|g| !g.is_finite()) {
            Some(index) => Err(ChannelError::NonFiniteCost { index }),
            None => Ok(Self(gammas)),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Bitwise hard decision: 1 where the cost is negative.
    pub fn hard_decision(&self) -> Vec<u8> {
        self.0.iter().map(|&g| (g < 0.0) as u8).collect()
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(g, v)| g * v).sum()
    }
}
