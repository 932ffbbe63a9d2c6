//! Seeded profile generators: impartial culture (IC) and the 2-D Euclidean
//! threshold model.
//!
//! All randomness comes from SplitMix64, consumed in a fixed order, so a
//! config always yields the same instance.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::bitset::CandidateSet;
use crate::error::{Error, Result};
use crate::instance::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Every (voter, candidate) pair approved independently with
    /// probability `p`.
    Ic { p: f64 },
    /// Voters approve candidates within distance `t`.
    Euclidean { t: f64 },
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Ic { .. } => ModelKind::Ic,
            Model::Euclidean { .. } => ModelKind::Euclidean,
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            Model::Ic { p } => p,
            Model::Euclidean { t } => t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ic,
    Euclidean,
}

impl ModelKind {
    pub fn with_param(self, param: f64) -> Model {
        match self {
            ModelKind::Ic => Model::Ic { p: param },
            ModelKind::Euclidean => Model::Euclidean { t: param },
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Ic => "ic",
            ModelKind::Euclidean => "euclidean",
        })
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ic" => Ok(ModelKind::Ic),
            "euclidean" | "eut" => Ok(ModelKind::Euclidean),
            other => Err(format!("unknown model `{other}` (expected ic or euclidean)")),
        }
    }
}

/// How Euclidean candidates are placed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateLayout {
    /// Uniform on `[-1, 1]²`.
    #[default]
    Uniform,
    /// Same Gaussian as the voters.
    Gaussian,
}

impl FromStr for CandidateLayout {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(CandidateLayout::Uniform),
            "gaussian" => Ok(CandidateLayout::Gaussian),
            other => Err(format!("unknown candidate layout `{other}` (expected uniform or gaussian)")),
        }
    }
}

pub const DEFAULT_SIGMA: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub model: Model,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Per-axis standard deviation of voter positions.
    pub sigma: f64,
    pub layout: CandidateLayout,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(model: Model, n: usize, m: usize, k: usize, seed: u64) -> Self {
        SamplerConfig { model, n, m, k, sigma: DEFAULT_SIGMA, layout: CandidateLayout::Uniform, seed }
    }

    pub fn validate(&self) -> Result<()> {
        match self.model {
            Model::Ic { p } if !(0.0..=1.0).contains(&p) => {
                return Err(Error::validation("p", format!("{p} is not a probability")))
            }
            Model::Euclidean { t } if !(t >= 0.0 && t.is_finite()) => {
                return Err(Error::validation("t", format!("{t} is not a non-negative threshold")))
            }
            _ => {}
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::validation("sigma", format!("{} is not a non-negative spread", self.sigma)));
        }
        if self.n == 0 || self.k == 0 || self.k > self.m || self.m > crate::bitset::MAX_CANDIDATES {
            return Err(Error::validation(
                "size",
                format!("need n >= 1 and 1 <= k <= m <= {}, got n={} m={} k={}", crate::bitset::MAX_CANDIDATES, self.n, self.m, self.k),
            ));
        }
        Ok(())
    }
}

/// The SplitMix64 output function, used to derive independent seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `replicate` in grid cell `cell`:
/// `mix64(mix64(master + mix64(cell + 1)) + replicate + 1)` with wrapping
/// addition.
pub fn instance_seed(master: u64, cell: usize, replicate: usize) -> u64 {
    let inner = mix64(master.wrapping_add(mix64(cell as u64 + 1)));
    mix64(inner.wrapping_add(replicate as u64 + 1))
}

struct Stream(SplitMix64);

impl Stream {
    fn new(seed: u64) -> Self {
        Stream(SplitMix64::seed_from_u64(seed))
    }

    /// Uniform on `[0, 1)` from the top 53 bits.
    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// A pair of independent standard normals (Box–Muller).
    fn normal_pair(&mut self) -> (f64, f64) {
        let radius = (-2.0 * (1.0 - self.uniform()).ln()).sqrt();
        let angle = 2.0 * PI * self.uniform();
        (radius * angle.cos(), radius * angle.sin())
    }
}

pub fn sample(cfg: &SamplerConfig) -> Result<Instance> {
    match cfg.model {
        Model::Ic { .. } => sample_ic(cfg),
        Model::Euclidean { .. } => sample_euclidean(cfg),
    }
}

pub fn sample_ic(cfg: &SamplerConfig) -> Result<Instance> {
    cfg.validate()?;
    let Model::Ic { p } = cfg.model else {
        return Err(Error::Precondition("sample_ic needs the ic model".into()));
    };
    let mut rng = Stream::new(cfg.seed);
    let approvals = (0..cfg.n)
        .map(|_| (0..cfg.m).filter(|_| rng.uniform() < p).collect::<CandidateSet>())
        .collect();
    Ok(Instance::from_sets(cfg.m, cfg.k, approvals))
}

/// Candidates are drawn first, then voters; `v` approves `c` iff their
/// distance is at most `t`.
pub fn sample_euclidean(cfg: &SamplerConfig) -> Result<Instance> {
    cfg.validate()?;
    let Model::Euclidean { t } = cfg.model else {
        return Err(Error::Precondition("sample_euclidean needs the euclidean model".into()));
    };
    let mut rng = Stream::new(cfg.seed);
    let gaussian = |rng: &mut Stream| {
        let (x, y) = rng.normal_pair();
        (cfg.sigma * x, cfg.sigma * y)
    };
    let candidates: Vec<(f64, f64)> = (0..cfg.m)
        .map(|_| match cfg.layout {
            CandidateLayout::Uniform => (2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0),
            CandidateLayout::Gaussian => gaussian(&mut rng),
        })
        .collect();
    let approvals = (0..cfg.n)
        .map(|_| {
            let (x, y) = gaussian(&mut rng);
            candidates
                .iter()
                .enumerate()
                .filter(|(_, &(cx, cy))| (x - cx).powi(2) + (y - cy).powi(2) <= t * t)
                .map(|(c, _)| c)
                .collect::<CandidateSet>()
        })
        .collect();
    Ok(Instance::from_sets(cfg.m, cfg.k, approvals))
}
