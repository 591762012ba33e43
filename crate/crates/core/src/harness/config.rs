use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decision::DecisionParams;
use crate::empathy::EmpathyParams;
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::neuromodulation::{DopamineParams, RpePredictor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub episodes: usize,
    /// Episodes per reporting window.
    pub window: usize,
    /// Trailing episodes treated as converged.
    pub converged_episodes: usize,
    /// Episodes at the end of a run whose steps are kept for the step log.
    pub logged_episodes: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            episodes: 2000,
            window: 10,
            converged_episodes: 400,
            logged_episodes: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Explicit inhibitory proportions; when empty, `points` proportions are
    /// calibrated to evenly spaced `F_e` targets.
    pub proportions: Vec<f64>,
    pub points: usize,
    /// `F_e` range covered by calibrated targets (percent).
    pub fe_range: (f64, f64),
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            proportions: Vec::new(),
            points: 20,
            fe_range: (5.0, 100.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceConfig {
    /// `F_e` bands `[lo, hi]` in percent.
    pub bands: Vec<(f64, f64)>,
    /// Distances with fewer distressed episodes than this are left out of a band.
    pub min_support: usize,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self {
            bands: vec![(5.0, 25.0), (25.0, 50.0), (50.0, 80.0), (80.0, 100.0)],
            min_support: 20,
        }
    }
}

/// Every knob of an experiment. A config plus its seed fully determines a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub env: EnvConfig,
    pub empathy: EmpathyParams,
    pub dopamine: DopamineParams,
    pub rpe: RpePredictor,
    pub decision: DecisionParams,
    pub training: TrainingConfig,
    pub sweep: SweepConfig,
    pub distance: DistanceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            env: EnvConfig::default(),
            empathy: EmpathyParams::default(),
            dopamine: DopamineParams::default(),
            rpe: RpePredictor::default(),
            decision: DecisionParams::default(),
            training: TrainingConfig::default(),
            sweep: SweepConfig::default(),
            distance: DistanceConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config(e.to_string());
        self.empathy.validate().map_err(wrap)?;
        self.dopamine.validate().map_err(wrap)?;
        self.decision.validate().map_err(wrap)?;
        if !(self.rpe.alpha.is_finite() && self.rpe.beta > 0.0 && self.rpe.beta <= 1.0) {
            return Err(Error::Config("rpe: need finite alpha and beta in (0, 1]".into()));
        }
        if self.training.window == 0 {
            return Err(Error::Config("training.window must be >= 1".into()));
        }
        if self.training.converged_episodes > self.training.episodes {
            return Err(Error::Config(
                "training.converged_episodes exceeds training.episodes".into(),
            ));
        }
        for &p in &self.sweep.proportions {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("sweep.proportions: {p} outside [0, 1]")));
            }
        }
        let (lo, hi) = self.sweep.fe_range;
        if !(0.0 <= lo && lo <= hi && hi <= 100.0) {
            return Err(Error::Config("sweep.fe_range must satisfy 0 <= lo <= hi <= 100".into()));
        }
        for &(lo, hi) in &self.distance.bands {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::Config(format!("distance band [{lo}, {hi}] is inverted")));
            }
        }
        let g = &self.env.generator;
        if g.grid_width == 0 || g.grid_height == 0 || g.step_budget == 0 {
            return Err(Error::Config("env.generator: grid and budget must be non-zero".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).unwrap_or_default();
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Same experiment under another master seed. The decision and dopamine
    /// seeds are re-derived from it; the empathy seed is kept so every copy
    /// shares one calibration reference.
    pub fn seeded(&self, seed: u64) -> Self {
        let mut cfg = self.clone();
        cfg.seed = seed;
        cfg.dopamine.seed = crate::rng::derive_seed(seed, "dopamine-params", 0);
        cfg.decision.seed = crate::rng::derive_seed(seed, "decision-params", 0);
        cfg
    }
}
