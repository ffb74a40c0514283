use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bias::{BiasSpec, Mode, Strength, Weakening};
use crate::builders::GeneratorParams;
use crate::error::{Error, Result};
use crate::metrics::SwingRule;
use crate::tol;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    UniformBeliefs,
    DiscreteVoting,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetworkSource {
    /// A fresh meeting network per network id; the params' own seed is
    /// replaced by a substream of the master seed.
    Generator(GeneratorParams),
    /// The same network for every network id.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BeliefSource {
    Uniform01,
    Buckets,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QSource {
    Fixed { q: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl QSource {
    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            QSource::Fixed { q } => q,
            QSource::Uniform { lo, hi } if lo == hi => lo,
            QSource::Uniform { lo, hi } => rng.random_range(lo..hi),
        }
    }
}

/// Bias settings apart from the strength, which comes from the q source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BiasTemplate {
    pub mode: Mode,
    pub phi: f64,
    pub alpha: f64,
    pub per_period: bool,
}

impl Default for BiasTemplate {
    fn default() -> Self {
        BiasTemplate { mode: Mode::Core, phi: 1.0, alpha: 1.0, per_period: false }
    }
}

impl BiasTemplate {
    pub fn with_q(&self, q: f64) -> BiasSpec {
        match self.mode {
            Mode::Core => BiasSpec::core(q),
            Mode::PhiExtension => BiasSpec::phi(q, self.phi),
            Mode::Generalized => BiasSpec::generalized(Strength::Uniform(q), Weakening::Scalar(self.alpha), self.per_period),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub network: NetworkSource,
    pub n_networks: usize,
    pub n_assignments: usize,
    pub beliefs: BeliefSource,
    pub q: QSource,
    #[serde(default)]
    pub bias: BiasTemplate,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    /// Elections run until the no-bias arm converges plus this many periods.
    #[serde(default = "default_extra")]
    pub election_extra_periods: usize,
    #[serde(default)]
    pub swing_rule: SwingRule,
    pub master_seed: u64,
}

fn default_eps() -> f64 {
    tol::EPS_SWEEP
}

fn default_t_max() -> usize {
    tol::T_MAX
}

fn default_extra() -> usize {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// n = 200, 100 networks x 20 assignments.
    Desk,
    /// n = 1000, 1000 networks x 100 assignments.
    Full,
}

/// Set-2 strength used by the presets. Above 0.75 every pair of adjacent
/// buckets (0.25 apart) is severed and nobody learns at all.
pub const SET2_Q: f64 = 0.7;

impl ScenarioConfig {
    fn preset(scale: Scale, seed: u64) -> Self {
        let (n, nets, assigns) = match scale {
            Scale::Desk => (200, 100, 20),
            Scale::Full => (1000, 1000, 100),
        };
        ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            experiment: Experiment::Custom,
            network: NetworkSource::Generator(GeneratorParams::with_n(n, 0)),
            n_networks: nets,
            n_assignments: assigns,
            beliefs: BeliefSource::Uniform01,
            q: QSource::Fixed { q: 0.0 },
            bias: BiasTemplate::default(),
            eps: tol::EPS_SWEEP,
            t_max: tol::T_MAX,
            election_extra_periods: default_extra(),
            swing_rule: SwingRule::CoinToss,
            master_seed: seed,
        }
    }

    /// Uniform beliefs, q ~ U[0.05, 0.15].
    pub fn set1(scale: Scale, seed: u64) -> Self {
        ScenarioConfig {
            experiment: Experiment::UniformBeliefs,
            q: QSource::Uniform { lo: 0.05, hi: 0.15 },
            ..Self::preset(scale, seed)
        }
    }

    /// Five belief buckets with a left majority and a strong fixed q.
    pub fn set2(scale: Scale, seed: u64) -> Self {
        ScenarioConfig {
            experiment: Experiment::DiscreteVoting,
            beliefs: BeliefSource::Buckets,
            q: QSource::Fixed { q: SET2_Q },
            ..Self::preset(scale, seed)
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        if self.n_networks == 0 || self.n_assignments == 0 {
            return bad("n_networks and n_assignments must be positive".into());
        }
        if !(self.eps > 0.0) || self.t_max == 0 {
            return bad("eps and t_max must be positive".into());
        }
        match self.q {
            QSource::Fixed { q } if !(0.0..=1.0).contains(&q) => return bad(format!("q = {q} outside [0, 1]")),
            QSource::Uniform { lo, hi } if !(0.0 <= lo && lo <= hi && hi <= 1.0) => {
                return bad(format!("q range [{lo}, {hi}] must lie within [0, 1]"))
            }
            _ => {}
        }
        if let NetworkSource::Generator(p) = &self.network {
            p.validate()?;
        }
        self.bias.with_q(0.5).validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for cfg in [ScenarioConfig::set1(Scale::Desk, 3), ScenarioConfig::set2(Scale::Full, 4)] {
            cfg.validate().unwrap();
            assert_eq!(ScenarioConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        }
    }

    #[test]
    fn minimal_json() {
        let text = r#"{
            "schema_version": 1,
            "experiment": "custom",
            "network": {"kind": "file", "path": "net.txt"},
            "n_networks": 1, "n_assignments": 2,
            "beliefs": {"kind": "uniform01"},
            "q": {"kind": "fixed", "q": 0.3},
            "master_seed": 7
        }"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        assert_eq!(cfg.eps, tol::EPS_SWEEP);
        assert_eq!(cfg.bias, BiasTemplate::default());
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ScenarioConfig::set1(Scale::Desk, 0);
        cfg.q = QSource::Uniform { lo: 0.5, hi: 1.5 };
        assert!(matches!(cfg.validate(), Err(Error::ConfigInvalid(_))));
        let mut cfg = ScenarioConfig::set1(Scale::Desk, 0);
        cfg.schema_version = 9;
        assert!(cfg.validate().is_err());
    }
}
