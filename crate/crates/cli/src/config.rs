//! Experiment configuration: a TOML file with sections, overridable from the
//! command line.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use lwcda_core::topology::{Area, Deployment, Point};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Root seed; every random draw derives from it.
    pub seed: u64,
    /// Monte-Carlo trials per estimate (RIC supports, phase cells).
    pub trials: usize,
    /// Independent seeds per point of the cost sweeps.
    pub seeds: u64,
    pub out: PathBuf,
    pub network: NetworkConfig,
    pub protocol: ProtocolConfig,
    pub recovery: RecoveryConfig,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub deployment: String,
    pub n: usize,
    pub width: f64,
    pub height: f64,
    /// Sink position; the area center when absent.
    pub sink: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    /// Compression rate in percent. Exclusive with `thr`.
    pub gamma: Option<f64>,
    /// Cluster-head election threshold. Exclusive with `gamma`.
    pub thr: Option<f64>,
    pub slnm: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecoveryConfig {
    pub basis: String,
    pub e_th: f64,
    /// OMP atom budget; `⌊M/4⌋` (or `M` for square systems) when absent.
    pub max_k: Option<usize>,
    pub residual_tol: f64,
    /// Largest sparsity reported by `ric`.
    pub kmax: Option<usize>,
    /// Use the Frobenius instead of the spectral norm in `ric`.
    pub frobenius: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Compression rates in percent for `cost-sweep`.
    pub gammas: Vec<f64>,
    /// Network sizes for `density-sweep`.
    pub sizes: Vec<usize>,
    /// Measurement counts for `coherence` and `phase`; `N/10 … 9N/10` when empty.
    pub m_values: Vec<usize>,
    /// Sink positions along the diagonal for `sink-sweep`.
    pub sink_positions: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 2000,
            seeds: 1,
            out: PathBuf::from("out"),
            network: NetworkConfig::default(),
            protocol: ProtocolConfig::default(),
            recovery: RecoveryConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self { deployment: "grid".into(), n: 100, width: 100.0, height: 100.0, sink: None }
    }
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            basis: "dct".into(),
            e_th: 1e-8,
            max_k: None,
            residual_tol: lwcda_core::recovery::DEFAULT_RESIDUAL_TOL,
            kmax: None,
            frobenius: false,
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            gammas: (1..=9).map(|g| f64::from(g) * 10.0).collect(),
            sizes: (1..=9).map(|s| s * 100).collect(),
            m_values: Vec::new(),
            sink_positions: 5,
        }
    }
}

/// Line (1-based) of the first `key = …` assignment in `text`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| l.trim_start().strip_prefix(key).is_some_and(|r| r.trim_start().starts_with('='))).map(|i| i + 1)
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
    }

    /// Parses and validates; validation errors name the offending line.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| anyhow!("{e}"))?;
        if let Err((key, msg)) = cfg.check() {
            return Err(match line_of(text, key) {
                Some(line) => anyhow!("line {line}: {key}: {msg}"),
                None => anyhow!("{key}: {msg}"),
            });
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(key, msg)| anyhow!("{key}: {msg}"))
    }

    fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(self.recovery.e_th > 0.0) {
            return Err(("e_th", format!("must be positive, got {}", self.recovery.e_th)));
        }
        if self.network.n == 0 {
            return Err(("n", "must be positive".into()));
        }
        if !(self.network.width > 0.0) {
            return Err(("width", "must be positive".into()));
        }
        if !(self.network.height > 0.0) {
            return Err(("height", "must be positive".into()));
        }
        if self.network.deployment.parse::<Deployment>().is_err() {
            return Err(("deployment", format!("expected grid or random, got {}", self.network.deployment)));
        }
        if self.trials == 0 {
            return Err(("trials", "must be positive".into()));
        }
        if self.seeds == 0 {
            return Err(("seeds", "must be positive".into()));
        }
        if let Some(g) = self.protocol.gamma {
            if !(0.0..100.0).contains(&g) {
                return Err(("gamma", format!("must lie in [0, 100), got {g}")));
            }
        }
        if let Some(t) = self.protocol.thr {
            if !(t > 0.0 && t <= 1.0) {
                return Err(("thr", format!("must lie in (0, 1], got {t}")));
            }
        }
        if let (Some(g), Some(t)) = (self.protocol.gamma, self.protocol.thr) {
            if (1.0 - g / 100.0 - t).abs() > 1e-9 {
                return Err(("thr", format!("disagrees with gamma = {g}% (expected {})", 1.0 - g / 100.0)));
            }
        }
        if self.sweep.sink_positions == 0 {
            return Err(("sink_positions", "must be positive".into()));
        }
        if let Some(g) = self.sweep.gammas.iter().find(|g| !(0.0..100.0).contains(*g)) {
            return Err(("gammas", format!("{g} is outside [0, 100)")));
        }
        Ok(())
    }

    pub fn deployment(&self) -> Deployment {
        self.network.deployment.parse().expect("validated")
    }

    pub fn area(&self) -> Result<Area> {
        Ok(Area::new(self.network.width, self.network.height)?)
    }

    pub fn sink(&self) -> Option<Point> {
        self.network.sink.map(|[x, y]| Point::new(x, y))
    }

    /// Compression rate as a fraction; 50% when neither `gamma` nor `thr` is set.
    pub fn gamma_fraction(&self) -> f64 {
        match (self.protocol.gamma, self.protocol.thr) {
            (Some(g), _) => g / 100.0,
            (None, Some(t)) => 1.0 - t,
            (None, None) => 0.5,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.protocol.thr.unwrap_or(1.0 - self.gamma_fraction())
    }

    /// Measurement count for experiments that fix `M`.
    pub fn exact_m(&self) -> Result<usize> {
        let m = ((1.0 - self.gamma_fraction()) * self.network.n as f64).round() as usize;
        if m == 0 {
            bail!("gamma leaves no measurement on {} nodes", self.network.n);
        }
        Ok(m)
    }

    pub fn m_values(&self) -> Vec<usize> {
        if self.sweep.m_values.is_empty() {
            (1..=9).map(|i| i * self.network.n / 10).filter(|&m| m > 0).collect()
        } else {
            self.sweep.m_values.clone()
        }
    }
}
