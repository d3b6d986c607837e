//! Command-line experiment harness around `lwcda-core`.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

pub use config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "lwcda", version, about = "Clustered compressed data aggregation experiments")]
pub struct Cli {
    /// TOML experiment configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deploy, cluster, aggregate one cycle, recover and price it.
    Aggregate(Overrides),
    /// Monte-Carlo restricted isometry constants of the sensing matrix.
    Ric(Overrides),
    /// Mutual coherence over a sweep of measurement counts.
    Coherence(Overrides),
    /// Recovery phase diagram.
    Phase(Overrides),
    /// Transmission cost of every scheme over compression rates.
    CostSweep(Overrides),
    /// Transmission cost over network sizes.
    DensitySweep(Overrides),
    /// Transmission cost over sink positions along the diagonal.
    SinkSweep(Overrides),
    /// Synthetic field raster, node samples and their sparsity.
    Field(Overrides),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Independent seeds per sweep point.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// dct, dft, dwt or laplacian.
    #[arg(long)]
    pub basis: Option<String>,
    /// grid or random.
    #[arg(long)]
    pub deployment: Option<String>,
    /// Relabel random deployments along the nearest-neighbour chain.
    #[arg(long)]
    pub slnm: bool,
    /// Compression rate in percent.
    #[arg(long, conflicts_with = "thr")]
    pub gamma: Option<f64>,
    /// Cluster-head election threshold.
    #[arg(long)]
    pub thr: Option<f64>,
    /// Number of sensor nodes.
    #[arg(short = 'n', long = "nodes")]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub e_th: Option<f64>,
    #[arg(long)]
    pub max_k: Option<usize>,
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Frobenius norm for the isometry estimate.
    #[arg(long)]
    pub frobenius: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seeds {
            cfg.seeds = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = &self.basis {
            cfg.recovery.basis = v.clone();
        }
        if let Some(v) = &self.deployment {
            cfg.network.deployment = v.clone();
        }
        if self.slnm {
            cfg.protocol.slnm = true;
        }
        // a flag replaces whichever of the pair the file set
        if let Some(v) = self.gamma {
            cfg.protocol.gamma = Some(v);
            cfg.protocol.thr = None;
        }
        if let Some(v) = self.thr {
            cfg.protocol.thr = Some(v);
            cfg.protocol.gamma = None;
        }
        if let Some(v) = self.nodes {
            cfg.network.n = v;
        }
        if let Some(v) = self.e_th {
            cfg.recovery.e_th = v;
        }
        if let Some(v) = self.max_k {
            cfg.recovery.max_k = Some(v);
        }
        if let Some(v) = self.kmax {
            cfg.recovery.kmax = Some(v);
        }
        if self.frobenius {
            cfg.recovery.frobenius = true;
        }
    }
}

/// Resolves the configuration and runs the command; returns the summary line.
pub fn run(cli: &Cli) -> Result<String> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let overrides = match &cli.command {
        Command::Aggregate(o)
        | Command::Ric(o)
        | Command::Coherence(o)
        | Command::Phase(o)
        | Command::CostSweep(o)
        | Command::DensitySweep(o)
        | Command::SinkSweep(o)
        | Command::Field(o) => o,
    };
    overrides.apply(&mut cfg);
    cfg.validate()?;
    match &cli.command {
        Command::Aggregate(_) => {
            let r = commands::aggregate(&cfg)?;
            Ok(format!("M = {}, recon error {:e}, T_cst {} (bootstrap {})", r.m, r.error, r.t_cst, r.bootstrap_cost))
        }
        Command::Ric(_) => commands::ric(&cfg),
        Command::Coherence(_) => commands::coherence_sweep(&cfg),
        Command::Phase(_) => commands::phase(&cfg),
        Command::CostSweep(_) => commands::cost_sweep(&cfg),
        Command::DensitySweep(_) => commands::density(&cfg),
        Command::SinkSweep(_) => commands::sink(&cfg),
        Command::Field(_) => commands::field(&cfg),
    }
}
