//! One function per subcommand. Each writes its CSV/text artifacts into the
//! configured output directory and returns a short summary for the terminal.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lwcda_core::analysis::{
    admissible_k, coherence, phase_transition, ric_csv, ric_sweep, sensing_matrix, PhaseGrid, RicNorm,
};
use lwcda_core::bases::{Basis, BasisRegistry};
use lwcda_core::cost::{
    cost_csv, density_sweep, diagonal_positions, gamma_sweep, lwcda_cost, sink_sweep, AggregationScheme, DeploySpec,
    SchemeRegistry,
};
use lwcda_core::field::{grid_csv, make_field, sample_field, FieldParams};
use lwcda_core::linalg::{AnyMatrix, AnyVector};
use lwcda_core::measurement::{build_phi, simulate_aggregation, SparseMeasurementMatrix};
use lwcda_core::recovery::{omp, recon_error, reconstruct, StopRule};
use lwcda_core::routing::{
    assign_leaves, build_ch_mst, schedule_traffic, select_cluster_heads, select_cluster_heads_exact, Cycle,
    PayloadModel,
};
use lwcda_core::topology::{deploy, slnm_chain_seeded, Deployment, NetworkTopology};
use lwcda_core::Error;
use num_complex::Complex64;

use crate::config::ExperimentConfig;

fn write(out: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Topology of the configured network, relabeled along the SLNM chain when
/// enabled on a random deployment.
pub fn network(cfg: &ExperimentConfig) -> Result<NetworkTopology> {
    let topo = deploy(cfg.deployment(), cfg.network.n, cfg.area()?, cfg.sink(), cfg.seed)?;
    if cfg.protocol.slnm && cfg.deployment() == Deployment::Random {
        return Ok(slnm_chain_seeded(&topo, cfg.seed)?.apply(&topo)?);
    }
    Ok(topo)
}

fn basis(cfg: &ExperimentConfig, topo: &NetworkTopology) -> Result<Basis> {
    Ok(BasisRegistry::default().build(&cfg.recovery.basis, topo.node_count(), Some(topo))?)
}

fn stop_rule(cfg: &ExperimentConfig, m: usize, n: usize) -> StopRule {
    let mut rule = StopRule::default_for(m, n);
    if let Some(k) = cfg.recovery.max_k {
        rule.max_k = k.min(m);
    }
    rule.residual_tol = cfg.recovery.residual_tol;
    rule
}

fn exact_phi(topo: &NetworkTopology, m: usize, seed: u64) -> lwcda_core::Result<SparseMeasurementMatrix> {
    let heads = select_cluster_heads_exact(topo, m, seed)?;
    Ok(build_phi(&assign_leaves(topo, &heads)?, seed))
}

fn vector_csv(header: &str, columns: &[&[f64]]) -> String {
    let mut out = format!("{header}\n");
    for i in 0..columns[0].len() {
        let row: Vec<String> = columns.iter().map(|c| c[i].to_string()).collect();
        let _ = writeln!(out, "{i},{}", row.join(","));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateOutcome {
    pub m: usize,
    pub error: f64,
    pub t_cst: f64,
    pub bootstrap_cost: f64,
}

/// End-to-end run: deploy, cluster, aggregate one cycle, recover, price.
pub fn aggregate(cfg: &ExperimentConfig) -> Result<AggregateOutcome> {
    let topo = network(cfg)?;
    let n = topo.node_count();
    let heads = select_cluster_heads(&topo, cfg.threshold(), cfg.seed)?;
    let assignment = assign_leaves(&topo, &heads)?;
    let tree = build_ch_mst(&topo, &heads)?;
    let phi = build_phi(&assignment, cfg.seed);
    let field = make_field(cfg.seed, &FieldParams::default(), &cfg.area()?)?;
    let x = sample_field(&field, &topo);
    let y = simulate_aggregation(&assignment, &tree, &phi, x.as_slice(), 0)?.y;

    let psi = basis(cfg, &topo)?;
    let stop = stop_rule(cfg, phi.rows(), n);
    let theta = match sensing_matrix(&phi, &psi)? {
        AnyMatrix::Real(a) => AnyVector::Real(omp(&a, &y, stop)?.theta),
        AnyMatrix::Complex(a) => {
            AnyVector::Complex(omp(&a, &y.map(|v| Complex64::new(v, 0.0)), stop)?.theta)
        }
    };
    let x_hat = reconstruct(&psi, &theta)?;
    let error = recon_error(&x, &x_hat)?;

    let payload = PayloadModel::default();
    let ledger = schedule_traffic(&assignment, &tree, Cycle::Steady, &payload);
    let report = lwcda_cost(&topo, &assignment, &tree, &ledger, &payload)?;

    let out = &cfg.out;
    write(out, "topology.txt", &topo.to_text())?;
    write(out, "assignment.txt", &assignment.to_text())?;
    write(out, "phi.txt", &phi.to_text())?;
    write(out, "y.csv", &vector_csv("j,y", &[y.as_slice()]))?;
    write(out, "x_hat.csv", &vector_csv("i,x,x_hat", &[x.as_slice(), x_hat.as_slice()]))?;
    write(out, "traffic.csv", &ledger.to_csv())?;
    let outcome = AggregateOutcome {
        m: phi.rows(),
        error,
        t_cst: report.t_cst,
        bootstrap_cost: report.bootstrap.unwrap_or(0.0),
    };
    write(
        out,
        "summary.csv",
        &format!(
            "metric,value\nN,{n}\nM,{}\ngamma,{}\nrecon_error,{}\nT_cst,{}\nT_cst_bootstrap,{}\n",
            outcome.m,
            100.0 * (1.0 - outcome.m as f64 / n as f64),
            outcome.error,
            outcome.t_cst,
            outcome.bootstrap_cost
        ),
    )?;
    Ok(outcome)
}

/// Monte-Carlo `δ_k` for `k = 1..=kmax` plus the admissible sparsity.
pub fn ric(cfg: &ExperimentConfig) -> Result<String> {
    let topo = network(cfg)?;
    let m = cfg.exact_m()?;
    let phi = exact_phi(&topo, m, cfg.seed)?;
    let a = sensing_matrix(&phi, &basis(cfg, &topo)?)?;
    let norm = if cfg.recovery.frobenius { RicNorm::Frobenius } else { RicNorm::Spectral };
    let kmax = cfg.recovery.kmax.unwrap_or(32).min(m);
    let rows = ric_sweep(&a, kmax, cfg.trials, cfg.seed, norm)?;
    let path = write(&cfg.out, "ric.csv", &ric_csv(&rows))?;
    let k = admissible_k(&a, cfg.trials, cfg.seed, norm)?;
    Ok(format!("M = {m}: largest k with delta_k < 1 is {k}; wrote {}", path.display()))
}

/// Mean coherence of `ΦΨ` over `seeds` measurement matrices per `M`.
pub fn coherence_sweep(cfg: &ExperimentConfig) -> Result<String> {
    let topo = network(cfg)?;
    let psi = basis(cfg, &topo)?;
    let mut csv = String::from("basis,M,mu,zero_column_draws\n");
    for m in cfg.m_values() {
        let mut total = 0.0;
        let mut degenerate = 0;
        for s in 0..cfg.seeds {
            let phi = exact_phi(&topo, m, cfg.seed + s)?;
            total += match coherence(&sensing_matrix(&phi, &psi)?) {
                Ok(mu) => mu,
                Err(Error::ZeroColumn(_)) => {
                    degenerate += 1;
                    1.0
                }
                Err(e) => return Err(e.into()),
            };
        }
        let _ = writeln!(csv, "{},{m},{},{degenerate}", psi.name(), total / cfg.seeds as f64);
    }
    let path = write(&cfg.out, "coherence.csv", &csv)?;
    Ok(format!("wrote {}", path.display()))
}

/// Recovery probability over `(k/M, 1 − M/N)`.
pub fn phase(cfg: &ExperimentConfig) -> Result<String> {
    let topo = network(cfg)?;
    let psi = basis(cfg, &topo)?;
    let grid = PhaseGrid { m_values: cfg.m_values(), k_over_m: (1..=9).map(|i| f64::from(i) / 10.0).collect() };
    let diagram =
        phase_transition(|m, seed| exact_phi(&topo, m, seed), &psi, &grid, cfg.trials, cfg.recovery.e_th, cfg.seed)?;
    let path = write(&cfg.out, "phase.csv", &diagram.to_csv())?;
    Ok(format!("mean P_s {:.4}; wrote {}", diagram.mean_p_s(), path.display()))
}

fn schemes(registry: &SchemeRegistry) -> Vec<&dyn AggregationScheme> {
    registry.names().map(|n| registry.get(n).expect("listed")).collect()
}

fn seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    (0..cfg.seeds).map(|i| cfg.seed + i).collect()
}

fn spec(cfg: &ExperimentConfig) -> Result<DeploySpec> {
    Ok(DeploySpec { kind: cfg.deployment(), n: cfg.network.n, area: cfg.area()? })
}

pub fn cost_sweep(cfg: &ExperimentConfig) -> Result<String> {
    let registry = SchemeRegistry::default();
    let gammas: Vec<f64> = cfg.sweep.gammas.iter().map(|g| g / 100.0).collect();
    let rows = gamma_sweep(&schemes(&registry), &spec(cfg)?, &gammas, &seeds(cfg))?;
    let path = write(&cfg.out, "cost.csv", &cost_csv(&rows))?;
    Ok(format!("{} rows; wrote {}", rows.len(), path.display()))
}

pub fn density(cfg: &ExperimentConfig) -> Result<String> {
    let registry = SchemeRegistry::default();
    let rows = density_sweep(
        &schemes(&registry),
        cfg.deployment(),
        cfg.area()?,
        &cfg.sweep.sizes,
        cfg.gamma_fraction(),
        &seeds(cfg),
    )?;
    let path = write(&cfg.out, "density.csv", &cost_csv(&rows))?;
    Ok(format!("{} rows; wrote {}", rows.len(), path.display()))
}

pub fn sink(cfg: &ExperimentConfig) -> Result<String> {
    let registry = SchemeRegistry::default();
    let area = cfg.area()?;
    let positions = diagonal_positions(&area, cfg.sweep.sink_positions);
    let rows = sink_sweep(&schemes(&registry), &spec(cfg)?, cfg.gamma_fraction(), &positions, &seeds(cfg))?;
    let path = write(&cfg.out, "sink.csv", &cost_csv(&rows))?;
    Ok(format!("{} rows; wrote {}", rows.len(), path.display()))
}

/// Raster and node samples of the synthetic field, with the numerical
/// sparsity of the samples in every registered basis.
pub fn field(cfg: &ExperimentConfig) -> Result<String> {
    let area = cfg.area()?;
    let topo = network(cfg)?;
    let field = make_field(cfg.seed, &FieldParams::default(), &area)?;
    write(&cfg.out, "field.csv", &grid_csv(&field, &area, 64, 64))?;
    let x = sample_field(&field, &topo);
    let mut samples = String::from("id,x,y,value\n");
    for (i, p) in topo.positions().iter().enumerate() {
        let _ = writeln!(samples, "{i},{},{},{}", p.x, p.y, x[i]);
    }
    write(&cfg.out, "samples.csv", &samples)?;
    let registry = BasisRegistry::default();
    let mut csv = String::from("basis,s\n");
    for name in registry.names() {
        match registry.build(name, topo.node_count(), Some(&topo)) {
            Ok(b) => {
                let _ = writeln!(csv, "{name},{}", b.numerical_sparsity(&x)?);
            }
            // e.g. odd N for the wavelet basis
            Err(Error::InvalidParameter(_)) | Err(Error::DisconnectedGraph) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    let path = write(&cfg.out, "sparsity.csv", &csv)?;
    Ok(format!("wrote {}", path.display()))
}

