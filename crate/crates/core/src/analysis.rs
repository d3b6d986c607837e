//! Quality measures of a sensing matrix `A = ΦΨ`: mutual coherence, a
//! Monte-Carlo restricted isometry estimate, and recovery phase diagrams.

use std::fmt::Write as _;
use std::ops::ControlFlow;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bases::Basis;
use crate::linalg::{gram_complex, normalize_columns, phi_times, AnyMatrix, Field};
use crate::measurement::SparseMeasurementMatrix;
use crate::recovery::{omp_observed, StopRule};
use crate::rng;
use crate::{Error, Result};

/// Columns whose norm is at most this fraction of the largest are zero.
pub const ZERO_COLUMN_TOL: f64 = 1e-10;

/// `ΦΨ` in the basis' scalar type.
pub fn sensing_matrix(phi: &SparseMeasurementMatrix, basis: &Basis) -> Result<AnyMatrix> {
    Ok(match basis.matrix() {
        AnyMatrix::Real(psi) => AnyMatrix::Real(phi_times(phi, psi)?),
        AnyMatrix::Complex(psi) => AnyMatrix::Complex(phi_times(phi, psi)?),
    })
}

/// Largest `|⟨a_p, a_q⟩|`, `p ≠ q`, over unit-normalized columns.
pub fn coherence(a: &AnyMatrix) -> Result<f64> {
    if a.ncols() < 2 {
        return Err(Error::InvalidParameter("coherence needs at least two columns".into()));
    }
    let off_diagonal_max = |moduli: DMatrix<f64>| {
        let mut mu = 0.0f64;
        for q in 0..moduli.ncols() {
            for p in 0..q {
                mu = mu.max(moduli[(p, q)]);
            }
        }
        mu.min(1.0)
    };
    Ok(match a {
        AnyMatrix::Real(m) => {
            let u = normalize_columns(m, ZERO_COLUMN_TOL)?;
            off_diagonal_max(u.tr_mul(&u).map(f64::abs))
        }
        AnyMatrix::Complex(m) => {
            let u = normalize_columns(m, ZERO_COLUMN_TOL)?;
            off_diagonal_max(gram_complex(&u).map(|z| z.norm()))
        }
    })
}

/// Which matrix norm measures `‖A_Tᴴ A_T − I‖`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RicNorm {
    #[default]
    Spectral,
    Frobenius,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicEstimate {
    pub k: usize,
    pub delta_k: f64,
    /// Extreme eigenvalues of `A_Tᴴ A_T` on the support that attained `delta_k`.
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub trials: usize,
}

/// Support of trial `t`: the leading entries of a seeded Fisher-Yates
/// shuffle, so the `k`-support is a prefix of the `k+1`-support.
struct SupportSampler {
    rng: ChaCha8Rng,
    perm: Vec<usize>,
    drawn: usize,
}

impl SupportSampler {
    fn new(seed: u64, trial: usize, n: usize) -> Self {
        Self { rng: rng::stream(seed, "ric-support", trial as u64), perm: (0..n).collect(), drawn: 0 }
    }

    fn prefix(&mut self, k: usize) -> &[usize] {
        let n = self.perm.len();
        while self.drawn < k {
            let j = self.rng.random_range(self.drawn..n);
            self.perm.swap(self.drawn, j);
            self.drawn += 1;
        }
        &self.perm[..k]
    }
}

struct Deviation {
    delta: f64,
    lambda_min: f64,
    lambda_max: f64,
}

fn deviation<T: Field>(g: &DMatrix<T>, norm: RicNorm) -> Deviation {
    let eig = g.clone().symmetric_eigenvalues();
    let lambda_min = eig.min();
    let lambda_max = eig.max();
    let delta = match norm {
        RicNorm::Spectral => (lambda_max - 1.0).max(1.0 - lambda_min),
        RicNorm::Frobenius => eig.iter().map(|l| (l - 1.0).powi(2)).sum::<f64>().sqrt(),
    };
    Deviation { delta, lambda_min, lambda_max }
}

fn sub_gram<T: Field>(a: &DMatrix<T>, support: &[usize]) -> DMatrix<T> {
    T::gram(&a.select_columns(support))
}

/// In-place Cholesky on the lower triangle of a Hermitian matrix; fails on the
/// first pivot that is not strictly positive.
fn positive_definite<T: Field>(mut m: DMatrix<T>) -> bool {
    let n = m.nrows();
    for j in 0..n {
        let mut pivot = m[(j, j)].real();
        for p in 0..j {
            pivot -= m[(j, p)].modulus_squared();
        }
        if !(pivot > 0.0) {
            return false;
        }
        let d = pivot.sqrt();
        m[(j, j)] = T::from_real(d);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for p in 0..j {
                v -= m[(i, p)] * m[(j, p)].conjugate();
            }
            m[(i, j)] = v.unscale(d);
        }
    }
    true
}

/// `deviation(g).delta < 1` without an eigendecomposition: for the spectral
/// norm both `G` and `2I - G` must be positive definite.
fn below_one<T: Field>(g: DMatrix<T>, norm: RicNorm) -> bool {
    match norm {
        RicNorm::Spectral => {
            let k = g.nrows();
            let upper = DMatrix::<T>::identity(k, k) * T::from_real(2.0) - &g;
            positive_definite(g) && positive_definite(upper)
        }
        RicNorm::Frobenius => {
            let k = g.nrows();
            (g - DMatrix::<T>::identity(k, k)).iter().map(|v| v.modulus_squared()).sum::<f64>() < 1.0
        }
    }
}

/// Unit-column copy of `a`, real or complex.
fn normalized(a: &AnyMatrix) -> Result<AnyMatrix> {
    Ok(match a {
        AnyMatrix::Real(m) => AnyMatrix::Real(normalize_columns(m, ZERO_COLUMN_TOL)?),
        AnyMatrix::Complex(m) => AnyMatrix::Complex(normalize_columns(m, ZERO_COLUMN_TOL)?),
    })
}

/// Monte-Carlo lower bound on `δ_k` for the column-normalized `a`: the worst
/// deviation over `trials` random `k`-supports.
pub fn ric_estimate(a: &AnyMatrix, k: usize, trials: usize, seed: u64, norm: RicNorm) -> Result<RicEstimate> {
    Ok(ric_sweep(a, k, trials, seed, norm)?.pop().expect("k >= 1"))
}

/// [`ric_estimate`] for every `k` in `1..=kmax`, sharing supports across `k`
/// so that the estimates are non-decreasing in `k`.
pub fn ric_sweep(a: &AnyMatrix, kmax: usize, trials: usize, seed: u64, norm: RicNorm) -> Result<Vec<RicEstimate>> {
    if kmax == 0 || kmax > a.nrows() || kmax > a.ncols() {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= min(M, N), got {kmax}")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    match normalized(a)? {
        AnyMatrix::Real(m) => Ok(ric_sweep_typed(&m, kmax, trials, seed, norm)),
        AnyMatrix::Complex(m) => Ok(ric_sweep_typed(&m, kmax, trials, seed, norm)),
    }
}

fn ric_sweep_typed<T: Field>(a: &DMatrix<T>, kmax: usize, trials: usize, seed: u64, norm: RicNorm) -> Vec<RicEstimate> {
    let per_trial: Vec<Vec<Deviation>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut sampler = SupportSampler::new(seed, t, a.ncols());
            let g = sub_gram(a, sampler.prefix(kmax));
            (1..=kmax).map(|k| deviation(&g.view((0, 0), (k, k)).into_owned(), norm)).collect()
        })
        .collect();
    (1..=kmax)
        .map(|k| {
            // first trial wins ties
            let best = per_trial.iter().map(|d| &d[k - 1]).fold(None::<&Deviation>, |acc, d| match acc {
                Some(b) if b.delta >= d.delta => Some(b),
                _ => Some(d),
            });
            let best = best.expect("trials >= 1");
            RicEstimate { k, delta_k: best.delta, lambda_min: best.lambda_min, lambda_max: best.lambda_max, trials }
        })
        .collect()
}

/// Largest `k` whose estimated `δ_k` stays below one (zero if even single
/// columns fail, which cannot happen after normalization with the spectral
/// norm).
///
/// Every trial has a largest admissible prefix length `k_t`, and the sampled
/// `δ_k < 1` exactly when `k ≤ min_t k_t`. Trials are scanned in order and
/// only need a full search when they undercut the running minimum.
pub fn admissible_k(a: &AnyMatrix, trials: usize, seed: u64, norm: RicNorm) -> Result<usize> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    match normalized(a)? {
        AnyMatrix::Real(m) => Ok(admissible_typed(&m, trials, seed, norm)),
        AnyMatrix::Complex(m) => Ok(admissible_typed(&m, trials, seed, norm)),
    }
}

fn admissible_typed<T: Field>(a: &DMatrix<T>, trials: usize, seed: u64, norm: RicNorm) -> usize {
    let cap = a.nrows().min(a.ncols());
    let ok = |sampler: &mut SupportSampler, k: usize| below_one(sub_gram(a, sampler.prefix(k)), norm);

    // largest passing k in (lo, hi] given that lo passes (or is 0) and hi + 1 fails
    let search = |sampler: &mut SupportSampler, mut lo: usize, mut hi: usize| {
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if ok(sampler, mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    };

    let mut first = SupportSampler::new(seed, 0, a.ncols());
    let mut step = 1;
    let mut passed = 0;
    let mut kmin = loop {
        let k = step.min(cap);
        if !ok(&mut first, k) {
            break search(&mut first, passed, k - 1);
        }
        passed = k;
        if k == cap {
            break cap;
        }
        step *= 2;
    };

    // later trials checked in parallel chunks; any that fail at the running
    // minimum are searched in trial order, which gives the same result as a
    // strictly sequential scan
    let chunk = rayon::current_num_threads().max(1) * 4;
    let mut t = 1;
    while t < trials && kmin > 0 {
        let end = (t + chunk).min(trials);
        let failing: Vec<usize> = (t..end)
            .into_par_iter()
            .filter(|&tt| !ok(&mut SupportSampler::new(seed, tt, a.ncols()), kmin))
            .collect();
        for tt in failing {
            let mut s = SupportSampler::new(seed, tt, a.ncols());
            if kmin > 0 && !ok(&mut s, kmin) {
                kmin = search(&mut s, 0, kmin - 1);
            }
        }
        t = end;
    }
    kmin
}

/// CSV with header `k,delta_k,lambda_min,lambda_max`.
pub fn ric_csv(rows: &[RicEstimate]) -> String {
    let mut out = String::from("k,delta_k,lambda_min,lambda_max\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.k, r.delta_k, r.lambda_min, r.lambda_max);
    }
    out
}

/// Grid of a phase diagram: measurement counts and sparsity ratios `k/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub m_values: Vec<usize>,
    pub k_over_m: Vec<f64>,
}

impl PhaseGrid {
    /// `M = step, 2·step, …, 9·step` and `k/M = 0.1, …, 0.9`.
    pub fn nine_by_nine(step: usize) -> Self {
        Self { m_values: (1..=9).map(|i| i * step).collect(), k_over_m: (1..=9).map(|i| i as f64 / 10.0).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCell {
    pub m: usize,
    pub k: usize,
    pub k_over_m: f64,
    pub one_minus_m_over_n: f64,
    pub successes: usize,
    pub trials: usize,
}

impl PhaseCell {
    pub fn p_s(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub n: usize,
    pub e_th: f64,
    /// Row-major: one row per `M`, one column per `k/M`.
    pub cells: Vec<PhaseCell>,
    pub rows: usize,
    pub cols: usize,
}

impl PhaseDiagram {
    pub fn cell(&self, row: usize, col: usize) -> &PhaseCell {
        &self.cells[row * self.cols + col]
    }

    pub fn mean_p_s(&self) -> f64 {
        self.cells.iter().map(PhaseCell::p_s).sum::<f64>() / self.cells.len() as f64
    }

    /// Pairs of neighbouring cells in a row where `P_s` rises with `k/M` by
    /// more than `z` standard errors of the difference.
    pub fn monotonicity_violations(&self, z: f64) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for r in 0..self.rows {
            for c in 1..self.cols {
                let (a, b) = (self.cell(r, c - 1), self.cell(r, c));
                let var = |x: &PhaseCell| x.p_s() * (1.0 - x.p_s()) / x.trials as f64;
                if b.p_s() - a.p_s() > z * (var(a) + var(b)).sqrt() {
                    bad.push((r, c));
                }
            }
        }
        bad
    }

    /// CSV with header `k_over_M,one_minus_M_over_N,P_s,trials`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k_over_M,one_minus_M_over_N,P_s,trials\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{},{}", c.k_over_m, c.one_minus_m_over_n, c.p_s(), c.trials);
        }
        out
    }
}

/// Empirical recovery probability over a grid of `(k/M, 1 − M/N)`.
///
/// Each trial draws a fresh `Φ = phi_gen(M, seed)`, plants a `k`-sparse
/// coefficient vector with standard normal entries on a uniform support,
/// runs OMP for `k` atoms on `y = ΦΨθ` and counts a success when the
/// relative reconstruction error is at most `e_th`.
///
/// A trial stops early as soon as OMP picks an atom outside the planted
/// support, provided the smallest planted coefficient is large enough that
/// missing it already exceeds `e_th`: the final estimate would then lack
/// that atom and the trial is a failure either way.
pub fn phase_transition<G>(
    phi_gen: G,
    basis: &Basis,
    grid: &PhaseGrid,
    trials: usize,
    e_th: f64,
    seed: u64,
) -> Result<PhaseDiagram>
where
    G: Fn(usize, u64) -> Result<SparseMeasurementMatrix> + Sync,
{
    if !(e_th > 0.0) {
        return Err(Error::InvalidParameter(format!("e_TH must be positive, got {e_th}")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    let n = basis.dim();
    let mut shape = Vec::new();
    for &m in &grid.m_values {
        for &ratio in &grid.k_over_m {
            let k = ((ratio * m as f64).round() as usize).max(1);
            if m == 0 || m > n || k > m {
                return Err(Error::InvalidParameter(format!("cell M = {m}, k = {k} violates 1 <= k <= M <= N = {n}")));
            }
            shape.push((m, k, ratio));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..shape.len()).flat_map(|c| (0..trials).map(move |t| (c, t))).collect();
    let outcomes: Vec<Result<bool>> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (m, k, _) = shape[c];
            let trial_seed = rng::derive(seed, "phase-trial", (c * trials + t) as u64);
            let phi = phi_gen(m, rng::derive(trial_seed, "phi", 0))?;
            let mut rng = rng::stream(trial_seed, "planted", 0);
            match basis.matrix() {
                AnyMatrix::Real(psi) => planted_trial(&phi, psi, k, e_th, &mut rng),
                AnyMatrix::Complex(psi) => planted_trial(&phi, psi, k, e_th, &mut rng),
            }
        })
        .collect();
    let mut cells: Vec<PhaseCell> = shape
        .iter()
        .map(|&(m, k, ratio)| PhaseCell {
            m,
            k,
            k_over_m: ratio,
            one_minus_m_over_n: 1.0 - m as f64 / n as f64,
            successes: 0,
            trials,
        })
        .collect();
    for (&(c, _), ok) in jobs.iter().zip(outcomes) {
        if ok? {
            cells[c].successes += 1;
        }
    }
    Ok(PhaseDiagram { n, e_th, cells, rows: grid.m_values.len(), cols: grid.k_over_m.len() })
}

fn planted_trial<T: Field>(
    phi: &SparseMeasurementMatrix,
    psi: &DMatrix<T>,
    k: usize,
    e_th: f64,
    rng: &mut ChaCha8Rng,
) -> Result<bool> {
    let n = psi.ncols();
    let a = phi_times(phi, psi)?;
    let support = rand::seq::index::sample(rng, n, k).into_vec();
    let mut theta = DVector::<T>::zeros(n);
    for &i in &support {
        let v: f64 = StandardNormal.sample(rng);
        theta[i] = T::from_real(v);
    }
    let y = &a * &theta;

    let theta_norm = theta.norm();
    let smallest = support.iter().map(|&i| theta[i].modulus()).fold(f64::INFINITY, f64::min);
    let decisive = smallest / theta_norm > 10.0 * e_th;
    let mut planted = vec![false; n];
    for &i in &support {
        planted[i] = true;
    }
    let res = omp_observed(&a, &y, StopRule::new(k), |atom| {
        if decisive && !planted[atom] {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    if res.stop == crate::recovery::StopReason::Aborted {
        return Ok(false);
    }
    let x = psi * &theta;
    let x_hat = psi * &res.theta;
    Ok((&x - x_hat).norm() / x.norm() <= e_th)
}
