//! Orthogonal matching pursuit and reconstruction error.

use std::ops::ControlFlow;

use nalgebra::{DMatrix, DVector};

use crate::bases::Basis;
use crate::linalg::{AnyVector, Field};
use crate::{Error, Result};

/// Relative residual tolerance used when none is given.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-12;

/// A new atom whose component orthogonal to the active set is this small
/// (relative to its own norm) makes the active set rank deficient.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub max_k: usize,
    /// Stop once `‖r‖ ≤ residual_tol · ‖y‖`.
    pub residual_tol: f64,
}

impl StopRule {
    pub fn new(max_k: usize) -> Self {
        Self { max_k, residual_tol: DEFAULT_RESIDUAL_TOL }
    }

    /// Default for compressible data: `⌊M/4⌋` atoms, or every atom when the
    /// system is square.
    pub fn default_for(m: usize, n: usize) -> Self {
        Self::new(if m >= n { m } else { (m / 4).max(1) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `y` was zero; nothing to do.
    ZeroMeasurement,
    MaxAtoms,
    ResidualTolerance,
    /// No remaining column correlates with the residual.
    NoCorrelation,
    /// The next atom was linearly dependent on the active set.
    RankDeficient,
    /// The observer asked to stop.
    Aborted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult<T: Field> {
    /// Full-length coefficient estimate.
    pub theta: DVector<T>,
    /// Active atoms in selection order.
    pub support: Vec<usize>,
    pub iterations: usize,
    /// `‖r‖` before the first step and after every accepted step.
    pub residuals: Vec<f64>,
    pub stop: StopReason,
}

/// OMP with the default (non-aborting) observer.
pub fn omp<T: Field>(a: &DMatrix<T>, y: &DVector<T>, stop: StopRule) -> Result<RecoveryResult<T>> {
    omp_observed(a, y, stop, |_| ControlFlow::Continue(()))
}

/// OMP that reports every selected atom to `observer` before it is accepted;
/// returning `Break` stops the run with [`StopReason::Aborted`], keeping the
/// atoms accepted so far.
///
/// The least-squares fit on the active set is kept as an incremental
/// Gram-Schmidt QR factorization (two orthogonalization passes per atom).
pub fn omp_observed<T, F>(a: &DMatrix<T>, y: &DVector<T>, stop: StopRule, mut observer: F) -> Result<RecoveryResult<T>>
where
    T: Field,
    F: FnMut(usize) -> ControlFlow<()>,
{
    let (m, n) = a.shape();
    if y.len() != m {
        return Err(Error::DimensionMismatch { expected: m, actual: y.len() });
    }
    if stop.max_k > m {
        return Err(Error::InvalidParameter(format!("max_k = {} exceeds M = {m}", stop.max_k)));
    }
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let largest = norms.iter().copied().fold(0.0, f64::max);
    // a column that is numerically zero carries no information and is never selected
    let usable: Vec<bool> = norms.iter().map(|&v| v > RANK_TOL * largest).collect();

    let y_norm = y.norm();
    let mut residual = y.clone();
    let mut residuals = vec![y_norm];
    let mut support = Vec::new();
    let mut active = vec![false; n];
    let mut q: Vec<DVector<T>> = Vec::new();
    // column k of R holds the coefficients of atom k on q_0..q_k
    let mut r_cols: Vec<Vec<T>> = Vec::new();
    let mut z: Vec<T> = Vec::new();
    let mut corr = DVector::<T>::zeros(n);

    let reason = if y_norm == 0.0 {
        StopReason::ZeroMeasurement
    } else {
        loop {
            if support.len() >= stop.max_k {
                break StopReason::MaxAtoms;
            }
            if *residuals.last().unwrap() <= stop.residual_tol * y_norm {
                break StopReason::ResidualTolerance;
            }
            corr.gemv_ad(T::one(), a, &residual, T::zero());
            let mut best = None;
            let mut best_score = 0.0;
            for j in 0..n {
                if active[j] || !usable[j] {
                    continue;
                }
                let score = corr[j].modulus() / norms[j];
                if score > best_score {
                    best_score = score;
                    best = Some(j);
                }
            }
            let Some(atom) = best else {
                break StopReason::NoCorrelation;
            };

            let mut v = a.column(atom).into_owned();
            let mut coeffs = vec![T::zero(); q.len()];
            for _ in 0..2 {
                for (qi, ci) in q.iter().zip(coeffs.iter_mut()) {
                    let proj = qi.dotc(&v);
                    v.axpy(-proj, qi, T::one());
                    *ci += proj;
                }
            }
            let v_norm = v.norm();
            if v_norm <= RANK_TOL * norms[atom] {
                break StopReason::RankDeficient;
            }
            if observer(atom).is_break() {
                break StopReason::Aborted;
            }
            v.unscale_mut(v_norm);
            let zk = v.dotc(&residual);
            residual.axpy(-zk, &v, T::one());
            let r_norm = residual.norm();
            debug_assert!(r_norm < *residuals.last().unwrap(), "OMP residual must strictly decrease");
            coeffs.push(T::from_real(v_norm));
            r_cols.push(coeffs);
            q.push(v);
            z.push(zk);
            active[atom] = true;
            support.push(atom);
            residuals.push(r_norm);
        }
    };

    // back substitution R c = z
    let k = support.len();
    let mut c = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut acc = z[i];
        for j in i + 1..k {
            acc -= r_cols[j][i] * c[j];
        }
        c[i] = acc / r_cols[i][i];
    }
    let mut theta = DVector::zeros(n);
    for (&atom, &value) in support.iter().zip(&c) {
        theta[atom] = value;
    }
    Ok(RecoveryResult { theta, iterations: k, support, residuals, stop: reason })
}

/// `X̂ = Ψθ̂`, real part taken for complex bases.
pub fn reconstruct(basis: &Basis, theta: &AnyVector) -> Result<DVector<f64>> {
    basis.synthesize_real(theta)
}

/// Relative error `‖X − X̂‖ / ‖X‖`.
pub fn recon_error(x: &DVector<f64>, x_hat: &DVector<f64>) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: x_hat.len() });
    }
    let norm = x.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((x - x_hat).norm() / norm)
}
