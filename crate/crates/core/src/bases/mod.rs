//! Orthonormal sparsifying bases `Ψ` and the registry that selects them by
//! name.
//!
//! Every basis is stored as its synthesis matrix: column `k` is the atom
//! `ψ_k`, so `X = Ψθ` and `θ = ΨᴴX`.

mod dct;
mod dft;
mod dwt;
mod laplacian;

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::linalg::{AnyMatrix, AnyVector};
use crate::topology::NetworkTopology;
use crate::{Error, Result};

pub use dct::Dct;
pub use dft::Dft;
pub use dwt::{dwt_levels, Dwt, DB4};
pub use laplacian::GraphLaplacian;

/// An `N × N` orthonormal (unitary for complex kinds) basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    name: &'static str,
    matrix: AnyMatrix,
}

impl Basis {
    pub fn new(name: &'static str, matrix: AnyMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), actual: matrix.ncols() });
        }
        Ok(Self { name, matrix })
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &AnyMatrix {
        &self.matrix
    }

    pub fn is_complex(&self) -> bool {
        self.matrix.is_complex()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: len });
        }
        Ok(())
    }

    /// `θ = ΨᴴX`.
    pub fn analyze(&self, x: &DVector<f64>) -> Result<AnyVector> {
        self.check_len(x.len())?;
        Ok(match &self.matrix {
            AnyMatrix::Real(psi) => AnyVector::Real(psi.tr_mul(x)),
            AnyMatrix::Complex(psi) => AnyVector::Complex(psi.ad_mul(&x.map(|v| Complex64::new(v, 0.0)))),
        })
    }

    /// `X = Ψθ` in the basis' own scalar type.
    pub fn synthesize(&self, theta: &AnyVector) -> Result<AnyVector> {
        self.check_len(theta.len())?;
        match (&self.matrix, theta) {
            (AnyMatrix::Real(psi), AnyVector::Real(t)) => Ok(AnyVector::Real(psi * t)),
            (AnyMatrix::Complex(psi), AnyVector::Complex(t)) => Ok(AnyVector::Complex(psi * t)),
            (AnyMatrix::Complex(psi), AnyVector::Real(t)) => {
                Ok(AnyVector::Complex(psi * t.map(|v| Complex64::new(v, 0.0))))
            }
            (AnyMatrix::Real(_), AnyVector::Complex(_)) => {
                Err(Error::InvalidParameter("complex coefficients for a real basis".into()))
            }
        }
    }

    /// Real signal `X = Re(Ψθ)`.
    pub fn synthesize_real(&self, theta: &AnyVector) -> Result<DVector<f64>> {
        Ok(self.synthesize(theta)?.real_part())
    }

    /// Numerical sparsity `‖θ‖₁² / ‖θ‖₂²` of `X` in this basis.
    pub fn numerical_sparsity(&self, x: &DVector<f64>) -> Result<f64> {
        numerical_sparsity(&self.analyze(x)?)
    }
}

/// `‖θ‖₁² / ‖θ‖₂²` using entry moduli; lies in `[1, len]`.
pub fn numerical_sparsity(theta: &AnyVector) -> Result<f64> {
    let moduli = theta.moduli();
    let l1: f64 = moduli.iter().sum();
    let l2sq: f64 = moduli.iter().map(|m| m * m).sum();
    if l2sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(l1 * l1 / l2sq)
}

/// A family of bases, buildable at any admissible dimension.
pub trait BasisFamily: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether [`build`](Self::build) needs the network topology.
    fn needs_topology(&self) -> bool {
        false
    }

    fn build(&self, n: usize, topo: Option<&NetworkTopology>) -> Result<Basis>;
}

/// Name-indexed set of basis families.
pub struct BasisRegistry {
    families: BTreeMap<&'static str, Box<dyn BasisFamily>>,
}

impl Default for BasisRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(Dct));
        registry.register(Box::new(Dft));
        registry.register(Box::new(Dwt::default()));
        registry.register(Box::new(GraphLaplacian));
        registry
    }
}

impl BasisRegistry {
    pub fn empty() -> Self {
        Self { families: BTreeMap::new() }
    }

    /// Adds a family, replacing any family already registered under its name.
    pub fn register(&mut self, family: Box<dyn BasisFamily>) {
        self.families.insert(family.name(), family);
    }

    pub fn get(&self, name: &str) -> Result<&dyn BasisFamily> {
        self.families
            .get(name)
            .map(Box::as_ref)
            .ok_or_else(|| Error::Unknown { kind: "basis", name: name.to_string() })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.families.keys().copied()
    }

    pub fn build(&self, name: &str, n: usize, topo: Option<&NetworkTopology>) -> Result<Basis> {
        self.get(name)?.build(n, topo)
    }
}

/// Builds a basis from the default registry.
pub fn make_basis(name: &str, n: usize, topo: Option<&NetworkTopology>) -> Result<Basis> {
    BasisRegistry::default().build(name, n, topo)
}
