use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{Basis, BasisFamily};
use crate::linalg::AnyMatrix;
use crate::topology::NetworkTopology;
use crate::{Error, Result};

/// Orthonormal DCT-II.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dct;

impl BasisFamily for Dct {
    fn name(&self) -> &'static str {
        "dct"
    }

    fn build(&self, n: usize, _topo: Option<&NetworkTopology>) -> Result<Basis> {
        if n == 0 {
            return Err(Error::InvalidParameter("basis dimension must be positive".into()));
        }
        let nf = n as f64;
        let psi = DMatrix::from_fn(n, n, |i, k| {
            let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            scale * (PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos()
        });
        Basis::new(self.name(), AnyMatrix::Real(psi))
    }
}
