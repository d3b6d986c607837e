use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Basis, BasisFamily};
use crate::linalg::AnyMatrix;
use crate::topology::NetworkTopology;
use crate::{Error, Result};

/// Unitary DFT: `ψ_k(i) = exp(2πi·ik/N) / √N`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dft;

impl BasisFamily for Dft {
    fn name(&self) -> &'static str {
        "dft"
    }

    fn build(&self, n: usize, _topo: Option<&NetworkTopology>) -> Result<Basis> {
        if n == 0 {
            return Err(Error::InvalidParameter("basis dimension must be positive".into()));
        }
        let scale = 1.0 / (n as f64).sqrt();
        // reduce i·k mod n first so large phases stay exact
        let psi = DMatrix::from_fn(n, n, |i, k| {
            let phase = 2.0 * PI * ((i * k) % n) as f64 / n as f64;
            Complex64::from_polar(scale, phase)
        });
        Basis::new(self.name(), AnyMatrix::Complex(psi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_point_is_unitary() {
        let b = Dft.build(4, None).unwrap();
        let AnyMatrix::Complex(m) = b.matrix() else { unreachable!() };
        let g = m.ad_mul(m);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        assert!((m[(1, 1)] - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }
}
