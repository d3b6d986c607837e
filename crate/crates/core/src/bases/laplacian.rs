use nalgebra::{DMatrix, SymmetricEigen};

use super::{Basis, BasisFamily};
use crate::linalg::AnyMatrix;
use crate::topology::NetworkTopology;
use crate::{Error, Result};

/// Eigenvectors of the unweighted combinatorial Laplacian `Deg − Adj` of the
/// sensor graph (sink excluded), in ascending eigenvalue order. Each vector
/// is signed so that its largest-magnitude entry is positive.
#[derive(Debug, Clone, Copy, Default)]
pub struct GraphLaplacian;

impl GraphLaplacian {
    pub fn laplacian(topo: &NetworkTopology) -> DMatrix<f64> {
        let n = topo.node_count();
        let mut lap = DMatrix::zeros(n, n);
        for e in topo.edges() {
            if e.a < n && e.b < n {
                lap[(e.a, e.b)] -= 1.0;
                lap[(e.b, e.a)] -= 1.0;
                lap[(e.a, e.a)] += 1.0;
                lap[(e.b, e.b)] += 1.0;
            }
        }
        lap
    }

    /// Eigenvalues (ascending) and matching eigenvectors as columns.
    pub fn spectrum(topo: &NetworkTopology) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = topo.node_count();
        let eig = SymmetricEigen::new(Self::laplacian(topo));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        // a second (near-)zero eigenvalue means a second connected component
        if n > 1 && values[1] < 1e-9 {
            return Err(Error::DisconnectedGraph);
        }
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(src).into_owned();
            let peak = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if peak < 0.0 {
                v.neg_mut();
            }
            vectors.set_column(dst, &v);
        }
        Ok((values, vectors))
    }
}

impl BasisFamily for GraphLaplacian {
    fn name(&self) -> &'static str {
        "laplacian"
    }

    fn needs_topology(&self) -> bool {
        true
    }

    fn build(&self, n: usize, topo: Option<&NetworkTopology>) -> Result<Basis> {
        let topo = topo.ok_or_else(|| Error::InvalidParameter("the Laplacian basis needs a topology".into()))?;
        if topo.node_count() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: topo.node_count() });
        }
        let (_, vectors) = Self::spectrum(topo)?;
        Basis::new(self.name(), AnyMatrix::Real(vectors))
    }
}
