//! The sparse ±1 measurement matrix induced by a clustering, and the
//! measurement vector `Y = ΦX`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::routing::{ChTree, ClusterAssignment};
use crate::rng;
use crate::{Error, Result};

/// Row-major support lists: row `j` holds `(column, sign)` pairs in ascending
/// column order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMeasurementMatrix {
    cols: usize,
    rows: Vec<Vec<(usize, i8)>>,
}

/// Sign `α_i` of node `i`: `-1` when its uniform draw is at most 0.5.
pub fn node_sign(seed: u64, node: usize) -> i8 {
    let stream = rng::derive(seed, "alpha", 0);
    if rng::unit_draw(stream, node as u64) <= 0.5 {
        -1
    } else {
        1
    }
}

/// One row per cluster; node `i` contributes its own sign at
/// `(cluster_of(i), i)`.
pub fn build_phi(assignment: &ClusterAssignment, seed: u64) -> SparseMeasurementMatrix {
    let mut rows = vec![Vec::new(); assignment.cluster_count()];
    for node in 0..assignment.node_count() {
        rows[assignment.cluster_of(node)].push((node, node_sign(seed, node)));
    }
    SparseMeasurementMatrix { cols: assignment.node_count(), rows }
}

impl SparseMeasurementMatrix {
    pub fn from_rows(cols: usize, mut rows: Vec<Vec<(usize, i8)>>) -> Result<Self> {
        for row in &mut rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidParameter("duplicate column in row".into()));
            }
            if let Some(&(c, s)) = row.iter().find(|&&(c, s)| c >= cols || (s != 1 && s != -1)) {
                return Err(Error::InvalidParameter(format!("bad entry ({c}, {s})")));
            }
        }
        Ok(Self { cols, rows })
    }

    /// Number of rows `M`.
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns `N`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, j: usize) -> &[(usize, i8)] {
        &self.rows[j]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Nonzero count of every column.
    pub fn column_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.cols];
        for row in &self.rows {
            for &(c, _) in row {
                counts[c] += 1;
            }
        }
        counts
    }

    /// `Y = ΦX`, each row summed in ascending column order.
    pub fn apply(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, actual: x.len() });
        }
        Ok(DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|row| row.iter().fold(0.0, |acc, &(c, s)| acc + f64::from(s) * x[c])),
        ))
    }

    pub fn densify(&self) -> DMatrix<f64> {
        let mut dense = DMatrix::zeros(self.rows.len(), self.cols);
        for (j, row) in self.rows.iter().enumerate() {
            for &(c, s) in row {
                dense[(j, c)] = f64::from(s);
            }
        }
        dense
    }

    /// Inverse of [`densify`](Self::densify); every nonzero must be ±1.
    pub fn from_dense(dense: &DMatrix<f64>) -> Result<Self> {
        let rows = (0..dense.nrows())
            .map(|j| {
                (0..dense.ncols())
                    .filter(|&c| dense[(j, c)] != 0.0)
                    .map(|c| match dense[(j, c)] {
                        1.0 => Ok((c, 1)),
                        -1.0 => Ok((c, -1)),
                        v => Err(Error::InvalidParameter(format!("entry ({j}, {c}) = {v} is not ±1"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cols: dense.ncols(), rows })
    }

    /// Header `M N`, then one `j i sign` line per nonzero.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows(), self.cols);
        for (j, row) in self.rows.iter().enumerate() {
            for &(c, s) in row {
                let _ = writeln!(out, "{j} {c} {s}");
            }
        }
        out
    }
}

/// Result of one simulated aggregation cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    pub cycle: u64,
    pub y: DVector<f64>,
}

/// Message-level replay of one cycle: every node signs its own sample, leaf
/// messages travel hop by hop to their head, each head sums its mailbox in
/// ascending sender order (its own term included) and the per-cluster sums
/// ride the tree to the sink, which files them by cluster index.
pub fn simulate_aggregation(
    assignment: &ClusterAssignment,
    tree: &ChTree,
    phi: &SparseMeasurementMatrix,
    x: &[f64],
    cycle: u64,
) -> Result<MeasurementVector> {
    let n = assignment.node_count();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: x.len() });
    }
    if phi.cols() != n || phi.rows() != assignment.cluster_count() {
        return Err(Error::DimensionMismatch { expected: n, actual: phi.cols() });
    }
    let mut sign = vec![0i8; n];
    for j in 0..phi.rows() {
        for &(c, s) in phi.row(j) {
            sign[c] = s;
        }
    }

    let mut mailbox: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for node in 0..n {
        // relays forward the message untouched; only the head opens it
        let head = *assignment.leaf_path(node).last().expect("path ends at the head");
        mailbox.entry(head).or_default().push((node, f64::from(sign[node]) * x[node]));
    }

    // head -> (cluster, value) records in flight toward the sink
    let mut records: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (&head, inbox) in &mut mailbox {
        inbox.sort_by_key(|&(src, _)| src);
        let y = inbox.iter().fold(0.0, |acc, &(_, v)| acc + v);
        records.entry(head).or_default().push((assignment.cluster_of(head), y));
    }
    for (v, parent, _) in tree.upward_order() {
        let payload = records.remove(&v).unwrap_or_default();
        records.entry(parent).or_default().extend(payload);
    }
    let delivered = records.remove(&tree.sink()).unwrap_or_default();
    let mut y = DVector::from_element(assignment.cluster_count(), f64::NAN);
    for (j, value) in delivered {
        y[j] = value;
    }
    Ok(MeasurementVector { cycle, y })
}
