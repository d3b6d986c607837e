use nalgebra::DMatrix;

use super::{Basis, BasisFamily};
use crate::linalg::AnyMatrix;
use crate::topology::NetworkTopology;
use crate::{Error, Result};

/// Daubechies-4 (four vanishing moments, eight taps) reconstruction low-pass
/// filter.
pub const DB4: [f64; 8] = [
    0.230_377_813_308_896_5,
    0.714_846_570_552_915_7,
    0.630_880_767_929_858_9,
    -0.027_983_769_416_859_854,
    -0.187_034_811_719_093_09,
    0.030_841_381_835_560_764,
    0.032_883_011_666_885_2,
    -0.010_597_401_785_069_032,
];

/// Decomposition depth for length `n`: the deepest level that keeps the
/// coarsest band at least one filter long, limited to the powers of two
/// dividing `n`, and never below one.
pub fn dwt_levels(n: usize) -> Result<usize> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("periodized DWT needs an even length, got {n}")));
    }
    let mut levels = 1;
    while n.is_multiple_of(1 << (levels + 1)) && n >> (levels + 1) >= DB4.len() {
        levels += 1;
    }
    Ok(levels)
}

fn high_pass() -> [f64; 8] {
    let mut g = [0.0; 8];
    for (n, v) in g.iter_mut().enumerate() {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        *v = s * DB4[DB4.len() - 1 - n];
    }
    g
}

/// One analysis step on a periodic signal: `(approximation, detail)`.
fn analysis_step(x: &[f64], lo: &[f64; 8], hi: &[f64; 8]) -> (Vec<f64>, Vec<f64>) {
    let len = x.len();
    let half = len / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        for n in 0..lo.len() {
            // periodic extension, phase aligned with the common periodization convention
            let idx = (2 * k + n + 4 * len - 3) % len;
            approx[k] += lo[n] * x[idx];
            detail[k] += hi[n] * x[idx];
        }
    }
    (approx, detail)
}

/// Multi-level periodized analysis; output layout `[a_L, d_L, …, d_1]`.
pub fn forward(x: &[f64], levels: usize) -> Vec<f64> {
    let hi = high_pass();
    let mut details = Vec::with_capacity(levels);
    let mut approx = x.to_vec();
    for _ in 0..levels {
        let (a, d) = analysis_step(&approx, &DB4, &hi);
        details.push(d);
        approx = a;
    }
    let mut out = approx;
    for d in details.into_iter().rev() {
        out.extend(d);
    }
    out
}

/// Orthonormal periodized DB4 synthesis matrix.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dwt {
    /// Overrides the automatic depth when set.
    pub levels: Option<usize>,
}

impl BasisFamily for Dwt {
    fn name(&self) -> &'static str {
        "dwt"
    }

    fn build(&self, n: usize, _topo: Option<&NetworkTopology>) -> Result<Basis> {
        let levels = match self.levels {
            Some(l) => {
                if l == 0 || n == 0 || !n.is_multiple_of(1 << l) {
                    return Err(Error::InvalidParameter(format!("{n} is not divisible by 2^{l}")));
                }
                l
            }
            None => dwt_levels(n)?,
        };
        // analysis matrix W has forward(e_i) as column i; synthesis is Wᵀ
        let mut unit = vec![0.0; n];
        let mut analysis = DMatrix::zeros(n, n);
        for i in 0..n {
            unit[i] = 1.0;
            analysis.set_column(i, &nalgebra::DVector::from_vec(forward(&unit, levels)));
            unit[i] = 0.0;
        }
        Basis::new(self.name(), AnyMatrix::Real(analysis.transpose()))
    }
}
