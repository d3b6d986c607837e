//! Scalar abstraction and the real/complex matrix wrappers shared by the
//! bases, recovery and analysis modules.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::measurement::SparseMeasurementMatrix;
use crate::{Error, Result};

/// Scalar type of a sensing pipeline: `f64` or `Complex64`.
pub trait Field: ComplexField<RealField = f64> + Copy + Send + Sync {
    fn wrap(v: DVector<Self>) -> AnyVector;

    /// `AᴴA` through the fastest kernel available for the scalar type.
    fn gram(a: &DMatrix<Self>) -> DMatrix<Self>;
}

impl Field for f64 {
    fn wrap(v: DVector<Self>) -> AnyVector {
        AnyVector::Real(v)
    }

    fn gram(a: &DMatrix<Self>) -> DMatrix<Self> {
        a.transpose() * a
    }
}

impl Field for Complex64 {
    fn wrap(v: DVector<Self>) -> AnyVector {
        AnyVector::Complex(v)
    }

    fn gram(a: &DMatrix<Self>) -> DMatrix<Self> {
        gram_complex(a)
    }
}

/// A dense matrix that is either real or complex.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl AnyMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            Self::Real(m) => m.nrows(),
            Self::Complex(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Self::Real(m) => m.ncols(),
            Self::Complex(m) => m.ncols(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Self::Complex(_))
    }
}

/// A vector that is either real or complex.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyVector {
    Real(DVector<f64>),
    Complex(DVector<Complex64>),
}

impl AnyVector {
    pub fn len(&self) -> usize {
        match self {
            Self::Real(v) => v.len(),
            Self::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entry magnitudes (complex modulus for complex vectors).
    pub fn moduli(&self) -> Vec<f64> {
        match self {
            Self::Real(v) => v.iter().map(|x| x.abs()).collect(),
            Self::Complex(v) => v.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Self::Real(v) => v.norm(),
            Self::Complex(v) => v.norm(),
        }
    }

    /// Real part (identity for real vectors).
    pub fn real_part(&self) -> DVector<f64> {
        match self {
            Self::Real(v) => v.clone(),
            Self::Complex(v) => v.map(|z| z.re),
        }
    }
}

/// Dense `ΦΨ`.
///
/// Each row of the product is a signed sum of basis rows, so the cost is one
/// pass over `Ψ` regardless of `M`.
pub fn phi_times<T: Field>(phi: &SparseMeasurementMatrix, psi: &DMatrix<T>) -> Result<DMatrix<T>> {
    if psi.nrows() != phi.cols() {
        return Err(Error::DimensionMismatch { expected: phi.cols(), actual: psi.nrows() });
    }
    let mut out = DMatrix::<T>::zeros(phi.rows(), psi.ncols());
    for col in 0..psi.ncols() {
        let src = psi.column(col);
        let mut dst = out.column_mut(col);
        for j in 0..phi.rows() {
            let mut acc = T::zero();
            for &(c, s) in phi.row(j) {
                if s > 0 {
                    acc += src[c];
                } else {
                    acc -= src[c];
                }
            }
            dst[j] = acc;
        }
    }
    Ok(out)
}

/// Euclidean norm of every column.
pub fn column_norms<T: Field>(a: &DMatrix<T>) -> Vec<f64> {
    a.column_iter().map(|c| c.norm()).collect()
}

/// Copy of `a` with unit-norm columns. Columns whose norm falls at or below
/// `tol` times the largest column norm are reported as zero columns.
pub fn normalize_columns<T: Field>(a: &DMatrix<T>, tol: f64) -> Result<DMatrix<T>> {
    let norms = column_norms(a);
    let largest = norms.iter().copied().fold(0.0, f64::max);
    let mut out = a.clone();
    for (j, &nrm) in norms.iter().enumerate() {
        if !(nrm > tol * largest) || nrm == 0.0 {
            return Err(Error::ZeroColumn(j));
        }
        out.column_mut(j).unscale_mut(nrm);
    }
    Ok(out)
}

/// `AᴴA`.
pub fn gram<T: Field>(a: &DMatrix<T>) -> DMatrix<T> {
    a.ad_mul(a)
}

/// Complex `AᴴA` assembled from four real products, so that the optimized
/// real kernel does the work.
pub fn gram_complex(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let re = a.map(|z| z.re);
    let im = a.map(|z| z.im);
    let (ret, imt) = (re.transpose(), im.transpose());
    let real = &ret * &re + &imt * &im;
    let imag = &ret * &im - &imt * &re;
    real.zip_map(&imag, Complex64::new)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_times_matches_dense() {
        let phi = SparseMeasurementMatrix::from_rows(4, vec![vec![(0, 1), (3, -1)], vec![(1, -1), (2, 1)]]).unwrap();
        let psi = DMatrix::from_fn(4, 4, |i, j| (i * 4 + j) as f64 * 0.5 - 3.0);
        let fast = phi_times(&phi, &psi).unwrap();
        assert!((fast - phi.densify() * &psi).amax() < 1e-12);
    }

    #[test]
    fn complex_gram_agrees() {
        let a = DMatrix::from_fn(5, 3, |i, j| Complex64::new((i + j) as f64 * 0.3, (i as f64 - j as f64) * 0.7));
        let g1 = gram(&a);
        let g2 = gram_complex(&a);
        assert!((g1 - g2).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn zero_columns_are_flagged() {
        let mut a = DMatrix::from_element(3, 3, 1.0);
        a.column_mut(1).fill(0.0);
        assert_eq!(normalize_columns(&a, 1e-12), Err(Error::ZeroColumn(1)));
        a.column_mut(1).fill(2.0);
        let n = normalize_columns(&a, 1e-12).unwrap();
        assert!(column_norms(&n).iter().all(|v| (v - 1.0).abs() < 1e-15));
    }
}
