//! Smooth synthetic scalar fields (a temperature surrogate): an ambient
//! offset plus a sum of isotropic Gaussian bumps.

use std::fmt::Write as _;

use nalgebra::DVector;
use rand::Rng;

use crate::rng;
use crate::topology::{Area, NetworkTopology, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: Point,
    pub amplitude: f64,
    /// Standard deviation, meters.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub bumps: Vec<Bump>,
    pub offset: f64,
}

impl ScalarField {
    pub fn constant(offset: f64) -> Self {
        Self { bumps: Vec::new(), offset }
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.bumps.iter().fold(self.offset, |acc, b| {
            let d2 = (p.x - b.center.x).powi(2) + (p.y - b.center.y).powi(2);
            acc + b.amplitude * (-d2 / (2.0 * b.width * b.width)).exp()
        })
    }
}

/// Generator settings. Widths are fractions of the longer side of the area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    pub n_bumps: usize,
    pub amplitude: (f64, f64),
    pub width: (f64, f64),
    pub offset: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self { n_bumps: 4, amplitude: (-3.0, 6.0), width: (0.15, 0.35), offset: 25.0 }
    }
}

/// Bump centers uniform over `area`, amplitudes and widths uniform over their
/// ranges.
pub fn make_field(seed: u64, params: &FieldParams, area: &Area) -> Result<ScalarField> {
    let (wlo, whi) = params.width;
    if !(wlo > 0.0 && whi >= wlo) {
        return Err(Error::InvalidParameter(format!("width range ({wlo}, {whi}) must be positive")));
    }
    let (alo, ahi) = params.amplitude;
    if !(ahi >= alo) {
        return Err(Error::InvalidParameter(format!("amplitude range ({alo}, {ahi}) is empty")));
    }
    let mut rng = rng::stream(seed, "field", 0);
    let scale = area.max_side();
    let bumps = (0..params.n_bumps)
        .map(|_| Bump {
            center: Point::new(rng.random::<f64>() * area.width, rng.random::<f64>() * area.height),
            amplitude: alo + (ahi - alo) * rng.random::<f64>(),
            width: scale * (wlo + (whi - wlo) * rng.random::<f64>()),
        })
        .collect();
    Ok(ScalarField { bumps, offset: params.offset })
}

/// `X_i = field(position_i)` for every sensor.
pub fn sample_field(field: &ScalarField, topo: &NetworkTopology) -> DVector<f64> {
    DVector::from_iterator(topo.node_count(), topo.positions().iter().map(|&p| field.eval(p)))
}

/// Field values at the centers of a `rows × cols` raster over `area`, as CSV
/// with header `x,y,value`.
pub fn grid_csv(field: &ScalarField, area: &Area, rows: usize, cols: usize) -> String {
    let mut out = String::from("x,y,value\n");
    for r in 0..rows {
        for c in 0..cols {
            let p = Point::new((c as f64 + 0.5) * area.width / cols as f64, (r as f64 + 0.5) * area.height / rows as f64);
            let _ = writeln!(out, "{},{},{}", p.x, p.y, field.eval(p));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::make_basis;
    use crate::topology::deploy_grid;

    #[test]
    fn no_bumps_is_constant() {
        let area = Area::square(100.0).unwrap();
        let params = FieldParams { n_bumps: 0, ..FieldParams::default() };
        let f = make_field(3, &params, &area).unwrap();
        assert_eq!(f.eval(Point::new(1.0, 99.0)), 25.0);
        let topo = deploy_grid(16, area).unwrap();
        assert!(sample_field(&f, &topo).iter().all(|&v| v == 25.0));
    }

    #[test]
    fn single_bump_peak() {
        let f = ScalarField {
            bumps: vec![Bump { center: Point::new(50.0, 50.0), amplitude: 10.0, width: 5.0 }],
            offset: 0.0,
        };
        assert_eq!(f.eval(Point::new(50.0, 50.0)), 10.0);
        assert!(f.eval(Point::new(0.0, 0.0)) < 1e-20);
    }

    #[test]
    fn single_node_sample() {
        let topo = deploy_grid(1, Area::square(10.0).unwrap()).unwrap();
        let f = make_field(1, &FieldParams::default(), &topo.area()).unwrap();
        let x = sample_field(&f, &topo);
        assert_eq!(x.len(), 1);
        assert_eq!(x[0], f.eval(Point::new(5.0, 5.0)));
    }

    #[test]
    fn sampling_matches_pointwise_evaluation() {
        let area = Area::square(64.0).unwrap();
        let topo = deploy_grid(64, area).unwrap();
        let f = make_field(9, &FieldParams::default(), &area).unwrap();
        let x = sample_field(&f, &topo);
        for r in 0..8 {
            for c in 0..8 {
                let p = Point::new(c as f64 * 8.0 + 4.0, r as f64 * 8.0 + 4.0);
                let by_hand = f.bumps.iter().map(|b| {
                    let d2 = (p.x - b.center.x).powi(2) + (p.y - b.center.y).powi(2);
                    b.amplitude * (-d2 / (2.0 * b.width.powi(2))).exp()
                });
                assert!((x[r * 8 + c] - (25.0 + by_hand.sum::<f64>())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn default_field_is_dct_compressible() {
        let area = Area::square(100.0).unwrap();
        let topo = deploy_grid(1024, area).unwrap();
        let dct = make_basis("dct", 1024, None).unwrap();
        for seed in 0..10 {
            let x = sample_field(&make_field(seed, &FieldParams::default(), &area).unwrap(), &topo);
            let s = dct.numerical_sparsity(&x).unwrap();
            assert!(s < 10.0, "seed {seed}: s = {s}");
        }
    }

    #[test]
    fn deterministic_and_validated() {
        let area = Area::square(100.0).unwrap();
        assert_eq!(make_field(4, &FieldParams::default(), &area), make_field(4, &FieldParams::default(), &area));
        assert_ne!(make_field(4, &FieldParams::default(), &area), make_field(5, &FieldParams::default(), &area));
        let bad = FieldParams { width: (0.0, 0.1), ..FieldParams::default() };
        assert!(make_field(4, &bad, &area).is_err());
    }

    #[test]
    fn raster_dump() {
        let f = ScalarField::constant(1.5);
        let csv = grid_csv(&f, &Area::square(2.0).unwrap(), 2, 2);
        assert_eq!(csv, "x,y,value\n0.5,0.5,1.5\n1.5,0.5,1.5\n0.5,1.5,1.5\n1.5,1.5,1.5\n");
    }
}
