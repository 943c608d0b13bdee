//! Scalar fields on lattices and horizontal finite differences.

use crate::error::{Error, Result};
use crate::group::{GroupSpec, HorizontalVector, Point};
use crate::lattice::Lattice;

/// Anything that can be sampled at a point.
pub trait Field {
    fn value_at(&self, p: &[f64]) -> Result<f64>;
}

/// Wraps a closure as a [`Field`].
pub struct FnField<F>(pub F);

impl<F: Fn(&[f64]) -> f64> Field for FnField<F> {
    fn value_at(&self, p: &[f64]) -> Result<f64> {
        Ok((self.0)(p))
    }
}

/// Lattice-sampled function with multilinear interpolation between nodes.
/// `NaN` marks nodes where the field is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    lattice: Lattice,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::input(format!(
                "field has {} values for a lattice of {} nodes",
                values.len(),
                lattice.len()
            )));
        }
        Ok(ScalarField { lattice, values })
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut p = vec![0.0; lattice.dim()];
        let values = (0..lattice.len())
            .map(|node| {
                lattice.point_into(node, &mut p);
                f(&p)
            })
            .collect();
        ScalarField { lattice, values }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node_value(&self, node: usize) -> f64 {
        self.values[node]
    }

    /// Multilinear interpolation; corners with zero weight are not read.
    pub fn interpolate(&self, p: &[f64]) -> Result<f64> {
        let n = self.lattice.dim();
        if p.len() != n {
            return Err(Error::input(format!("point has {} coordinates, field lattice has {n}", p.len())));
        }
        let mut base = vec![0i64; n];
        let mut frac = vec![0.0; n];
        if !self.lattice.locate(p, &mut base, &mut frac) {
            return Err(Error::domain(format!("{p:?} is outside the field's lattice")));
        }
        let mut corner = vec![0i64; n];
        let mut acc = 0.0;
        for mask in 0..(1usize << n) {
            let mut w = 1.0;
            for c in 0..n {
                if mask >> c & 1 == 1 {
                    w *= frac[c];
                    corner[c] = base[c] + 1;
                } else {
                    w *= 1.0 - frac[c];
                    corner[c] = base[c];
                }
            }
            if w == 0.0 {
                continue;
            }
            let node = self.lattice.index_of(&corner).expect("corner inside by construction");
            let v = self.values[node];
            if v.is_nan() {
                return Err(Error::domain(format!("field undefined near {p:?}")));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

impl Field for ScalarField {
    fn value_at(&self, p: &[f64]) -> Result<f64> {
        self.interpolate(p)
    }
}

/// Central differences along the horizontal frame:
/// component `i` is `(u(x·(h e_i, 0)) - u(x·(-h e_i, 0))) / 2h`.
pub fn horizontal_gradient_fd(g: &GroupSpec, u: &(impl Field + ?Sized), x: &Point, h: f64) -> Result<HorizontalVector> {
    g.check_point(x)?;
    if !(h > 0.0) {
        return Err(Error::input(format!("finite-difference step must be positive, got {h}")));
    }
    let m = g.rank();
    let mut step = vec![0.0; m];
    let mut fwd = vec![0.0; g.dim()];
    let mut bwd = vec![0.0; g.dim()];
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        step.iter_mut().for_each(|s| *s = 0.0);
        step[i] = h;
        g.flow_horizontal_into(x, &step, &mut fwd);
        step[i] = -h;
        g.flow_horizontal_into(x, &step, &mut bwd);
        out.push((u.value_at(&fwd)? - u.value_at(&bwd)?) / (2.0 * h));
    }
    Ok(HorizontalVector(out))
}
