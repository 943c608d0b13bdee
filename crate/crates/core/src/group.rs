//! Carnot group algebra in exponential coordinates of the first kind.
//!
//! Points are stored as flat coordinate vectors partitioned by layer,
//! `y = (y^(1), ..., y^(k))`. Three concrete laws are provided:
//!
//! * `Abelian(n)`: plain vector addition, step 1.
//! * `Heisenberg1`: `(a1,a2,a3)·(b1,b2,b3) = (a1+b1, a2+b2, a3+b3 + a2 b1 - a1 b2)`,
//!   whose left-invariant frame is `X1 = ∂x1 + x2 ∂t`, `X2 = ∂x2 - x1 ∂t`.
//! * `GenericStep2`: the truncated Baker-Campbell-Hausdorff law
//!   `(x·y)^(2)_l = x^(2)_l + y^(2)_l + ½ Σ_ij c^l_ij x_i y_j`.
//!
//! Heisenberg1 is deliberately not routed through the generic step-2 code so
//! the two can be cross-checked (`c^1_12 = -2`, `c^1_21 = 2` reproduces it).

use std::ops::Deref;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the group in exponential coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Point(coords.into())
    }

    pub fn origin(n: usize) -> Self {
        Point(vec![0.0; n])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// Coefficients of a horizontal vector along `X_1, ..., X_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HorizontalVector(pub Vec<f64>);

impl HorizontalVector {
    pub fn new(comps: impl Into<Vec<f64>>) -> Self {
        HorizontalVector(comps.into())
    }

    pub fn norm(&self) -> f64 {
        euclidean(&self.0)
    }
}

impl Deref for HorizontalVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupKind {
    Abelian,
    Heisenberg1,
    /// Structure constants `c[l][i][j]`, flattened as `l*m*m + i*m + j`.
    GenericStep2 { constants: Vec<f64> },
}

/// A Carnot group: dimension, rank, stratification and group law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GroupDescriptor", into = "GroupDescriptor")]
pub struct GroupSpec {
    n: usize,
    m: usize,
    layer_widths: Vec<usize>,
    kind: GroupKind,
}

impl GroupSpec {
    pub fn abelian(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("abelian group needs n >= 1"));
        }
        Ok(GroupSpec { n, m: n, layer_widths: vec![n], kind: GroupKind::Abelian })
    }

    pub fn heisenberg1() -> Self {
        GroupSpec { n: 3, m: 2, layer_widths: vec![2, 1], kind: GroupKind::Heisenberg1 }
    }

    /// Step-2 group with rank `m` and second layer of width `table.len()`.
    /// `table[l][i][j]` must be antisymmetric in `(i, j)`.
    pub fn generic_step2(m: usize, table: &[Vec<Vec<f64>>]) -> Result<Self> {
        let width2 = table.len();
        if m == 0 || width2 == 0 {
            return Err(Error::input("step-2 group needs m >= 1 and a nonempty second layer"));
        }
        let mut constants = Vec::with_capacity(width2 * m * m);
        for (l, slab) in table.iter().enumerate() {
            if slab.len() != m || slab.iter().any(|row| row.len() != m) {
                return Err(Error::input(format!("structure constants for layer-2 index {l} must be {m}x{m}")));
            }
            for i in 0..m {
                for j in 0..m {
                    if slab[i][j] != -slab[j][i] {
                        return Err(Error::input(format!(
                            "structure constants not antisymmetric at ({l},{i},{j})"
                        )));
                    }
                    constants.push(slab[i][j]);
                }
            }
        }
        if constants.iter().all(|&c| c == 0.0) {
            return Err(Error::input("all structure constants vanish: the second layer is not generated"));
        }
        Ok(GroupSpec { n: m + width2, m, layer_widths: vec![m, width2], kind: GroupKind::GenericStep2 { constants } })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn step(&self) -> usize {
        self.layer_widths.len()
    }

    pub fn layer_widths(&self) -> &[usize] {
        &self.layer_widths
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    /// 1-based layer index of every coordinate.
    pub fn coordinate_layers(&self) -> Vec<usize> {
        self.layer_widths.iter().enumerate().flat_map(|(j, &w)| std::iter::repeat(j + 1).take(w)).collect()
    }

    pub fn check_point(&self, a: &[f64]) -> Result<()> {
        if a.len() != self.n {
            return Err(Error::input(format!("point has {} coordinates, group dimension is {}", a.len(), self.n)));
        }
        Ok(())
    }

    pub fn check_horizontal(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.m {
            return Err(Error::input(format!("horizontal vector has {} components, rank is {}", v.len(), self.m)));
        }
        Ok(())
    }

    /// `out = a·b` on raw slices; all three must have length `n`.
    pub fn mul_into(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        debug_assert!(a.len() == self.n && b.len() == self.n && out.len() == self.n);
        match &self.kind {
            GroupKind::Abelian => {
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    *o = x + y;
                }
            }
            GroupKind::Heisenberg1 => {
                out[0] = a[0] + b[0];
                out[1] = a[1] + b[1];
                out[2] = a[2] + b[2] + a[1] * b[0] - a[0] * b[1];
            }
            GroupKind::GenericStep2 { constants } => {
                let m = self.m;
                for i in 0..m {
                    out[i] = a[i] + b[i];
                }
                for l in 0..self.n - m {
                    let slab = &constants[l * m * m..(l + 1) * m * m];
                    let mut bracket = 0.0;
                    for i in 0..m {
                        for j in 0..m {
                            bracket += slab[i * m + j] * a[i] * b[j];
                        }
                    }
                    out[m + l] = a[m + l] + b[m + l] + 0.5 * bracket;
                }
            }
        }
    }

    pub fn mul(&self, a: &Point, b: &Point) -> Result<Point> {
        self.check_point(a)?;
        self.check_point(b)?;
        let mut out = vec![0.0; self.n];
        self.mul_into(a, b, &mut out);
        Ok(Point(out))
    }

    pub fn inv(&self, a: &Point) -> Result<Point> {
        self.check_point(a)?;
        Ok(Point(a.iter().map(|&x| -x).collect()))
    }

    /// Intrinsic dilation: layer `j` is scaled by `lambda^j`.
    pub fn dilate(&self, lambda: f64, a: &Point) -> Result<Point> {
        self.check_point(a)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::input(format!("dilation factor must be positive, got {lambda}")));
        }
        Ok(Point(a.iter().zip(self.coordinate_layers()).map(|(&x, j)| x * lambda.powi(j as i32)).collect()))
    }

    /// Korányi-type homogeneous norm `(Σ_j |y^(j)|^(2k!/j))^(1/(2k!))`.
    pub fn koranyi_norm(&self, a: &Point) -> Result<f64> {
        self.check_point(a)?;
        Ok(self.koranyi_norm_raw(a))
    }

    pub(crate) fn koranyi_norm_raw(&self, a: &[f64]) -> f64 {
        let k = self.step();
        let big = 2.0 * (1..=k).product::<usize>() as f64;
        let mut offset = 0;
        let mut layer_norms = Vec::with_capacity(k);
        for &w in &self.layer_widths {
            layer_norms.push(euclidean(&a[offset..offset + w]));
            offset += w;
        }
        // Homogeneous rescaling keeps the large powers in range.
        let scale = layer_norms
            .iter()
            .enumerate()
            .map(|(j, &r)| r.powf(1.0 / (j + 1) as f64))
            .fold(0.0_f64, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let sum: f64 = layer_norms
            .iter()
            .enumerate()
            .map(|(j, &r)| {
                let jj = (j + 1) as f64;
                (r / scale.powf(jj)).powf(big / jj)
            })
            .sum();
        scale * sum.powf(1.0 / big)
    }

    /// Korányi distance `ρ(a, b) = ‖a⁻¹·b‖`.
    pub fn koranyi_dist(&self, a: &Point, b: &Point) -> Result<f64> {
        let rel = self.mul(&self.inv(a)?, b)?;
        Ok(self.koranyi_norm_raw(&rel))
    }

    /// `m × n` matrix whose row `i` holds the coordinates of `X_i(x)`.
    pub fn frame_matrix(&self, x: &Point) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let (m, n) = (self.m, self.n);
        let mut c = DMatrix::zeros(m, n);
        for i in 0..m {
            c[(i, i)] = 1.0;
        }
        match &self.kind {
            GroupKind::Abelian => {}
            GroupKind::Heisenberg1 => {
                c[(0, 2)] = x[1];
                c[(1, 2)] = -x[0];
            }
            GroupKind::GenericStep2 { constants } => {
                // d/ds (x · s e_i)^(2)_l at s = 0 is ½ Σ_a c^l_{a i} x_a.
                for l in 0..n - m {
                    let slab = &constants[l * m * m..(l + 1) * m * m];
                    for i in 0..m {
                        c[(i, m + l)] = 0.5 * (0..m).map(|a| slab[a * m + i] * x[a]).sum::<f64>();
                    }
                }
            }
        }
        Ok(c)
    }

    /// The group element `exp(Σ v_i X_i) = (v, 0, ..., 0)`.
    pub fn exp_horizontal(&self, v: &[f64]) -> Result<Point> {
        self.check_horizontal(v)?;
        let mut out = vec![0.0; self.n];
        out[..self.m].copy_from_slice(v);
        Ok(Point(out))
    }

    /// Right translation by a horizontal displacement: `x · (v, 0)`, which is the
    /// time-one flow of the left-invariant field `Σ v_i X_i` started at `x`.
    pub fn flow_horizontal_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        match &self.kind {
            GroupKind::Abelian => {
                for (o, (a, b)) in out.iter_mut().zip(x.iter().zip(v)) {
                    *o = a + b;
                }
            }
            GroupKind::Heisenberg1 => {
                out[0] = x[0] + v[0];
                out[1] = x[1] + v[1];
                out[2] = x[2] + x[1] * v[0] - x[0] * v[1];
            }
            GroupKind::GenericStep2 { constants } => {
                let m = self.m;
                for i in 0..m {
                    out[i] = x[i] + v[i];
                }
                for l in 0..self.n - m {
                    let slab = &constants[l * m * m..(l + 1) * m * m];
                    let mut bracket = 0.0;
                    for i in 0..m {
                        for j in 0..m {
                            bracket += slab[i * m + j] * x[i] * v[j];
                        }
                    }
                    out[m + l] = x[m + l] + 0.5 * bracket;
                }
            }
        }
    }
}

pub(crate) fn euclidean(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Config-file form of a [`GroupSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDescriptor {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure_constants: Option<Vec<Vec<Vec<f64>>>>,
}

impl TryFrom<GroupDescriptor> for GroupSpec {
    type Error = Error;

    fn try_from(d: GroupDescriptor) -> Result<Self> {
        let g = match d.kind.as_str() {
            "abelian" => GroupSpec::abelian(d.n.ok_or_else(|| Error::input("abelian group needs `n`"))?)?,
            "heisenberg1" => GroupSpec::heisenberg1(),
            "generic_step2" => {
                let m = d.m.ok_or_else(|| Error::input("generic_step2 needs `m`"))?;
                let table = d
                    .structure_constants
                    .as_ref()
                    .ok_or_else(|| Error::input("generic_step2 needs `structure_constants`"))?;
                GroupSpec::generic_step2(m, table)?
            }
            other => return Err(Error::input(format!("unknown group kind `{other}`"))),
        };
        let mismatch = |what: &str, want: usize, got: usize| {
            Error::input(format!("group `{}`: declared {what} = {got} but the group has {want}", d.kind, want = want))
        };
        if let Some(n) = d.n {
            if n != g.n {
                return Err(mismatch("n", g.n, n));
            }
        }
        if let Some(m) = d.m {
            if m != g.m {
                return Err(mismatch("m", g.m, m));
            }
        }
        if let Some(k) = d.step {
            if k != g.step() {
                return Err(mismatch("step", g.step(), k));
            }
        }
        Ok(g)
    }
}

impl From<GroupSpec> for GroupDescriptor {
    fn from(g: GroupSpec) -> Self {
        let (kind, structure_constants) = match &g.kind {
            GroupKind::Abelian => ("abelian", None),
            GroupKind::Heisenberg1 => ("heisenberg1", None),
            GroupKind::GenericStep2 { constants } => {
                let m = g.m;
                let table = (0..g.n - m)
                    .map(|l| (0..m).map(|i| (0..m).map(|j| constants[l * m * m + i * m + j]).collect()).collect())
                    .collect();
                ("generic_step2", Some(table))
            }
        };
        GroupDescriptor { kind: kind.into(), n: Some(g.n), m: Some(g.m), step: Some(g.step()), structure_constants }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn heis() -> GroupSpec {
        GroupSpec::heisenberg1()
    }

    fn heis_generic() -> GroupSpec {
        GroupSpec::generic_step2(2, &[vec![vec![0.0, -2.0], vec![2.0, 0.0]]]).unwrap()
    }

    /// Integrates γ' = Σ b_i X_i(γ) from `a` over [0, 1] with classical RK4,
    /// using only the frame matrix. Independent of the closed-form group law.
    fn flow_by_frame(g: &GroupSpec, a: &[f64], b: &[f64], steps: usize) -> Vec<f64> {
        let field = |y: &[f64]| -> Vec<f64> {
            let c = g.frame_matrix(&Point::new(y.to_vec())).unwrap();
            (0..g.dim()).map(|col| (0..g.rank()).map(|i| b[i] * c[(i, col)]).sum()).collect()
        };
        let dt = 1.0 / steps as f64;
        let mut y = a.to_vec();
        for _ in 0..steps {
            let k1 = field(&y);
            let y2: Vec<f64> = y.iter().zip(&k1).map(|(y, k)| y + 0.5 * dt * k).collect();
            let k2 = field(&y2);
            let y3: Vec<f64> = y.iter().zip(&k2).map(|(y, k)| y + 0.5 * dt * k).collect();
            let k3 = field(&y3);
            let y4: Vec<f64> = y.iter().zip(&k3).map(|(y, k)| y + dt * k).collect();
            let k4 = field(&y4);
            for i in 0..y.len() {
                y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        y
    }

    #[test]
    fn abelian_mul() {
        let g = GroupSpec::abelian(2).unwrap();
        assert_eq!(g.mul(&Point::new([1.0, 2.0]), &Point::new([3.0, 4.0])).unwrap(), Point::new([4.0, 6.0]));
    }

    #[test]
    fn heisenberg_mul_matches_frame_flow() {
        let g = heis();
        let a = [1.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        let closed = g.mul(&Point::new(a), &Point::new(b)).unwrap();
        assert_eq!(closed, Point::new([1.0, 1.0, -1.0]));
        let integrated = flow_by_frame(&g, &a, &b[..2], 200);
        for (x, y) in closed.iter().zip(&integrated) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        // a generic start point and control
        let a = [0.3, -1.2, 0.7];
        let v = [0.8, 0.45];
        let closed = g.mul(&Point::new(a), &g.exp_horizontal(&v).unwrap()).unwrap();
        let integrated = flow_by_frame(&g, &a, &v, 200);
        for (x, y) in closed.iter().zip(&integrated) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn inverse_and_identity() {
        let g = heis();
        let x = Point::new([0.3, -1.2, 0.7]);
        let e = g.mul(&x, &g.inv(&x).unwrap()).unwrap();
        assert!(e.iter().all(|&c| c.abs() <= 1e-14), "{e:?}");
        assert_eq!(g.inv(&Point::new([1.0, 1.0, -1.0])).unwrap(), Point::new([-1.0, -1.0, 1.0]));
        assert_eq!(g.inv(&Point::origin(3)).unwrap(), Point::origin(3));
        let a = Point::new([2.0, -3.0, 5.0]);
        assert_eq!(g.mul(&a, &g.inv(&a).unwrap()).unwrap(), Point::origin(3));
    }

    #[test]
    fn dimension_mismatch_is_an_input_error() {
        let g = heis();
        assert!(matches!(g.mul(&Point::new([1.0, 2.0]), &Point::origin(3)), Err(Error::Input(_))));
        assert!(matches!(g.inv(&Point::origin(2)), Err(Error::Input(_))));
        assert!(matches!(g.koranyi_norm(&Point::origin(4)), Err(Error::Input(_))));
    }

    #[test]
    fn dilation() {
        let g = heis();
        assert_eq!(g.dilate(2.0, &Point::new([1.0, 1.0, 1.0])).unwrap(), Point::new([2.0, 2.0, 4.0]));
        let a = Point::new([1.0, 0.0, 3.0]);
        assert_eq!(g.dilate(1.0, &a).unwrap(), a);
        let lhs = g.dilate(1.5, &g.dilate(2.0, &a).unwrap()).unwrap();
        let rhs = g.dilate(3.0, &a).unwrap();
        for (x, y) in lhs.iter().zip(rhs.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        assert!(matches!(g.dilate(0.0, &a), Err(Error::Input(_))));
        assert!(matches!(g.dilate(-1.0, &a), Err(Error::Input(_))));
    }

    #[test]
    fn koranyi_values() {
        let g = heis();
        assert_eq!(g.koranyi_norm(&Point::new([1.0, 0.0, 0.0])).unwrap(), 1.0);
        assert_abs_diff_eq!(g.koranyi_norm(&Point::new([0.0, 0.0, 1.0])).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(g.koranyi_norm(&Point::origin(3)).unwrap(), 0.0);
        let ab = GroupSpec::abelian(2).unwrap();
        assert_abs_diff_eq!(ab.koranyi_norm(&Point::new([3.0, 4.0])).unwrap(), 5.0, epsilon = 1e-14);

        let b = Point::new([1.0, 1.0, -1.0]);
        assert_abs_diff_eq!(g.koranyi_dist(&Point::origin(3), &b).unwrap(), 5f64.powf(0.25), epsilon = 1e-14);
        assert_eq!(g.koranyi_dist(&b, &b).unwrap(), 0.0);
    }

    #[test]
    fn koranyi_left_invariance_spot_check() {
        let g = heis();
        let x = Point::new([1.0, 0.0, 0.0]);
        let a = Point::origin(3);
        let b = Point::new([0.0, 1.0, 0.0]);
        let lhs = g.koranyi_dist(&g.mul(&x, &a).unwrap(), &g.mul(&x, &b).unwrap()).unwrap();
        assert_abs_diff_eq!(lhs, g.koranyi_dist(&a, &b).unwrap(), epsilon = 1e-14);
        assert_abs_diff_eq!(lhs, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn frame_matrices() {
        let g = heis();
        let c0 = g.frame_matrix(&Point::origin(3)).unwrap();
        assert_eq!(c0, DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]));
        let c = g.frame_matrix(&Point::new([1.0, 2.0, 0.0])).unwrap();
        assert_eq!(c, DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, -1.0]));
        let ab = GroupSpec::abelian(2).unwrap();
        assert_eq!(ab.frame_matrix(&Point::new([5.0, -3.0])).unwrap(), DMatrix::identity(2, 2));
        assert_eq!(heis_generic().frame_matrix(&Point::new([1.0, 2.0, 0.0])).unwrap(), c);
    }

    #[test]
    fn generic_step2_validation() {
        assert!(GroupSpec::generic_step2(2, &[vec![vec![0.0, 1.0], vec![1.0, 0.0]]]).is_err());
        assert!(GroupSpec::generic_step2(2, &[vec![vec![0.0, 0.0], vec![0.0, 0.0]]]).is_err());
        assert!(GroupSpec::generic_step2(2, &[vec![vec![0.0, 1.0]]]).is_err());
        let g = heis_generic();
        assert_eq!((g.dim(), g.rank(), g.step()), (3, 2, 2));
    }

    #[test]
    fn descriptor_round_trip() {
        for g in [GroupSpec::abelian(3).unwrap(), heis(), heis_generic()] {
            let s = serde_json::to_string(&g).unwrap();
            let back: GroupSpec = serde_json::from_str(&s).unwrap();
            assert_eq!(g, back);
        }
        let bad: std::result::Result<GroupSpec, _> = serde_json::from_str(r#"{"kind":"heisenberg1","n":4}"#);
        assert!(bad.is_err());
    }

    fn coord() -> impl Strategy<Value = f64> {
        -3.0..3.0f64
    }

    fn heis_point() -> impl Strategy<Value = Point> {
        (coord(), coord(), coord()).prop_map(|(a, b, c)| Point::new([a, b, c]))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn heisenberg_associative(a in heis_point(), b in heis_point(), c in heis_point()) {
            let g = heis();
            let l = g.mul(&g.mul(&a, &b).unwrap(), &c).unwrap();
            let r = g.mul(&a, &g.mul(&b, &c).unwrap()).unwrap();
            for (x, y) in l.iter().zip(r.iter()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn generic_step2_reproduces_heisenberg(a in heis_point(), b in heis_point()) {
            let l = heis().mul(&a, &b).unwrap();
            let r = heis_generic().mul(&a, &b).unwrap();
            for (x, y) in l.iter().zip(r.iter()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn abelian_inverse_exact(a in proptest::collection::vec(coord(), 4)) {
            let g = GroupSpec::abelian(4).unwrap();
            let a = Point(a);
            prop_assert_eq!(g.mul(&a, &g.inv(&a).unwrap()).unwrap(), Point::origin(4));
        }

        #[test]
        fn heisenberg_inverse(a in heis_point()) {
            let g = heis();
            let e = g.mul(&a, &g.inv(&a).unwrap()).unwrap();
            prop_assert!(e.iter().all(|c| c.abs() <= 1e-14));
        }

        #[test]
        fn koranyi_homogeneous(a in heis_point(), which in 0usize..3) {
            let lambda = [0.5, 2.0, 10.0][which];
            let g = heis();
            let n = g.koranyi_norm(&a).unwrap();
            let nd = g.koranyi_norm(&g.dilate(lambda, &a).unwrap()).unwrap();
            prop_assert!((nd - lambda * n).abs() <= 1e-12 * (lambda * n).max(1e-300));
        }

        #[test]
        fn koranyi_left_invariant_and_homogeneous(x in heis_point(), a in heis_point(), b in heis_point()) {
            let g = heis();
            let d = g.koranyi_dist(&a, &b).unwrap();
            let dl = g.koranyi_dist(&g.mul(&x, &a).unwrap(), &g.mul(&x, &b).unwrap()).unwrap();
            prop_assert!((d - dl).abs() <= 1e-10 * d.max(1.0));
            let dd = g.koranyi_dist(&g.dilate(2.0, &a).unwrap(), &g.dilate(2.0, &b).unwrap()).unwrap();
            prop_assert!((dd - 2.0 * d).abs() <= 1e-10 * d.max(1.0));
        }
    }
}
