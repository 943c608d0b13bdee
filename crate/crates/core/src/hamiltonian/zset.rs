//! Closed convex sets containing the origin in their interior, described by
//! their Minkowski gauge and support function.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::euclidean;

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    /// `{p : pᵀ A p ≤ 1}`
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    inradius: f64,
    circumradius: f64,
}

impl Ellipsoid {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if m == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(Error::input("ellipsoid matrix must be square and nonempty"));
        }
        let matrix = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
        if (0..m).any(|i| (0..m).any(|j| matrix[(i, j)] != matrix[(j, i)])) {
            return Err(Error::input("ellipsoid matrix must be symmetric"));
        }
        let chol = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::input("ellipsoid matrix must be positive definite"))?;
        let inverse = chol.inverse();
        let eig = matrix.clone().symmetric_eigen();
        let lmax = eig.eigenvalues.max();
        let lmin = eig.eigenvalues.min();
        Ok(Ellipsoid { matrix, inverse, inradius: 1.0 / lmax.sqrt(), circumradius: 1.0 / lmin.sqrt() })
    }

    fn quad(a: &DMatrix<f64>, v: &[f64]) -> f64 {
        let m = v.len();
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += v[i] * a[(i, j)] * v[j];
            }
        }
        s.max(0.0)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Convex hull of finitely many vertices, with its facets `⟨a_k, p⟩ ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    facets: Vec<Vec<f64>>,
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let m = vertices.first().map(Vec::len).unwrap_or(0);
        if m == 0 || vertices.iter().any(|v| v.len() != m) {
            return Err(Error::input("polytope vertices must be nonempty and of equal dimension"));
        }
        if vertices.len() < m + 1 {
            return Err(Error::input("polytope needs at least m+1 vertices"));
        }
        let facets = enumerate_facets(&vertices)?;
        Ok(Polytope { vertices, facets })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Vec<f64>] {
        &self.facets
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Supporting hyperplanes through every affinely independent m-subset of vertices.
/// Fails unless the origin is strictly interior to the hull.
fn enumerate_facets(vertices: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = vertices[0].len();
    let scale = vertices.iter().map(|v| euclidean(v)).fold(0.0, f64::max);
    let eps = 1e-10 * scale.max(1.0);
    let mut facets: Vec<Vec<f64>> = Vec::new();
    let mut origin_problem = false;
    combinations(vertices.len(), m, |subset| {
        // Null vector (n, c) of the rows [v_j, -1]; padded to a square system.
        let mut mat = DMatrix::zeros(m + 1, m + 1);
        for (r, &j) in subset.iter().enumerate() {
            for c in 0..m {
                mat[(r, c)] = vertices[j][c];
            }
            mat[(r, m)] = -1.0;
        }
        let svd = mat.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let sv = &svd.singular_values;
        let mut order: Vec<usize> = (0..=m).collect();
        order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
        // affinely dependent subsets have a 2-dimensional null space
        if m >= 1 && sv[order[1]] <= 1e-9 * sv[order[m]].max(1e-300) {
            return;
        }
        let null = vt.row(order[0]).transpose();
        let mut normal: Vec<f64> = (0..m).map(|c| null[c]).collect();
        let mut offset = null[m];
        let sides: Vec<f64> = vertices.iter().map(|v| dot(&normal, v) - offset).collect();
        let nn = euclidean(&normal);
        if nn == 0.0 {
            return;
        }
        let tol = 1e-9 * nn * scale.max(1.0);
        let above = sides.iter().any(|&s| s > tol);
        let below = sides.iter().any(|&s| s < -tol);
        if above && below {
            return;
        }
        if above {
            normal.iter_mut().for_each(|x| *x = -*x);
            offset = -offset;
        }
        if offset <= eps * nn {
            origin_problem = true;
            return;
        }
        let a: Vec<f64> = normal.iter().map(|x| x / offset).collect();
        if !facets.iter().any(|f| f.iter().zip(&a).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs()))) {
            facets.push(a);
        }
    });
    if origin_problem {
        return Err(Error::input("polytope must contain the origin in its interior"));
    }
    if facets.len() < m + 1 {
        return Err(Error::input("polytope is degenerate (not full-dimensional)"));
    }
    Ok(facets)
}

/// Zero-sublevel set `Z(x)` of a Hamiltonian at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ZSetDescriptor", into = "ZSetDescriptor")]
pub enum ZSet {
    Ball(f64),
    Ellipsoid(Ellipsoid),
    Polytope(Polytope),
    Scaled(Box<ZSet>, f64),
}

impl ZSet {
    pub fn ball(r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::input(format!("ball radius must be positive, got {r}")));
        }
        Ok(ZSet::Ball(r))
    }

    pub fn ellipsoid(rows: &[Vec<f64>]) -> Result<Self> {
        Ellipsoid::new(rows).map(ZSet::Ellipsoid)
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        Polytope::new(vertices).map(ZSet::Polytope)
    }

    pub fn scaled(base: ZSet, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::input(format!("scale factor must be positive, got {factor}")));
        }
        Ok(ZSet::Scaled(Box::new(base), factor))
    }

    /// Ambient dimension, or `None` for balls (which fit any dimension).
    pub fn dim(&self) -> Option<usize> {
        match self {
            ZSet::Ball(_) => None,
            ZSet::Ellipsoid(e) => Some(e.matrix.nrows()),
            ZSet::Polytope(p) => Some(p.vertices[0].len()),
            ZSet::Scaled(b, _) => b.dim(),
        }
    }

    /// Minkowski gauge `inf {λ > 0 : p ∈ λ Z}`.
    pub fn gauge(&self, p: &[f64]) -> f64 {
        match self {
            ZSet::Ball(r) => euclidean(p) / r,
            ZSet::Ellipsoid(e) => Ellipsoid::quad(&e.matrix, p).sqrt(),
            ZSet::Polytope(poly) => poly.facets.iter().map(|a| dot(a, p)).fold(0.0, f64::max),
            ZSet::Scaled(b, f) => b.gauge(p) / f,
        }
    }

    /// Support function `sup {⟨ξ, v⟩ : ξ ∈ Z}`.
    pub fn support(&self, v: &[f64]) -> f64 {
        match self {
            ZSet::Ball(r) => r * euclidean(v),
            ZSet::Ellipsoid(e) => Ellipsoid::quad(&e.inverse, v).sqrt(),
            ZSet::Polytope(poly) => poly.vertices.iter().map(|x| dot(x, v)).fold(f64::NEG_INFINITY, f64::max),
            ZSet::Scaled(b, f) => f * b.support(v),
        }
    }

    /// `σ*(v) = sup {⟨-ξ, v⟩ : ξ ∈ Z}`, i.e. the support function at `-v`.
    pub fn sigma_star(&self, v: &[f64]) -> f64 {
        match self {
            // symmetric sets: skip the negation
            ZSet::Ball(r) => r * euclidean(v),
            ZSet::Ellipsoid(e) => Ellipsoid::quad(&e.inverse, v).sqrt(),
            ZSet::Polytope(poly) => poly.vertices.iter().map(|x| -dot(x, v)).fold(f64::NEG_INFINITY, f64::max),
            ZSet::Scaled(b, f) => f * b.sigma_star(v),
        }
    }

    /// Exact membership using the defining inequalities of the representation.
    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            ZSet::Ball(r) => p.iter().map(|x| x * x).sum::<f64>() <= r * r,
            ZSet::Ellipsoid(e) => Ellipsoid::quad(&e.matrix, p) <= 1.0,
            ZSet::Polytope(poly) => poly.facets.iter().all(|a| dot(a, p) <= 1.0),
            ZSet::Scaled(b, f) => {
                let q: Vec<f64> = p.iter().map(|x| x / f).collect();
                b.contains(&q)
            }
        }
    }

    /// Radius of the largest centered ball inside the set.
    pub fn inradius(&self) -> f64 {
        match self {
            ZSet::Ball(r) => *r,
            ZSet::Ellipsoid(e) => e.inradius,
            ZSet::Polytope(poly) => poly.facets.iter().map(|a| 1.0 / euclidean(a)).fold(f64::INFINITY, f64::min),
            ZSet::Scaled(b, f) => f * b.inradius(),
        }
    }

    /// Radius of the smallest centered ball containing the set.
    pub fn circumradius(&self) -> f64 {
        match self {
            ZSet::Ball(r) => *r,
            ZSet::Ellipsoid(e) => e.circumradius,
            ZSet::Polytope(poly) => poly.vertices.iter().map(|v| euclidean(v)).fold(0.0, f64::max),
            ZSet::Scaled(b, f) => f * b.circumradius(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ZSetDescriptor {
    Ball { r: f64 },
    Ellipsoid { matrix: Vec<Vec<f64>> },
    Polytope { vertices: Vec<Vec<f64>> },
    Scaled { base: Box<ZSetDescriptor>, factor: f64 },
}

impl TryFrom<ZSetDescriptor> for ZSet {
    type Error = Error;

    fn try_from(d: ZSetDescriptor) -> Result<Self> {
        match d {
            ZSetDescriptor::Ball { r } => ZSet::ball(r),
            ZSetDescriptor::Ellipsoid { matrix } => ZSet::ellipsoid(&matrix),
            ZSetDescriptor::Polytope { vertices } => ZSet::polytope(vertices),
            ZSetDescriptor::Scaled { base, factor } => ZSet::scaled(ZSet::try_from(*base)?, factor),
        }
    }
}

impl From<ZSet> for ZSetDescriptor {
    fn from(z: ZSet) -> Self {
        match z {
            ZSet::Ball(r) => ZSetDescriptor::Ball { r },
            ZSet::Ellipsoid(e) => {
                let m = e.matrix.nrows();
                ZSetDescriptor::Ellipsoid { matrix: (0..m).map(|i| (0..m).map(|j| e.matrix[(i, j)]).collect()).collect() }
            }
            ZSet::Polytope(p) => ZSetDescriptor::Polytope { vertices: p.vertices },
            ZSet::Scaled(b, factor) => ZSetDescriptor::Scaled { base: Box::new((*b).into()), factor },
        }
    }
}
