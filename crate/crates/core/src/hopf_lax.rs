//! Dirichlet problems via the Hopf-Lax formula
//! `w(x) = min_y d_K(x, y) + g(y)` over boundary samples `y`,
//! with `K` a globally defined extension of `H` off `Ω`.
//!
//! The minimum is one reverse multi-source search seeded with the offsets
//! `g(y)`. The global graph covers `Ω` enlarged by a margin; given the
//! compatibility condition, `w` on `Ω̄` does not depend on that margin (every
//! path to a boundary sample meets `∂Ω` first), but the compatibility check
//! itself does.

use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::group::{GroupSpec, Point};
use crate::hamiltonian::Hamiltonian;
use crate::lattice::Lattice;
use crate::metric::{layer_spacing, search, two_source_search, Direction, HorizontalGraph, Metric, SearchOptions, Stencil};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Tabulated,
}

/// Boundary values `g(y)` at sample points of `∂Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDatum {
    samples: Vec<(Point, f64)>,
    provenance: Provenance,
}

impl BoundaryDatum {
    pub fn new(samples: Vec<(Point, f64)>, provenance: Provenance) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::input("boundary datum has no samples"));
        }
        if let Some((p, v)) = samples.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::input(format!("boundary value {v} at {:?} is not finite", p.0)));
        }
        Ok(BoundaryDatum { samples, provenance })
    }

    /// Samples `f` at the lattice points of `∂Ω` for this spacing.
    pub fn from_fn(g: &GroupSpec, omega: &DomainSpec, spacing: f64, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let samples = boundary_points(g, omega, spacing)?
            .into_iter()
            .map(|p| {
                let v = f(&p);
                (Point(p), v)
            })
            .collect();
        Self::new(samples, Provenance::Analytic)
    }

    pub fn samples(&self) -> &[(Point, f64)] {
        &self.samples
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same points, values shifted by `c`.
    pub fn offset(&self, c: f64) -> BoundaryDatum {
        self.map_values(|_, v| v + c)
    }

    pub fn map_values(&self, f: impl Fn(&[f64], f64) -> f64) -> BoundaryDatum {
        BoundaryDatum {
            samples: self.samples.iter().map(|(p, v)| (p.clone(), f(p, *v))).collect(),
            provenance: self.provenance,
        }
    }

    /// Graph nodes carrying the samples, with their values.
    pub fn on_graph(&self, graph: &HorizontalGraph) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::with_capacity(self.samples.len());
        let mut seen = std::collections::HashSet::new();
        for (p, v) in &self.samples {
            let node = graph.node_near(p)?;
            if !seen.insert(node) {
                return Err(Error::input(format!("two boundary samples snap to the node at {:?}", graph.point(node))));
            }
            out.push((node, *v));
        }
        Ok(out)
    }
}

/// Lattice points of `Ω̄` with an axis neighbour outside `Ω̄`.
pub fn boundary_points(g: &GroupSpec, omega: &DomainSpec, spacing: f64) -> Result<Vec<Vec<f64>>> {
    omega.validate(g)?;
    let sp = layer_spacing(g, spacing);
    let lattice = Lattice::for_box(omega.bounds(), &sp)?;
    let n = g.dim();
    let mut idx = vec![0i64; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut out = Vec::new();
    for node in 0..lattice.len() {
        lattice.coords_into(node, &mut idx);
        lattice.point_into(node, &mut p);
        if !omega.contains(&p) {
            continue;
        }
        let on_boundary = (0..n).any(|c| {
            [-1i64, 1].iter().any(|&s| {
                q.copy_from_slice(&p);
                q[c] = (idx[c] + s) as f64 * sp[c];
                !omega.contains(&q)
            })
        });
        if on_boundary {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// `alpha² · diam(Ω)`, the margin beyond which exterior paths cannot help.
pub fn default_margin(omega: &DomainSpec, alpha: f64) -> f64 {
    alpha * alpha * omega.box_diameter()
}

/// The graph of the enlarged box used for the extension `K`.
pub fn global_graph(
    g: &GroupSpec,
    omega: &DomainSpec,
    spacing: f64,
    stencil: Stencil,
    margin: f64,
) -> Result<HorizontalGraph> {
    HorizontalGraph::with_stencil(g, &omega.enlarged(g, margin)?, spacing, stencil)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BccReport {
    pub passed: bool,
    /// `(x, y)` minimizing `d_K(x, y) - (g(x) - g(y))`.
    pub worst_pair: Option<(Vec<f64>, Vec<f64>)>,
    /// That minimum; negative values are violations.
    pub margin: f64,
    pub tol: f64,
}

/// Checks `g(x) - g(y) ≤ d_K(x, y) + tol` on all ordered pairs of distinct
/// samples, `tol = 2 · cell cost`. One forward search keeping the two best
/// distinct-source labels per node gives every pair at once.
pub fn check_bcc(graph: &HorizontalGraph, k: &Hamiltonian, g: &BoundaryDatum) -> Result<BccReport> {
    let nodes = g.on_graph(graph)?;
    let tol = 2.0 * graph.cell_cost(k.alpha());
    if nodes.len() < 2 {
        return Ok(BccReport { passed: true, worst_pair: None, margin: f64::INFINITY, tol });
    }
    let seeds: Vec<(usize, f64)> = nodes.iter().map(|&(n, v)| (n, -v)).collect();
    let labels = two_source_search(graph, &Metric::Optical(k.clone()), &seeds)?;
    let mut worst = (f64::INFINITY, usize::MAX, usize::MAX);
    for &(y, gy) in &nodes {
        let best = labels[y].best.iter().find(|(_, s)| *s != y && *s != usize::MAX);
        if let Some(&(val, x)) = best {
            let m = val + gy;
            if m < worst.0 || (m == worst.0 && (x, y) < (worst.1, worst.2)) {
                worst = (m, x, y);
            }
        }
    }
    let worst_pair = (worst.1 != usize::MAX).then(|| (graph.point(worst.1), graph.point(worst.2)));
    Ok(BccReport { passed: worst.0 >= -tol, worst_pair, margin: worst.0, tol })
}

/// The Hopf-Lax solution.
#[derive(Debug, Clone)]
pub struct SolutionField {
    /// `w` on the lattice of `Ω`'s box: `NaN` outside `Ω̄`, `∞` where unreached.
    pub u: ScalarField,
    /// `w` on every node of the global graph.
    pub global: ScalarField,
    pub boundary: BoundaryDatum,
    pub hamiltonian_hash: String,
    pub bcc: BccReport,
    /// Set when the solve proceeded despite a failed compatibility check.
    pub overridden: bool,
    /// `max |w(y) - g(y)|` over the samples.
    pub attainment_error: f64,
}

impl SolutionField {
    pub fn status(&self) -> &'static str {
        if self.bcc.passed {
            "ok"
        } else {
            "compatibility violated: w may not attain g"
        }
    }
}

/// Solves on `graph` (built over `Ω` enlarged) with extension `k`.
/// Fails when the compatibility check fails unless `override_bcc` is set.
pub fn solve_dirichlet(
    graph: &HorizontalGraph,
    k: &Hamiltonian,
    omega: &DomainSpec,
    g: &BoundaryDatum,
    override_bcc: bool,
) -> Result<SolutionField> {
    let bcc = check_bcc(graph, k, g)?;
    if !bcc.passed && !override_bcc {
        return Err(Error::input(format!(
            "boundary data violate the compatibility condition (margin {:.3e} below -{:.3e})",
            bcc.margin, bcc.tol
        )));
    }
    let seeds = g.on_graph(graph)?;
    let w = solve_values(graph, k, &seeds)?;
    let global = ScalarField::new(graph.lattice().clone(), w)?;
    let u = restrict(graph, &global, omega)?;
    let attainment_error = seeds.iter().map(|&(n, v)| (global.node_value(n) - v).abs()).fold(0.0, f64::max);
    Ok(SolutionField {
        u,
        global,
        boundary: g.clone(),
        hamiltonian_hash: k.fingerprint(),
        overridden: !bcc.passed,
        bcc,
        attainment_error,
    })
}

/// `min_y offset_y + d_K(x, y)` on every node: one reverse search.
pub fn solve_values(graph: &HorizontalGraph, k: &Hamiltonian, seeds: &[(usize, f64)]) -> Result<Vec<f64>> {
    let opts = SearchOptions { direction: Direction::Reverse, ..Default::default() };
    Ok(search(graph, &Metric::Optical(k.clone()), seeds, &opts)?.values().to_vec())
}

fn restrict(graph: &HorizontalGraph, global: &ScalarField, omega: &DomainSpec) -> Result<ScalarField> {
    let lat = Lattice::for_box(omega.bounds(), graph.lattice().spacing())?;
    let n = lat.dim();
    let mut idx = vec![0i64; n];
    let mut p = vec![0.0; n];
    let values = (0..lat.len())
        .map(|node| {
            lat.point_into(node, &mut p);
            if !omega.contains(&p) {
                return f64::NAN;
            }
            lat.coords_into(node, &mut idx);
            graph.lattice().index_of(&idx).map_or(f64::NAN, |gn| global.node_value(gn))
        })
        .collect();
    ScalarField::new(lat, values)
}

/// The interpolable field handed to the verifier.
pub fn restrict_to_monge_data(solution: &SolutionField) -> ScalarField {
    solution.u.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::ZSet;
    use crate::metric::{shortest_distances, SearchOptions};

    fn square() -> DomainSpec {
        DomainSpec::new(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    fn setup(h: f64, margin: f64) -> (GroupSpec, HorizontalGraph, Hamiltonian) {
        let g = GroupSpec::abelian(2).unwrap();
        let graph = global_graph(&g, &square(), h, Stencil::new(2, 16).unwrap(), margin).unwrap();
        let k = Hamiltonian::uniform(2.0, ZSet::Ball(1.0)).unwrap().extend(&square());
        (g, graph, k)
    }

    #[test]
    fn boundary_points_of_a_square() {
        let g = GroupSpec::abelian(2).unwrap();
        let pts = boundary_points(&g, &square(), 0.25).unwrap();
        assert_eq!(pts.len(), 16);
        assert!(pts.iter().all(|p| p.iter().any(|&x| x == 0.0 || x == 1.0)));
    }

    #[test]
    fn constant_data_pass_with_min_pair_distance() {
        let (g, graph, k) = setup(0.125, 0.25);
        let datum = BoundaryDatum::from_fn(&g, &square(), 0.125, |_| 0.7).unwrap();
        let r = check_bcc(&graph, &k, &datum).unwrap();
        assert!(r.passed);
        assert!((r.margin - 0.125).abs() < 1e-12);
    }

    #[test]
    fn steep_data_fail() {
        let (g, graph, k) = setup(0.125, 0.25);
        let datum = BoundaryDatum::from_fn(&g, &square(), 0.125, |y| 10.0 * y[0]).unwrap();
        let r = check_bcc(&graph, &k, &datum).unwrap();
        assert!(!r.passed);
        // the worst pair gains 9 per unit of horizontal separation
        assert!((r.margin + 9.0).abs() < 1e-9, "margin {}", r.margin);
        assert!(solve_dirichlet(&graph, &k, &square(), &datum, false).is_err());
        let forced = solve_dirichlet(&graph, &k, &square(), &datum, true).unwrap();
        assert!(forced.overridden);
        assert_ne!(forced.status(), "ok");
    }

    #[test]
    fn cone_data_pass() {
        let (g, graph, k) = setup(0.125, 0.25);
        let y0 = graph.node_near(&[0.5, -0.25]).unwrap();
        let cone = shortest_distances(&graph, &[y0], &Metric::Optical(k.clone())).unwrap();
        let samples = boundary_points(&g, &square(), 0.125)
            .unwrap()
            .into_iter()
            .map(|p| {
                let v = cone.value(graph.node_near(&p).unwrap());
                (Point(p), v)
            })
            .collect();
        let datum = BoundaryDatum::new(samples, Provenance::Tabulated).unwrap();
        assert!(check_bcc(&graph, &k, &datum).unwrap().margin >= -1e-12);
    }

    #[test]
    fn distance_to_boundary() {
        let (g, graph, k) = setup(1.0 / 16.0, 0.25);
        let datum = BoundaryDatum::from_fn(&g, &square(), 1.0 / 16.0, |_| 0.0).unwrap();
        let sol = solve_dirichlet(&graph, &k, &square(), &datum, false).unwrap();
        assert!(!sol.overridden);
        assert_eq!(sol.status(), "ok");
        let w = restrict_to_monge_data(&sol);
        assert!((w.interpolate(&[0.5, 0.5]).unwrap() - 0.5).abs() <= 2.0 / 16.0);
        assert!(sol.attainment_error == 0.0);
        for node in 0..w.lattice().len() {
            let p = w.lattice().point_of(node);
            let exact = p.iter().map(|&x| x.min(1.0 - x)).fold(f64::INFINITY, f64::min);
            assert!((w.node_value(node) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn offset_equivariance_and_monotonicity() {
        let (g, graph, k) = setup(0.125, 0.25);
        let d1 = BoundaryDatum::from_fn(&g, &square(), 0.125, |y| 0.2 * y[0] - 0.1 * y[1]).unwrap();
        let d2 = d1.map_values(|y, v| v + 0.05 * (1.0 + y[1]));
        let s1 = solve_dirichlet(&graph, &k, &square(), &d1, false).unwrap();
        let s2 = solve_dirichlet(&graph, &k, &square(), &d2, false).unwrap();
        let s3 = solve_dirichlet(&graph, &k, &square(), &d1.offset(0.5), false).unwrap();
        for i in 0..s1.u.values().len() {
            assert!(s1.u.node_value(i) <= s2.u.node_value(i));
            assert!((s3.u.node_value(i) - s1.u.node_value(i) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn multi_source_equals_pairwise_minimum() {
        let (g, graph, k) = setup(0.125, 0.125);
        let datum = BoundaryDatum::from_fn(&g, &square(), 0.125, |y| 0.3 * (y[0] * 5.0).sin() + 0.1 * y[1]).unwrap();
        let sol = solve_dirichlet(&graph, &k, &square(), &datum, false).unwrap();
        let seeds = datum.on_graph(&graph).unwrap();
        let metric = Metric::Optical(k.clone());
        let opts = SearchOptions { direction: Direction::Reverse, ..Default::default() };
        let mut best = vec![f64::INFINITY; graph.len()];
        for &s in &seeds {
            let f = search(&graph, &metric, &[s], &opts).unwrap();
            for (b, &v) in best.iter_mut().zip(f.values()) {
                *b = b.min(v);
            }
        }
        assert_eq!(sol.global.values(), &best[..]);
    }

    #[test]
    fn margin_does_not_change_w() {
        let g = GroupSpec::abelian(2).unwrap();
        let k = Hamiltonian::uniform(2.0, ZSet::Ball(1.0)).unwrap().extend(&square());
        let datum = BoundaryDatum::from_fn(&g, &square(), 0.125, |y| 0.4 * y[0] * y[1]).unwrap();
        let s = Stencil::new(2, 16).unwrap();
        let a = global_graph(&g, &square(), 0.125, s.clone(), 0.25).unwrap();
        let b = global_graph(&g, &square(), 0.125, s, 0.5).unwrap();
        let wa = solve_dirichlet(&a, &k, &square(), &datum, false).unwrap();
        let wb = solve_dirichlet(&b, &k, &square(), &datum, false).unwrap();
        assert_eq!(wa.u.values(), wb.u.values());
    }

    #[test]
    fn duplicate_samples_rejected() {
        let (_, graph, _) = setup(0.25, 0.0);
        let d = BoundaryDatum::new(
            vec![(Point::new([0.0, 0.0]), 0.0), (Point::new([0.01, 0.0]), 1.0)],
            Provenance::Tabulated,
        )
        .unwrap();
        assert!(d.on_graph(&graph).is_err());
    }
}
