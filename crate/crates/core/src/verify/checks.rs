//! Pointwise subsolution test, Lipschitz bound by the optical length,
//! comparison and stability harnesses.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::residual::{monge_report, MongeRecord, Requirement, ResidualOptions};
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::field::{horizontal_gradient_fd, Field, ScalarField};
use crate::group::{GroupSpec, Point};
use crate::hamiltonian::Hamiltonian;
use crate::hopf_lax::{boundary_points, solve_dirichlet, BoundaryDatum};
use crate::metric::{search, HorizontalGraph, Metric, SearchOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AeReport {
    pub tau_fd: f64,
    pub h_fd: f64,
    /// `H(x, X u(x))` per probe; `None` where the stencil left the field.
    pub values: Vec<Option<f64>>,
    pub evaluated: usize,
    pub skipped: usize,
    /// Fraction of evaluated probes with value `≤ tau_fd`.
    pub passed_fraction: f64,
    pub worst: Option<(Vec<f64>, f64)>,
}

impl AeReport {
    pub fn probe_ok(&self, i: usize) -> Option<bool> {
        self.values[i].map(|v| v <= self.tau_fd)
    }
}

/// Evaluates `H(x, X u(x))` with central horizontal differences of step `h_fd`.
pub fn ae_subsolution_check(
    u: &(impl Field + Sync + ?Sized),
    h: &Hamiltonian,
    g: &GroupSpec,
    probes: &[Point],
    h_fd: f64,
    tau_fd: f64,
) -> Result<AeReport> {
    let values: Vec<Option<f64>> = probes
        .par_iter()
        .map(|x| match horizontal_gradient_fd(g, u, x, h_fd) {
            Ok(grad) => match h.eval(x, &grad) {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                Ok(_) | Err(Error::Domain(_)) => Ok(None),
                Err(e) => Err(e),
            },
            Err(Error::Domain(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let evaluated = values.iter().flatten().count();
    let passed = values.iter().flatten().filter(|&&v| v <= tau_fd).count();
    let worst = probes
        .iter()
        .zip(&values)
        .filter_map(|(p, v)| v.map(|v| (p.0.clone(), v)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    Ok(AeReport {
        tau_fd,
        h_fd,
        evaluated,
        skipped: probes.len() - evaluated,
        passed_fraction: if evaluated == 0 { 0.0 } else { passed as f64 / evaluated as f64 },
        values,
        worst,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub pairs: usize,
    pub tol: f64,
    pub violations: usize,
    /// `min d_σ*(x, y) - (u(x) - u(y))` over the pairs.
    pub margin: f64,
    pub worst_pair: Option<(Vec<f64>, Vec<f64>)>,
    pub passed: bool,
}

/// Checks `u(x) - u(y) ≤ d_σ*(x, y) + tol` on each ordered pair, with
/// `tol = 2 · cell cost` unless given.
pub fn lipschitz_vs_optical(
    u: &(impl Field + Sync + ?Sized),
    graph: &HorizontalGraph,
    h: &Hamiltonian,
    pairs: &[(Point, Point)],
    tol: Option<f64>,
) -> Result<LipschitzReport> {
    let tol = tol.unwrap_or(2.0 * graph.cell_cost(h.alpha()));
    let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut nodes = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        let (a, b) = (graph.node_near(x)?, graph.node_near(y)?);
        by_source.entry(a).or_default().push(b);
        nodes.push((a, b));
    }
    let metric = Metric::Optical(h.clone());
    let dists: BTreeMap<usize, Vec<(usize, f64)>> = by_source
        .into_par_iter()
        .map(|(a, targets)| {
            let opts = SearchOptions { targets: targets.clone(), ..Default::default() };
            let f = search(graph, &metric, &[(a, 0.0)], &opts)?;
            Ok((a, targets.iter().map(|&b| (b, f.value(b))).collect()))
        })
        .collect::<Result<_>>()?;
    let mut margin = f64::INFINITY;
    let mut worst_pair = None;
    let mut violations = 0;
    for &(a, b) in &nodes {
        let d = dists[&a].iter().find(|e| e.0 == b).expect("searched").1;
        let (pa, pb) = (graph.point(a), graph.point(b));
        let m = d - (u.value_at(&pa)? - u.value_at(&pb)?);
        if m < -tol {
            violations += 1;
        }
        if m < margin {
            margin = m;
            worst_pair = Some((pa, pb));
        }
    }
    Ok(LipschitzReport { pairs: pairs.len(), tol, violations, margin, worst_pair, passed: violations == 0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub tol: f64,
    pub precondition_met: bool,
    /// `max (u - v)` over boundary nodes.
    pub boundary_excess: f64,
    /// `max (u - v)` over interior nodes; absent when the precondition fails.
    pub interior_max: Option<f64>,
    pub worst_point: Option<Vec<f64>>,
    pub passed: bool,
    pub verdict: String,
}

/// Checks `u ≤ v` in `Ω` given `u ≤ v + tol` on `∂Ω`, `tol = 3 · cell cost`
/// unless given. Both fields must share one lattice.
pub fn comparison_harness(
    h: &Hamiltonian,
    graph: &HorizontalGraph,
    omega: &DomainSpec,
    u_sub: &ScalarField,
    v_super: &ScalarField,
    tol: Option<f64>,
) -> Result<ComparisonReport> {
    if u_sub.lattice() != v_super.lattice() {
        return Err(Error::input("sub- and supersolution live on different lattices"));
    }
    let tol = tol.unwrap_or(3.0 * graph.cell_cost(h.alpha()));
    let lat = u_sub.lattice();
    let boundary: std::collections::HashSet<usize> = boundary_points(graph.group(), omega, graph.spacing())?
        .iter()
        .filter_map(|p| lat.nearest(p))
        .collect();
    let diff = |n: usize| u_sub.node_value(n) - v_super.node_value(n);
    let boundary_excess = boundary.iter().map(|&n| diff(n)).filter(|d| !d.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    if boundary_excess > tol {
        return Ok(ComparisonReport {
            tol,
            precondition_met: false,
            boundary_excess,
            interior_max: None,
            worst_point: None,
            passed: false,
            verdict: "precondition unmet".into(),
        });
    }
    let mut worst = (f64::NEG_INFINITY, None);
    let mut p = vec![0.0; lat.dim()];
    for n in 0..lat.len() {
        lat.point_into(n, &mut p);
        if boundary.contains(&n) || !omega.contains(&p) {
            continue;
        }
        let d = diff(n);
        if d.is_nan() {
            continue;
        }
        if d > worst.0 {
            worst = (d, Some(p.clone()));
        }
    }
    let passed = worst.0 <= tol;
    Ok(ComparisonReport {
        tol,
        precondition_met: true,
        boundary_excess,
        interior_max: Some(worst.0),
        worst_point: worst.1,
        passed,
        verdict: if passed { "pass" } else { "fail" }.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub alpha: f64,
    /// `sup |d_n - d_∞|` over the pairs, per member of the sequence.
    pub pair_deviation: Vec<f64>,
    /// `sup |u_n - u_∞|` over the nodes of `Ω̄`, per member.
    pub solution_deviation: Vec<f64>,
    pub pair_monotone: bool,
    pub solution_monotone: bool,
    pub residual: Vec<MongeRecord>,
    pub residual_ok: bool,
}

fn pair_distances(graph: &HorizontalGraph, k: &Hamiltonian, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    let metric = Metric::Optical(k.clone());
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let opts = SearchOptions { targets: vec![b], ..Default::default() };
            Ok(search(graph, &metric, &[(a, 0.0)], &opts)?.value(b))
        })
        .collect()
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + 1e-12)
}

/// Distances and Hopf-Lax solutions for `h_seq` against `h_inf`, each
/// extended off `omega` to the ball of radius `alpha`, plus Monge residuals of
/// the limit solution at `probes`.
#[allow(clippy::too_many_arguments)]
pub fn stability_harness(
    h_seq: &[Hamiltonian],
    h_inf: &Hamiltonian,
    graph: &HorizontalGraph,
    omega: &DomainSpec,
    g: &BoundaryDatum,
    pairs: &[(Point, Point)],
    probes: &[Point],
    opts: &ResidualOptions,
) -> Result<StabilityReport> {
    let alpha = h_inf.alpha();
    if let Some(bad) = h_seq.iter().find(|h| h.alpha() != alpha) {
        return Err(Error::input(format!("sequence member has alpha {} but the limit has {alpha}", bad.alpha())));
    }
    let nodes: Vec<(usize, usize)> =
        pairs.iter().map(|(x, y)| Ok((graph.node_near(x)?, graph.node_near(y)?))).collect::<Result<_>>()?;
    let k_inf = h_inf.extend(omega);
    let d_inf = pair_distances(graph, &k_inf, &nodes)?;
    let u_inf = solve_dirichlet(graph, &k_inf, omega, g, false)?;
    let mut pair_deviation = Vec::with_capacity(h_seq.len());
    let mut solution_deviation = Vec::with_capacity(h_seq.len());
    for h in h_seq {
        let k = h.extend(omega);
        let d = pair_distances(graph, &k, &nodes)?;
        pair_deviation.push(d.iter().zip(&d_inf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let u = solve_dirichlet(graph, &k, omega, g, false)?;
        let dev = u
            .u
            .values()
            .iter()
            .zip(u_inf.u.values())
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        solution_deviation.push(dev);
    }
    let report = monge_report(&u_inf.u, &k_inf, graph, probes, opts)?;
    Ok(StabilityReport {
        alpha,
        pair_monotone: non_increasing(&pair_deviation),
        solution_monotone: non_increasing(&solution_deviation),
        pair_deviation,
        solution_deviation,
        residual_ok: report.all(Requirement::Solution),
        residual: report.records,
    })
}
