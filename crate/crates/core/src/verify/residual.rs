//! Monge residuals: discrete estimates of
//! `liminf_{x→x0} (u(x) - u(x0) + d_σ*(x0, x)) / d_CC(x0, x)`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::group::Point;
use crate::hamiltonian::Hamiltonian;
use crate::metric::{bounded_search, Direction, HorizontalGraph, Metric};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Subsolution,
    Supersolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualClass {
    SolutionOk,
    /// Estimate above `tau`: only the subsolution side holds.
    SubsolutionOk,
    /// Estimate below `-tau`: only the supersolution side holds.
    SupersolutionOk,
    Violated { side: Side, margin: f64 },
}

/// What a caller requires of a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    Solution,
    Subsolution,
    Supersolution,
}

#[derive(Debug, Clone)]
pub struct ResidualOptions {
    /// Radius schedule, any order; the estimate uses the smallest.
    pub radii: Vec<f64>,
    /// Defaults to `10 · cell cost / r_min`.
    pub tau: Option<f64>,
}

impl ResidualOptions {
    /// `r, r/2, r/4, r/8`.
    pub fn dyadic(r: f64) -> Self {
        ResidualOptions { radii: vec![r, r / 2.0, r / 4.0, r / 8.0], tau: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MongeRecord {
    pub probe: Vec<f64>,
    pub radii: Vec<f64>,
    /// Minimum of the quotient over nodes with `d_CC ∈ (r/2, r]`, per radius.
    pub infima: Vec<f64>,
    pub estimate: f64,
    pub tau: f64,
    pub class: ResidualClass,
}

impl MongeRecord {
    /// `class` if it meets `req`, otherwise the violated side and by how much
    /// the estimate overshoots `tau`.
    pub fn verdict(&self, req: Requirement) -> ResidualClass {
        let sub_fail = self.estimate < -self.tau;
        let super_fail = self.estimate > self.tau;
        match req {
            Requirement::Subsolution | Requirement::Solution if sub_fail => {
                ResidualClass::Violated { side: Side::Subsolution, margin: -self.tau - self.estimate }
            }
            Requirement::Supersolution | Requirement::Solution if super_fail => {
                ResidualClass::Violated { side: Side::Supersolution, margin: self.estimate - self.tau }
            }
            _ => self.class,
        }
    }

    pub fn satisfies(&self, req: Requirement) -> bool {
        !matches!(self.verdict(req), ResidualClass::Violated { .. })
    }
}

fn classify(estimate: f64, tau: f64) -> ResidualClass {
    if estimate.abs() <= tau {
        ResidualClass::SolutionOk
    } else if estimate > tau {
        ResidualClass::SubsolutionOk
    } else {
        ResidualClass::SupersolutionOk
    }
}

/// Residual record at `x0`. Distances are taken from the node `n0` nearest
/// `x0`; the ball around `n0` is then carried onto `x0` by the left
/// translation `x0 · n0⁻¹`, and `u` is sampled at the translated points. This
/// keeps `u` and the distances centred at the same point, so an off-lattice
/// probe costs interpolation error only, not the full offset `|x0 - n0|`.
///
/// Errors with `Domain` when some node of the largest CC ball lacks part of
/// its stencil (the ball reaches the edge of the graph).
pub fn monge_residual(
    u: &(impl Field + ?Sized),
    h: &Hamiltonian,
    graph: &HorizontalGraph,
    x0: &Point,
    opts: &ResidualOptions,
) -> Result<MongeRecord> {
    let mut radii = opts.radii.clone();
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::input("radius schedule must be nonempty and positive"));
    }
    radii.sort_by(|a, b| b.total_cmp(a));
    let r_max = radii[0];
    let r_min = *radii.last().expect("nonempty");
    let tau = opts.tau.unwrap_or(10.0 * graph.cell_cost(h.alpha()) / r_min);

    let n0 = graph.node_near(x0)?;
    let cc = bounded_search(graph, &Metric::Cc, n0, r_max, Direction::Forward)?;
    if let Some(&(bad, _)) = cc.iter().find(|&&(n, _)| !graph.has_full_star(n)) {
        return Err(Error::domain(format!(
            "CC ball of radius {r_max} around {:?} reaches {:?} at the edge of the graph",
            x0.0,
            graph.point(bad)
        )));
    }
    let reach = h.alpha() * r_max * (1.0 + 1e-9);
    let sigma: HashMap<usize, f64> =
        bounded_search(graph, &Metric::Optical(h.clone()), n0, reach, Direction::Forward)?.into_iter().collect();
    let g = graph.group();
    let shift = g.mul(x0, &g.inv(&Point::new(graph.point(n0)))?)?;
    let u0 = u.value_at(x0)?;
    let mut infima = vec![f64::INFINITY; radii.len()];
    for &(node, dcc) in &cc {
        if dcc == 0.0 {
            continue;
        }
        let Some(ds) = sigma.get(&node) else {
            return Err(Error::domain(format!("optical distance missing at {:?}", graph.point(node))));
        };
        let x = g.mul(&shift, &Point::new(graph.point(node)))?;
        let q = (u.value_at(&x)? - u0 + ds) / dcc;
        for (i, &r) in radii.iter().enumerate() {
            if dcc > r / 2.0 && dcc <= r && q < infima[i] {
                infima[i] = q;
            }
        }
    }
    if let Some(i) = infima.iter().position(|v| !v.is_finite()) {
        return Err(Error::input(format!("no node with CC distance in ({}, {}]", radii[i] / 2.0, radii[i])));
    }
    let estimate = *infima.last().expect("nonempty");
    Ok(MongeRecord { probe: x0.0.clone(), radii, infima, estimate, tau, class: classify(estimate, tau) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MongeResidualReport {
    pub records: Vec<MongeRecord>,
    pub worst_abs_estimate: f64,
}

impl MongeResidualReport {
    pub fn all(&self, req: Requirement) -> bool {
        self.records.iter().all(|r| r.satisfies(req))
    }
}

/// Records at every probe, evaluated in parallel.
pub fn monge_report(
    u: &(impl Field + Sync + ?Sized),
    h: &Hamiltonian,
    graph: &HorizontalGraph,
    probes: &[Point],
    opts: &ResidualOptions,
) -> Result<MongeResidualReport> {
    let records: Vec<MongeRecord> =
        probes.par_iter().map(|x0| monge_residual(u, h, graph, x0, opts)).collect::<Result<_>>()?;
    let worst_abs_estimate = records.iter().map(|r| r.estimate.abs()).fold(0.0, f64::max);
    Ok(MongeResidualReport { records, worst_abs_estimate })
}
