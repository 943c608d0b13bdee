//! Horizontal graphs over a lattice.
//!
//! Nodes are the lattice points of the domain box at per-layer spacing `h^j`.
//! The edge of move `k` from `x` ends at the snapped endpoint of the horizontal
//! flow `x·(h a_k, 0)`. For the abelian and Heisenberg laws the endpoint is a
//! lattice point already (the vertical index changes by `j a - i b`), so edges
//! are computed on the fly and nothing per-edge is stored. Other step-2 laws
//! get explicit forward and reverse adjacency.
//!
//! Edge costs are not stored either: they depend on the metric and are
//! evaluated during the search (see [`Metric`]).

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::stencil::Stencil;
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::group::{GroupKind, GroupSpec};
use crate::hamiltonian::Hamiltonian;
use crate::lattice::Lattice;

pub(crate) const NONE: u32 = u32::MAX;

/// Largest `|½ c^l_ij|` summed over `j`, bounding how fast a horizontal curve
/// moves the second layer per unit length and unit first-layer reach.
pub(crate) fn bracket_bound(g: &GroupSpec) -> f64 {
    match g.kind() {
        GroupKind::Abelian => 0.0,
        GroupKind::Heisenberg1 => 1.0,
        GroupKind::GenericStep2 { constants } => {
            let m = g.rank();
            constants
                .chunks(m * m)
                .map(|slab| {
                    let fro: f64 = slab.iter().map(|c| c * c).sum::<f64>().sqrt();
                    0.5 * fro * (m as f64).sqrt()
                })
                .fold(0.0, f64::max)
        }
    }
}

/// Which distance a search computes.
#[derive(Debug, Clone)]
pub enum Metric {
    /// Carnot-Carathéodory length: edge cost `h|a|`.
    Cc,
    /// Optical length: edge cost `σ*(midpoint, a) h`.
    Optical(Hamiltonian),
    /// Korányi distance, evaluated in closed form (no graph paths).
    Koranyi,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Cc => "cc",
            Metric::Optical(_) => "optical",
            Metric::Koranyi => "koranyi",
        }
    }
}

#[derive(Debug, Clone)]
struct Adjacency {
    /// `targets[node * S + k]`, `NONE` where the edge is dropped.
    targets: Vec<u32>,
    rev_start: Vec<u32>,
    rev: Vec<(u32, u16)>,
}

#[derive(Debug, Clone)]
pub struct HorizontalGraph {
    group: GroupSpec,
    domain: DomainSpec,
    spacing: f64,
    lattice: Lattice,
    stencil: Stencil,
    active: Vec<bool>,
    /// Per-node bitmask of valid out-edges; only kept when an interior
    /// predicate can cut edges whose endpoints are both inside.
    edge_mask: Option<Vec<u64>>,
    adjacency: Option<Adjacency>,
}

/// Counts describing a built graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub active: usize,
    pub edges: usize,
    /// Active nodes not reachable from the first active node.
    pub unreached: usize,
}

/// Per-layer spacings `h^j`.
pub fn layer_spacing(g: &GroupSpec, h: f64) -> Vec<f64> {
    g.coordinate_layers().into_iter().map(|j| h.powi(j as i32)).collect()
}

impl HorizontalGraph {
    pub fn build(g: &GroupSpec, dom: &DomainSpec, spacing: f64, directions: usize) -> Result<Self> {
        Self::with_stencil(g, dom, spacing, Stencil::new(g.rank(), directions)?)
    }

    pub fn with_stencil(g: &GroupSpec, dom: &DomainSpec, spacing: f64, stencil: Stencil) -> Result<Self> {
        dom.validate(g)?;
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::input(format!("spacing must be positive, got {spacing}")));
        }
        if stencil.rank() != g.rank() {
            return Err(Error::input("stencil rank differs from the group rank"));
        }
        let lattice = Lattice::for_box(dom.bounds(), &layer_spacing(g, spacing))?;
        let mut p = vec![0.0; g.dim()];
        let active: Vec<bool> = (0..lattice.len())
            .map(|node| {
                lattice.point_into(node, &mut p);
                dom.contains(&p)
            })
            .collect();
        if !active.iter().any(|&a| a) {
            return Err(Error::input("domain contains no lattice node at this spacing"));
        }
        let mut graph = HorizontalGraph {
            group: g.clone(),
            domain: dom.clone(),
            spacing,
            lattice,
            stencil,
            active,
            edge_mask: None,
            adjacency: None,
        };
        if !graph.is_exact() {
            graph.adjacency = Some(graph.build_adjacency()?);
        } else if dom.interior().is_some() {
            graph.edge_mask = Some(graph.build_edge_mask()?);
        }
        Ok(graph)
    }

    /// Whether edge endpoints land on lattice points without snapping.
    pub fn is_exact(&self) -> bool {
        matches!(self.group.kind(), GroupKind::Abelian | GroupKind::Heisenberg1)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.active[node]
    }

    pub fn active_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i)
    }

    /// Nearest active node to `p`; `Domain` error if it is not inside.
    pub fn node_near(&self, p: &[f64]) -> Result<usize> {
        self.group.check_point(p)?;
        match self.lattice.nearest(p) {
            Some(n) if self.active[n] => Ok(n),
            _ => Err(Error::domain(format!("{p:?} does not snap to a node of the domain"))),
        }
    }

    pub fn point(&self, node: usize) -> Vec<f64> {
        self.lattice.point_of(node)
    }

    /// `spacing · alpha`, the cost scale of one cell; `alpha = 1` for CC lengths.
    pub fn cell_cost(&self, alpha: f64) -> f64 {
        self.spacing * alpha
    }

    /// Endpoint of the unsnapped flow of move `k` (scaled by `frac`) from `x`.
    pub(crate) fn flow_point(&self, x: &[f64], k: usize, frac: f64, out: &mut [f64]) {
        let mut v = [0.0f64; 16];
        let m = self.group.rank();
        let s = frac * self.spacing;
        let a = self.stencil.displacement(k);
        if m <= v.len() {
            for i in 0..m {
                v[i] = a[i] as f64 * s;
            }
            self.group.flow_horizontal_into(x, &v[..m], out);
        } else {
            let v: Vec<f64> = a.iter().map(|&x| x as f64 * s).collect();
            self.group.flow_horizontal_into(x, &v, out);
        }
    }

    /// Integer endpoint of move `k` (or its reverse when `sign = -1`) for exact groups.
    #[inline]
    fn exact_step(&self, from: &[i64], k: usize, sign: i64, out: &mut [i64]) {
        let a = self.stencil.displacement(k);
        match self.group.kind() {
            GroupKind::Abelian => {
                for i in 0..from.len() {
                    out[i] = from[i] + sign * a[i];
                }
            }
            GroupKind::Heisenberg1 => {
                out[0] = from[0] + sign * a[0];
                out[1] = from[1] + sign * a[1];
                out[2] = from[2] + sign * (from[1] * a[0] - from[0] * a[1]);
            }
            GroupKind::GenericStep2 { .. } => unreachable!("explicit adjacency handles other laws"),
        }
    }

    fn midpoint_inside(&self, from: &[f64], k: usize, buf: &mut [f64]) -> bool {
        self.flow_point(from, k, 0.5, buf);
        self.domain.contains(buf)
    }

    fn build_edge_mask(&self) -> Result<Vec<u64>> {
        let s = self.stencil.len();
        if s > 64 {
            return Err(Error::input("stencils above 64 moves are unsupported on predicate domains"));
        }
        let n = self.group.dim();
        let (mut c, mut t) = (vec![0i64; n], vec![0i64; n]);
        let (mut p, mut mid) = (vec![0.0; n], vec![0.0; n]);
        let mut mask = vec![0u64; self.len()];
        for node in 0..self.len() {
            if !self.active[node] {
                continue;
            }
            self.lattice.coords_into(node, &mut c);
            self.lattice.point_into(node, &mut p);
            for k in 0..s {
                self.exact_step(&c, k, 1, &mut t);
                let ok = matches!(self.lattice.index_of(&t), Some(q) if self.active[q])
                    && self.midpoint_inside(&p, k, &mut mid);
                if ok {
                    mask[node] |= 1 << k;
                }
            }
        }
        Ok(mask)
    }

    fn build_adjacency(&self) -> Result<Adjacency> {
        let s = self.stencil.len();
        if s > u16::MAX as usize {
            return Err(Error::input("stencil too large"));
        }
        let n = self.group.dim();
        let (mut p, mut q, mut mid) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut idx = vec![0i64; n];
        let mut targets = vec![NONE; self.len() * s];
        let mut indegree = vec![0u32; self.len() + 1];
        let check_mid = self.domain.interior().is_some();
        for node in 0..self.len() {
            if !self.active[node] {
                continue;
            }
            self.lattice.point_into(node, &mut p);
            for k in 0..s {
                self.flow_point(&p, k, 1.0, &mut q);
                self.lattice.snap_into(&q, &mut idx);
                let Some(t) = self.lattice.index_of(&idx) else { continue };
                if !self.active[t] || t == node || (check_mid && !self.midpoint_inside(&p, k, &mut mid)) {
                    continue;
                }
                targets[node * s + k] = t as u32;
                indegree[t + 1] += 1;
            }
        }
        for i in 0..self.len() {
            indegree[i + 1] += indegree[i];
        }
        let rev_start = indegree;
        let mut fill = rev_start.clone();
        let mut rev = vec![(0u32, 0u16); rev_start[self.len()] as usize];
        for node in 0..self.len() {
            for k in 0..s {
                let t = targets[node * s + k];
                if t != NONE {
                    let slot = &mut fill[t as usize];
                    rev[*slot as usize] = (node as u32, k as u16);
                    *slot += 1;
                }
            }
        }
        Ok(Adjacency { targets, rev_start, rev })
    }

    /// Calls `f(target, k)` for every out-edge of `node`, in stencil order.
    /// `c` and `t` are scratch buffers of length `n`.
    #[inline]
    pub(crate) fn for_each_out(&self, node: usize, c: &mut [i64], t: &mut [i64], mut f: impl FnMut(usize, usize)) {
        if let Some(adj) = &self.adjacency {
            let s = self.stencil.len();
            for (k, &q) in adj.targets[node * s..(node + 1) * s].iter().enumerate() {
                if q != NONE {
                    f(q as usize, k);
                }
            }
            return;
        }
        self.lattice.coords_into(node, c);
        let mask = self.edge_mask.as_ref().map(|m| m[node]);
        for k in 0..self.stencil.len() {
            if let Some(bits) = mask {
                if bits >> k & 1 == 0 {
                    continue;
                }
            }
            self.exact_step(c, k, 1, t);
            if let Some(q) = self.lattice.index_of(t) {
                if self.active[q] {
                    f(q, k);
                }
            }
        }
    }

    /// Calls `f(source, k)` for every edge `source → node` of move `k`.
    #[inline]
    pub(crate) fn for_each_in(&self, node: usize, c: &mut [i64], t: &mut [i64], mut f: impl FnMut(usize, usize)) {
        if let Some(adj) = &self.adjacency {
            let (a, b) = (adj.rev_start[node] as usize, adj.rev_start[node + 1] as usize);
            for &(p, k) in &adj.rev[a..b] {
                f(p as usize, k as usize);
            }
            return;
        }
        self.lattice.coords_into(node, c);
        for k in 0..self.stencil.len() {
            self.exact_step(c, k, -1, t);
            if let Some(p) = self.lattice.index_of(t) {
                if !self.active[p] {
                    continue;
                }
                if let Some(m) = &self.edge_mask {
                    if m[p] >> k & 1 == 0 {
                        continue;
                    }
                }
                f(p, k);
            }
        }
    }

    /// Whether every stencil move from `node` yields an edge.
    pub fn has_full_star(&self, node: usize) -> bool {
        if !self.active[node] {
            return false;
        }
        let n = self.group.dim();
        let (mut c, mut t) = (vec![0i64; n], vec![0i64; n]);
        let mut count = 0;
        self.for_each_out(node, &mut c, &mut t, |_, _| count += 1);
        count == self.stencil.len()
    }

    /// Cost of the edge of move `k` leaving the point `from`.
    /// `mid` is scratch of length `n`.
    #[inline]
    pub(crate) fn edge_cost(&self, metric: &Metric, from: &[f64], k: usize, mid: &mut [f64]) -> Result<f64> {
        match metric {
            Metric::Cc | Metric::Koranyi => Ok(self.spacing * self.stencil.norm(k)),
            Metric::Optical(h) => {
                self.flow_point(from, k, 0.5, mid);
                let at: &[f64] = match h.domain() {
                    Some(d) if !d.contains(mid) => from,
                    _ => mid,
                };
                let sigma = h.sigma_star_raw(at, self.stencil.control(k))?;
                Ok(sigma * self.spacing * self.stencil.norm(k))
            }
        }
    }

    /// Node and edge counts plus a reachability sweep over forward edges.
    pub fn stats(&self) -> GraphStats {
        let n = self.group.dim();
        let (mut c, mut t) = (vec![0i64; n], vec![0i64; n]);
        let mut edges = 0;
        for node in self.active_nodes() {
            self.for_each_out(node, &mut c, &mut t, |_, _| edges += 1);
        }
        let active = self.active.iter().filter(|&&a| a).count();
        let mut seen = vec![false; self.len()];
        let mut stack = Vec::new();
        if let Some(first) = self.active_nodes().next() {
            seen[first] = true;
            stack.push(first);
        }
        let mut reached = 0;
        while let Some(u) = stack.pop() {
            reached += 1;
            self.for_each_out(u, &mut c, &mut t, |q, _| {
                if !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            });
        }
        GraphStats { nodes: self.len(), active, edges, unreached: active - reached }
    }

    /// Canonical description of what determines the graph.
    pub fn descriptor(&self) -> serde_json::Value {
        serde_json::json!({
            "group": self.group,
            "domain": self.domain,
            "spacing": self.spacing,
            "stencil": self.stencil,
        })
    }

    /// Hex SHA-256 of [`descriptor`](Self::descriptor).
    pub fn cache_key(&self) -> String {
        key_for(&self.descriptor())
    }

    pub(crate) fn active_mask(&self) -> &[bool] {
        &self.active
    }
}

pub(crate) fn key_for(descriptor: &serde_json::Value) -> String {
    hex::encode(Sha256::digest(descriptor.to_string().as_bytes()))
}
