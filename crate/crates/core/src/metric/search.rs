//! Label-setting searches on a [`HorizontalGraph`].
//!
//! Heap entries are ordered by `(value, node)`, so equal values pop in node
//! order and predecessor updates happen only on strict improvement: repeated
//! runs are bit-identical.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;

use super::graph::{HorizontalGraph, Metric, NONE};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::lattice::Lattice;

/// Forward fields hold `d(source, x)`; reverse fields hold `d(x, source)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Reverse,
}

#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    pub direction: Direction,
    /// Stop once the smallest open label exceeds this value.
    pub bound: Option<f64>,
    /// Stop once all of these nodes are settled.
    pub targets: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
struct Key(f64, u32);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// One-to-all (or set-to-all) distances with back-pointers.
#[derive(Debug, Clone)]
pub struct DistanceField {
    lattice: Lattice,
    values: Vec<f64>,
    pred: Vec<u32>,
    sources: Vec<usize>,
    kind: &'static str,
    direction: Direction,
}

impl DistanceField {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// `f64::INFINITY` where unreached.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn predecessor(&self, node: usize) -> Option<usize> {
        match self.pred[node] {
            NONE => None,
            p => Some(p as usize),
        }
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    /// `"cc"`, `"optical"` or `"koranyi"`.
    pub fn kind(&self) -> &'static str {
        self.kind
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// The values as an interpolable field (unreached nodes become `NaN`).
    pub fn to_scalar_field(&self) -> ScalarField {
        let v = self.values.iter().map(|&x| if x.is_finite() { x } else { f64::NAN }).collect();
        ScalarField::new(self.lattice.clone(), v).expect("sizes agree")
    }
}

/// A discrete horizontal path in travel order.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub points: Vec<Vec<f64>>,
    /// Cost accumulated from the first node.
    pub cumcost: Vec<f64>,
}

trait Labels {
    fn dist(&self, n: usize) -> f64;
    fn set(&mut self, n: usize, d: f64, pred: u32);
    fn settled(&self, n: usize) -> bool;
    fn settle(&mut self, n: usize);
}

struct Dense {
    dist: Vec<f64>,
    pred: Vec<u32>,
    done: Vec<bool>,
}

impl Labels for Dense {
    fn dist(&self, n: usize) -> f64 {
        self.dist[n]
    }
    fn set(&mut self, n: usize, d: f64, pred: u32) {
        self.dist[n] = d;
        self.pred[n] = pred;
    }
    fn settled(&self, n: usize) -> bool {
        self.done[n]
    }
    fn settle(&mut self, n: usize) {
        self.done[n] = true;
    }
}

#[derive(Default)]
struct Sparse {
    map: HashMap<u32, (f64, bool)>,
}

impl Labels for Sparse {
    fn dist(&self, n: usize) -> f64 {
        self.map.get(&(n as u32)).map_or(f64::INFINITY, |e| e.0)
    }
    fn set(&mut self, n: usize, d: f64, _pred: u32) {
        self.map.entry(n as u32).or_insert((d, false)).0 = d;
    }
    fn settled(&self, n: usize) -> bool {
        self.map.get(&(n as u32)).is_some_and(|e| e.1)
    }
    fn settle(&mut self, n: usize) {
        if let Some(e) = self.map.get_mut(&(n as u32)) {
            e.1 = true;
        }
    }
}

fn check_sources(graph: &HorizontalGraph, sources: &[(usize, f64)]) -> Result<()> {
    if sources.is_empty() {
        return Err(Error::input("source set is empty"));
    }
    for &(s, off) in sources {
        if s >= graph.len() || !graph.is_active(s) {
            return Err(Error::domain(format!("source node {s} is not a node of the domain")));
        }
        if off.is_nan() {
            return Err(Error::input(format!("source offset at node {s} is NaN")));
        }
    }
    Ok(())
}

fn dijkstra<L: Labels>(
    graph: &HorizontalGraph,
    metric: &Metric,
    sources: &[(usize, f64)],
    opts: &SearchOptions,
    labels: &mut L,
) -> Result<()> {
    let n = graph.group().dim();
    let (mut c, mut t) = (vec![0i64; n], vec![0i64; n]);
    let (mut here, mut there, mut mid) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let lattice = graph.lattice();
    let mut heap = BinaryHeap::new();
    for &(s, off) in sources {
        if off < labels.dist(s) {
            labels.set(s, off, NONE);
            heap.push(Reverse(Key(off, s as u32)));
        }
    }
    let mut remaining = opts.targets.len();
    let mut is_target = HashMap::new();
    for &tg in &opts.targets {
        is_target.insert(tg, ());
    }
    let bound = opts.bound.unwrap_or(f64::INFINITY);
    let mut err = None;
    while let Some(Reverse(Key(d, u))) = heap.pop() {
        let u = u as usize;
        if labels.settled(u) || d > labels.dist(u) {
            continue;
        }
        if d > bound {
            break;
        }
        labels.settle(u);
        if remaining > 0 && is_target.contains_key(&u) {
            remaining -= 1;
            if remaining == 0 {
                break;
            }
        }
        let relax = |v: usize, cost: f64, labels: &mut L, heap: &mut BinaryHeap<Reverse<Key>>| {
            let nd = d + cost;
            if nd < labels.dist(v) {
                labels.set(v, nd, u as u32);
                heap.push(Reverse(Key(nd, v as u32)));
            }
        };
        match opts.direction {
            Direction::Forward => {
                lattice.point_into(u, &mut here);
                graph.for_each_out(u, &mut c, &mut t, |v, k| {
                    if err.is_some() || labels.settled(v) {
                        return;
                    }
                    match graph.edge_cost(metric, &here, k, &mut mid) {
                        Ok(cost) => relax(v, cost, labels, &mut heap),
                        Err(e) => err = Some(e),
                    }
                });
            }
            Direction::Reverse => {
                graph.for_each_in(u, &mut c, &mut t, |v, k| {
                    if err.is_some() || labels.settled(v) {
                        return;
                    }
                    lattice.point_into(v, &mut there);
                    match graph.edge_cost(metric, &there, k, &mut mid) {
                        Ok(cost) => relax(v, cost, labels, &mut heap),
                        Err(e) => err = Some(e),
                    }
                });
            }
        }
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(())
}

/// Multi-source search: node `x` gets `min_s offset_s + d(s, x)` (forward) or
/// `min_s offset_s + d(x, s)` (reverse). Nodes not settled within the bound or
/// before all targets are reached carry `∞`.
pub fn search(
    graph: &HorizontalGraph,
    metric: &Metric,
    sources: &[(usize, f64)],
    opts: &SearchOptions,
) -> Result<DistanceField> {
    check_sources(graph, sources)?;
    let len = graph.len();
    let mut src: Vec<usize> = sources.iter().map(|s| s.0).collect();
    src.sort_unstable();
    src.dedup();
    if let Metric::Koranyi = metric {
        return Ok(koranyi_field(graph, sources, opts, src));
    }
    let mut labels = Dense { dist: vec![f64::INFINITY; len], pred: vec![NONE; len], done: vec![false; len] };
    dijkstra(graph, metric, sources, opts, &mut labels)?;
    for i in 0..len {
        if !labels.done[i] {
            labels.dist[i] = f64::INFINITY;
            labels.pred[i] = NONE;
        }
    }
    Ok(DistanceField {
        lattice: graph.lattice().clone(),
        values: labels.dist,
        pred: labels.pred,
        sources: src,
        kind: metric.name(),
        direction: opts.direction,
    })
}

fn koranyi_field(graph: &HorizontalGraph, sources: &[(usize, f64)], opts: &SearchOptions, src: Vec<usize>) -> DistanceField {
    let g = graph.group();
    let lattice = graph.lattice();
    let pts: Vec<(Vec<f64>, f64)> = sources.iter().map(|&(s, off)| (lattice.point_of(s), off)).collect();
    let mut p = vec![0.0; g.dim()];
    let mut rel = vec![0.0; g.dim()];
    let bound = opts.bound.unwrap_or(f64::INFINITY);
    let values = (0..graph.len())
        .map(|node| {
            if !graph.is_active(node) {
                return f64::INFINITY;
            }
            lattice.point_into(node, &mut p);
            let best = pts
                .iter()
                .map(|(s, off)| {
                    let inv: Vec<f64> = match opts.direction {
                        Direction::Forward => s.iter().map(|x| -x).collect(),
                        Direction::Reverse => p.iter().map(|x| -x).collect(),
                    };
                    let other = if opts.direction == Direction::Forward { &p } else { s };
                    g.mul_into(&inv, other, &mut rel);
                    off + g.koranyi_norm_raw(&rel)
                })
                .fold(f64::INFINITY, f64::min);
            if best > bound {
                f64::INFINITY
            } else {
                best
            }
        })
        .collect();
    DistanceField {
        lattice: lattice.clone(),
        values,
        pred: vec![NONE; graph.len()],
        sources: src,
        kind: "koranyi",
        direction: opts.direction,
    }
}

/// Forward one-to-all (or set-to-all) distances from `sources`.
pub fn shortest_distances(graph: &HorizontalGraph, sources: &[usize], metric: &Metric) -> Result<DistanceField> {
    let s: Vec<(usize, f64)> = sources.iter().map(|&n| (n, 0.0)).collect();
    search(graph, metric, &s, &SearchOptions::default())
}

/// `d(x, y)` between the nodes nearest to `x` and `y`; `∞` if unreachable.
pub fn dist_point(graph: &HorizontalGraph, x: &[f64], y: &[f64], metric: &Metric) -> Result<f64> {
    let a = graph.node_near(x)?;
    let b = graph.node_near(y)?;
    let opts = SearchOptions { targets: vec![b], ..Default::default() };
    Ok(search(graph, metric, &[(a, 0.0)], &opts)?.value(b))
}

/// Follows back-pointers from `target`. Forward fields yield the path from a
/// source to `target`; reverse fields the path from `target` to a source.
pub fn extract_path(field: &DistanceField, target: usize) -> Result<Path> {
    if target >= field.values.len() {
        return Err(Error::input(format!("node {target} is outside the field")));
    }
    if !field.values[target].is_finite() {
        return Err(Error::Unreachable(target));
    }
    if field.kind == "koranyi" && !field.sources.contains(&target) {
        return Err(Error::input("Korányi fields carry no paths"));
    }
    let mut nodes = vec![target];
    let mut cur = target;
    while let Some(p) = field.predecessor(cur) {
        nodes.push(p);
        cur = p;
    }
    let origin_value = field.values[cur];
    let cumcost: Vec<f64> = match field.direction {
        Direction::Forward => {
            nodes.reverse();
            nodes.iter().map(|&n| field.values[n] - origin_value).collect()
        }
        Direction::Reverse => {
            let start = field.values[target];
            nodes.iter().map(|&n| start - field.values[n]).collect()
        }
    };
    let points = nodes.iter().map(|&n| field.lattice.point_of(n)).collect();
    Ok(Path { nodes, points, cumcost })
}

/// Bounded search from one node without touching the whole lattice.
/// Returns `(node, value)` for every node with value `≤ bound`, sorted by node.
pub fn bounded_search(
    graph: &HorizontalGraph,
    metric: &Metric,
    source: usize,
    bound: f64,
    direction: Direction,
) -> Result<Vec<(usize, f64)>> {
    check_sources(graph, &[(source, 0.0)])?;
    if let Metric::Koranyi = metric {
        return Err(Error::input("bounded search needs a path metric"));
    }
    let mut labels = Sparse::default();
    let opts = SearchOptions { direction, bound: Some(bound), targets: Vec::new() };
    dijkstra(graph, metric, &[(source, 0.0)], &opts, &mut labels)?;
    let mut out: Vec<(usize, f64)> =
        labels.map.into_iter().filter(|(_, (d, done))| *done && *d <= bound).map(|(n, (d, _))| (n as usize, d)).collect();
    out.sort_unstable_by_key(|e| e.0);
    Ok(out)
}

/// Best and second-best labels from distinct sources, per node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLabels {
    /// `(value, source node)`, `source = usize::MAX` when absent.
    pub best: [(f64, usize); 2],
}

/// Forward multi-source search keeping, at every node, the two smallest
/// `offset_s + d(s, x)` over distinct sources `s`.
pub fn two_source_search(graph: &HorizontalGraph, metric: &Metric, sources: &[(usize, f64)]) -> Result<Vec<TwoLabels>> {
    check_sources(graph, sources)?;
    if let Metric::Koranyi = metric {
        return Err(Error::input("two-source search needs a path metric"));
    }
    const EMPTY: (f64, u32) = (f64::INFINITY, NONE);
    let len = graph.len();
    let mut best = vec![[EMPTY; 2]; len];
    let mut settled = vec![0u8; len];
    let mut heap: BinaryHeap<Reverse<(Key, u32)>> = BinaryHeap::new();

    // Inserts candidate (d, s) at v; returns whether it is worth pushing.
    fn offer(slot: &mut [(f64, u32); 2], done: u8, d: f64, s: u32) -> bool {
        for i in 0..done as usize {
            if slot[i].1 == s {
                return false;
            }
        }
        let first_open = done as usize;
        if first_open >= 2 {
            return false;
        }
        if let Some(i) = (first_open..2).find(|&i| slot[i].1 == s) {
            if d < slot[i].0 {
                slot[i].0 = d;
            } else {
                return false;
            }
        } else if d < slot[1].0 {
            slot[1] = (d, s);
        } else {
            return false;
        }
        if first_open == 0 && slot[1] < slot[0] {
            slot.swap(0, 1);
        }
        true
    }

    for &(s, off) in sources {
        if offer(&mut best[s], 0, off, s as u32) {
            heap.push(Reverse((Key(off, s as u32), s as u32)));
        }
    }
    let n = graph.group().dim();
    let (mut c, mut t) = (vec![0i64; n], vec![0i64; n]);
    let (mut here, mut mid) = (vec![0.0; n], vec![0.0; n]);
    let mut err = None;
    while let Some(Reverse((Key(d, u), s))) = heap.pop() {
        let u = u as usize;
        let k = settled[u] as usize;
        if k >= 2 || best[u][k] != (d, s) {
            continue;
        }
        settled[u] += 1;
        graph.lattice().point_into(u, &mut here);
        graph.for_each_out(u, &mut c, &mut t, |v, mv| {
            if err.is_some() || settled[v] >= 2 {
                return;
            }
            match graph.edge_cost(metric, &here, mv, &mut mid) {
                Ok(cost) => {
                    let nd = d + cost;
                    if offer(&mut best[v], settled[v], nd, s) {
                        heap.push(Reverse((Key(nd, v as u32), s)));
                    }
                }
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(best
        .into_iter()
        .map(|b| TwoLabels { best: b.map(|(d, s)| (d, if s == NONE { usize::MAX } else { s as usize })) })
        .collect())
}
