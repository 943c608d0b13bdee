use std::sync::LazyLock;

use proptest::prelude::*;
use subhj_core::metric::{search, shortest_distances, SearchOptions};
use subhj_core::{validate, DomainSpec, GroupSpec, Hamiltonian, HorizontalGraph, Metric, Piece, Point, Predicate, ZSet};

struct Scenario {
    graph: HorizontalGraph,
    nodes: Vec<usize>,
    h: Hamiltonian,
}

fn scenario(g: GroupSpec, bounds: Vec<(f64, f64)>, spacing: f64, h: Hamiltonian) -> Scenario {
    let dom = DomainSpec::new(bounds).unwrap();
    let graph = HorizontalGraph::build(&g, &dom, spacing, 16).unwrap();
    let nodes = graph.active_nodes().collect();
    Scenario { graph, nodes, h }
}

/// Ball of radius 1 left of `x1 = 0.5`, a lopsided quadrilateral to the right.
fn lopsided() -> Hamiltonian {
    let quad = ZSet::polytope(vec![vec![1.5, 0.0], vec![0.0, 0.8], vec![-0.8, 0.0], vec![0.0, -1.2]]).unwrap();
    Hamiltonian::piecewise(
        2.0,
        vec![
            Piece { region: Predicate::parse("x1 < 0.5").unwrap(), zset: ZSet::Ball(1.0) },
            Piece { region: Predicate::always(), zset: quad },
        ],
    )
    .unwrap()
}

static PLANE: LazyLock<Scenario> =
    LazyLock::new(|| scenario(GroupSpec::abelian(2).unwrap(), vec![(0.0, 1.0), (0.0, 1.0)], 1.0 / 16.0, lopsided()));

static HEIS: LazyLock<Scenario> = LazyLock::new(|| {
    let h = Hamiltonian::piecewise(
        2.0,
        vec![
            Piece { region: Predicate::parse("x1 < 0").unwrap(), zset: ZSet::Ball(1.0) },
            Piece { region: Predicate::always(), zset: ZSet::Ball(2.0) },
        ],
    )
    .unwrap();
    scenario(GroupSpec::heisenberg1(), vec![(-0.5, 0.5), (-0.5, 0.5), (-0.25, 0.25)], 1.0 / 8.0, h)
});

fn dist(s: &Scenario, metric: &Metric, a: usize, b: usize) -> f64 {
    let opts = SearchOptions { targets: vec![b], ..Default::default() };
    search(&s.graph, metric, &[(a, 0.0)], &opts).unwrap().value(b)
}

fn metrics(s: &Scenario) -> [Metric; 2] {
    [Metric::Cc, Metric::Optical(s.h.clone())]
}

fn close_le(a: f64, b: f64) -> bool {
    a <= b + 1e-12 * b.abs().max(1.0)
}

fn check_axioms(s: &Scenario, i: usize, j: usize, k: usize) -> Result<(), TestCaseError> {
    let (x, y, z) = (s.nodes[i % s.nodes.len()], s.nodes[j % s.nodes.len()], s.nodes[k % s.nodes.len()]);
    for m in metrics(s) {
        let (xy, yz, xz) = (dist(s, &m, x, y), dist(s, &m, y, z), dist(s, &m, x, z));
        prop_assert!(xy.is_finite() && xy >= 0.0);
        prop_assert_eq!(xy == 0.0, x == y);
        prop_assert!(close_le(xz, xy + yz), "{} {} {} {}", m.name(), xz, xy, yz);
    }
    Ok(())
}

fn check_sandwich_and_lipschitz(s: &Scenario, q: [usize; 4]) -> Result<(), TestCaseError> {
    let [x, y, z, w] = q.map(|i| s.nodes[i % s.nodes.len()]);
    let opt = Metric::Optical(s.h.clone());
    let a = s.h.alpha();
    let (cc, sigma) = (dist(s, &Metric::Cc, x, y), dist(s, &opt, x, y));
    prop_assert!(close_le(cc / a, sigma) && close_le(sigma, a * cc));
    let lhs = (sigma - dist(s, &opt, z, w)).abs();
    let rhs = a * (dist(s, &Metric::Cc, x, z) + dist(s, &Metric::Cc, y, w));
    prop_assert!(close_le(lhs, rhs), "{} > {}", lhs, rhs);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn plane_metric_axioms(i in any::<usize>(), j in any::<usize>(), k in any::<usize>()) {
        check_axioms(&PLANE, i, j, k)?;
    }

    #[test]
    fn heisenberg_metric_axioms(i in any::<usize>(), j in any::<usize>(), k in any::<usize>()) {
        check_axioms(&HEIS, i, j, k)?;
    }

    #[test]
    fn plane_sandwich_and_lipschitz(q in any::<[usize; 4]>()) {
        check_sandwich_and_lipschitz(&PLANE, q)?;
    }

    #[test]
    fn heisenberg_sandwich_and_lipschitz(q in any::<[usize; 4]>()) {
        check_sandwich_and_lipschitz(&HEIS, q)?;
    }
}

#[test]
fn lopsided_optical_length_is_not_symmetric() {
    let s = &*PLANE;
    let opt = Metric::Optical(s.h.clone());
    let a = s.graph.node_near(&[0.625, 0.5]).unwrap();
    let b = s.graph.node_near(&[0.875, 0.5]).unwrap();
    let samples: Vec<Point> = s.nodes.iter().step_by(7).map(|&n| Point::new(s.graph.point(n))).collect();
    assert!(validate(&s.h, &GroupSpec::abelian(2).unwrap(), &samples).unwrap().passed);
    // σ*(v) = max over vertices of ⟨-ξ, v⟩: 0.8 towards +x1, 1.5 towards -x1
    assert!((dist(s, &opt, a, b) - 0.8 * 0.25).abs() < 1e-12);
    assert!((dist(s, &opt, b, a) - 1.5 * 0.25).abs() < 1e-12);
}

#[test]
fn cc_distance_is_dilation_homogeneous() {
    let g = GroupSpec::heisenberg1();
    let dom = DomainSpec::new(vec![(-1.0, 1.0); 3]).unwrap();
    let q = Point::new([0.2, 0.1, 0.05]);
    let q2 = g.dilate(2.0, &q).unwrap();
    let mut ratios = Vec::new();
    for h in [1.0 / 8.0, 1.0 / 16.0] {
        let graph = HorizontalGraph::build(&g, &dom, h, 16).unwrap();
        let o = graph.node_near(&[0.0; 3]).unwrap();
        let f = shortest_distances(&graph, &[o], &Metric::Cc).unwrap();
        let d1 = f.value(graph.node_near(&q.0).unwrap());
        let d2 = f.value(graph.node_near(&q2.0).unwrap());
        ratios.push(d2 / d1);
    }
    let last = *ratios.last().unwrap();
    assert!((last / 2.0 - 1.0).abs() <= 0.1, "{ratios:?}");
}
