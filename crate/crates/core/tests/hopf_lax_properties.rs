use std::sync::LazyLock;

use proptest::prelude::*;
use subhj_core::hopf_lax::{default_margin, global_graph, solve_dirichlet, BoundaryDatum, SolutionField};
use subhj_core::metric::{search, Direction, SearchOptions};
use subhj_core::verify::{comparison_harness, monge_residual, ResidualOptions};
use subhj_core::{DomainSpec, GroupSpec, Hamiltonian, HorizontalGraph, Metric, Piece, Point, Predicate, ZMap, ZSet};

const H: f64 = 1.0 / 16.0;

struct Setup {
    g: GroupSpec,
    omega: DomainSpec,
    graph: HorizontalGraph,
    k: Hamiltonian,
}

static PLANE: LazyLock<Setup> = LazyLock::new(|| {
    let g = GroupSpec::abelian(2).unwrap();
    let omega = DomainSpec::new(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
    let graph = global_graph(&g, &omega, H, subhj_core::Stencil::new(2, 16).unwrap(), 0.25).unwrap();
    let h = Hamiltonian::piecewise(
        2.0,
        vec![
            Piece { region: Predicate::parse("x2 < 0.4").unwrap(), zset: ZSet::Ball(1.0) },
            Piece { region: Predicate::always(), zset: ZSet::Ball(1.6) },
        ],
    )
    .unwrap();
    Setup { k: h.extend(&omega), g, omega, graph }
});

fn affine(a: f64, b: f64, c: f64) -> impl Fn(&[f64]) -> f64 {
    move |y: &[f64]| a * y[0] + b * y[1] + c
}

fn solve(s: &Setup, d: &BoundaryDatum) -> SolutionField {
    solve_dirichlet(&s.graph, &s.k, &s.omega, d, true).unwrap()
}

fn slope() -> impl Strategy<Value = f64> {
    -0.35..0.35f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ordered_data_give_ordered_solutions(a in slope(), b in slope(), c in 0.0..0.3f64, f in 1.0..9.0f64) {
        let s = &*PLANE;
        let d1 = BoundaryDatum::from_fn(&s.g, &s.omega, H, affine(a, b, 0.0)).unwrap();
        let d2 = d1.map_values(|y, v| v + c * (f * y[0] + 2.0 * y[1]).sin().abs());
        let (w1, w2) = (solve(s, &d1), solve(s, &d2));
        for (x, y) in w1.global.values().iter().zip(w2.global.values()) {
            prop_assert!(x <= y);
        }
    }

    #[test]
    fn constant_offsets_pass_through(a in slope(), b in slope(), c in -2.0..2.0f64) {
        let s = &*PLANE;
        let d = BoundaryDatum::from_fn(&s.g, &s.omega, H, affine(a, b, 0.1)).unwrap();
        let (w, wc) = (solve(s, &d), solve(s, &d.offset(c)));
        for (x, y) in w.u.values().iter().zip(wc.u.values()) {
            if x.is_nan() {
                prop_assert!(y.is_nan());
            } else {
                prop_assert!((y - x - c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solution_is_below_every_cone(a in slope(), b in slope(), node in any::<prop::sample::Index>(), sample in any::<prop::sample::Index>()) {
        let s = &*PLANE;
        let d = BoundaryDatum::from_fn(&s.g, &s.omega, H, affine(a, b, 0.0)).unwrap();
        let w = solve(s, &d);
        let seeds = d.on_graph(&s.graph).unwrap();
        let (y, gy) = seeds[sample.index(seeds.len())];
        let opts = SearchOptions { direction: Direction::Reverse, ..Default::default() };
        let to_y = search(&s.graph, &Metric::Optical(s.k.clone()), &[(y, 0.0)], &opts).unwrap();
        let nodes: Vec<usize> = s.graph.active_nodes().collect();
        let x = nodes[node.index(nodes.len())];
        prop_assert!(w.global.node_value(x) <= to_y.value(x) + gy + 1e-12);
    }

    #[test]
    fn comparison_never_fails_on_ordered_solutions(a in slope(), b in slope(), a2 in slope(), b2 in slope(), lift in 0.0..0.2f64) {
        let s = &*PLANE;
        let d1 = BoundaryDatum::from_fn(&s.g, &s.omega, H, affine(a, b, 0.0)).unwrap();
        let shift = d1.samples().iter().map(|(y, v)| v - affine(a2, b2, 0.0)(&y.0)).fold(f64::NEG_INFINITY, f64::max);
        let d2 = d1.map_values(|y, _| affine(a2, b2, shift + lift)(y));
        let (u, v) = (solve(s, &d1), solve(s, &d2));
        let r = comparison_harness(&s.k, &s.graph, &s.omega, &u.u, &v.u, None).unwrap();
        prop_assert!(r.precondition_met && r.passed, "{:?}", r);
    }
}

#[test]
fn solution_is_lipschitz_along_stencil_moves() {
    let s = &*PLANE;
    let d = BoundaryDatum::from_fn(&s.g, &s.omega, H, |y| 0.3 * (4.0 * y[0]).sin() * y[1]).unwrap();
    let w = solve(s, &d).u;
    let lat = w.lattice();
    let st = s.graph.stencil();
    let alpha = s.k.alpha();
    let mut checked = 0;
    for n in 0..lat.len() {
        let c = lat.coords_of(n);
        for k in 0..st.len() {
            let t: Vec<i64> = c.iter().zip(st.displacement(k)).map(|(a, b)| a + b).collect();
            let Some(m) = lat.index_of(&t) else { continue };
            let (x, y) = (w.node_value(n), w.node_value(m));
            if x.is_nan() || y.is_nan() {
                continue;
            }
            assert!((x - y).abs() <= alpha * H * st.norm(k) + 1e-12);
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn residual_does_not_depend_on_the_extension() {
    let g = GroupSpec::abelian(2).unwrap();
    let omega = DomainSpec::new(vec![(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
    let graph = global_graph(&g, &omega, H, subhj_core::Stencil::new(2, 16).unwrap(), 0.5).unwrap();
    let h = Hamiltonian::piecewise(
        2.0,
        vec![
            Piece { region: Predicate::parse("x1 < 0").unwrap(), zset: ZSet::Ball(1.0) },
            Piece { region: Predicate::always(), zset: ZSet::Ball(1.5) },
        ],
    )
    .unwrap();
    let cross = ZSet::polytope(vec![vec![0.6, 0.0], vec![-0.6, 0.0], vec![0.0, 0.6], vec![0.0, -0.6]]).unwrap();
    let family = [h.clone(), h.extend(&omega), h.extend_with(&omega, ZMap::Uniform(cross))];
    let d = BoundaryDatum::from_fn(&g, &omega, H, |y| 0.2 * y[0]).unwrap();
    let u = solve_dirichlet(&graph, &family[1], &omega, &d, false).unwrap().u;
    let opts = ResidualOptions { radii: vec![0.125, 0.0625], tau: None };
    // every optical path inside the residual search stays within CC radius α² · r_max = 0.5 of the probe
    for p in [[0.1, -0.2], [-0.3, 0.35], [0.0, 0.0], [0.45, 0.1]] {
        let x0 = Point::new(p);
        let records: Vec<_> = family.iter().map(|k| monge_residual(&u, k, &graph, &x0, &opts).unwrap()).collect();
        for r in &records[1..] {
            assert!(r.infima.iter().zip(&records[0].infima).all(|(a, b)| (a - b).abs() <= 1e-12), "{p:?}");
        }
    }
}

#[test]
fn doubling_the_margin_changes_nothing_on_the_closure() {
    let s = &*PLANE;
    let d = BoundaryDatum::from_fn(&s.g, &s.omega, H, |y| 0.3 * y[0] - 0.2 * (3.0 * y[1]).cos()).unwrap();
    let m = default_margin(&s.omega, s.k.alpha());
    let mut sols = Vec::new();
    for margin in [m, 2.0 * m] {
        let graph = global_graph(&s.g, &s.omega, H, subhj_core::Stencil::new(2, 16).unwrap(), margin).unwrap();
        sols.push(solve_dirichlet(&graph, &s.k, &s.omega, &d, false).unwrap());
    }
    assert_eq!(sols[0].bcc.passed, sols[1].bcc.passed);
    let (a, b) = (sols[0].u.values(), sols[1].u.values());
    assert_eq!(a.len(), b.len());
    let worst = a.iter().zip(b).filter(|(x, _)| !x.is_nan()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst <= 2.0 * s.graph.cell_cost(s.k.alpha()), "{worst}");
}
