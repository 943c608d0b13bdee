//! Shared fixtures for the benchmarks.

use subhj_core::{DomainSpec, GroupSpec, Hamiltonian, HorizontalGraph, ZSet};

/// `[0,1]^2` at spacing `h`.
pub fn abelian_square(h: f64, directions: usize) -> HorizontalGraph {
    let dom = DomainSpec::new(vec![(0.0, 1.0), (0.0, 1.0)]).expect("box");
    HorizontalGraph::build(&GroupSpec::abelian(2).expect("group"), &dom, h, directions).expect("graph")
}

/// `[-1,1]^3` on the Heisenberg group at spacing `h`.
pub fn heisenberg_cube(h: f64) -> HorizontalGraph {
    let dom = DomainSpec::new(vec![(-1.0, 1.0); 3]).expect("box");
    HorizontalGraph::build(&GroupSpec::heisenberg1(), &dom, h, 16).expect("graph")
}

/// Ball of radius 1 for `x1 < 0`, radius 2 elsewhere.
pub fn split_balls() -> Hamiltonian {
    use subhj_core::{Piece, Predicate, ZMap};
    let pieces = vec![
        Piece { region: Predicate::parse("x1 < 0").expect("predicate"), zset: ZSet::Ball(1.0) },
        Piece { region: Predicate::always(), zset: ZSet::Ball(2.0) },
    ];
    Hamiltonian::new(2.0, ZMap::Piecewise(pieces)).expect("hamiltonian")
}
