use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use subhj_core::{Hamiltonian, HorizontalVector, Point, ZSet};

fn sigma_star(c: &mut Criterion) {
    let x = Point::new([0.3, -0.2, 0.1]);
    let v = HorizontalVector::new([0.6, -0.8]);
    let cases = [
        ("ball", ZSet::Ball(1.0)),
        ("ellipsoid", ZSet::ellipsoid(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap()),
        (
            "cross_polytope",
            ZSet::polytope(vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap(),
        ),
        ("scaled_ball", ZSet::Scaled(Box::new(ZSet::Ball(1.0)), 1.5)),
    ];
    let mut group = c.benchmark_group("sigma_star");
    for (name, z) in cases {
        let h = Hamiltonian::uniform(3.0, z).unwrap();
        group.bench_function(name, |b| b.iter(|| h.sigma_star(black_box(&x), black_box(&v)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, sigma_star);
criterion_main!(benches);
