use corank::geodesy::SOLVER_SLACK;
use corank::hyperbolicity::{four_point_delta, gromov_product, thin_triangle_delta, CatlinOracle, DistanceOracle, ThinTriangleOptions};
use corank::{AmbientPoint, Complex64, DistanceOptions, ModelDomain};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample_box(d: &ModelDomain, count: usize, seed: u64) -> Vec<AmbientPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z1 = Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            let depth = 10f64.powf(rng.random_range(-2.0..0.0));
            d.boundary_from_slice(&[z1], rng.random_range(-0.5..0.5)).unwrap().pushed_in(depth)
        })
        .collect()
}

#[test]
fn products_on_a_normal_geodesic() {
    let d = ModelDomain::radial(2, 2);
    let oracle = CatlinOracle::new(&d, DistanceOptions::default());
    let x = d.boundary_from_slice(&[Complex64::new(-0.3, 0.4)], 0.2).unwrap();
    let at = |t: f64| x.pushed_in((-t).exp());
    let o = at(0.0);
    for (s, t) in [(0.5, 2.0), (1.5, 1.0), (2.5, 2.5)] {
        let g = gromov_product(&oracle, &at(s), &at(t), &o).unwrap();
        let m: f64 = f64::min(s, t);
        assert!(g.lo <= m + 1e-9 && m <= g.hi + 1e-9, "{g:?} vs {m}");
        assert!(g.width() <= 3.0 * SOLVER_SLACK, "{g:?}");
        let cap = oracle.bracket(&at(s), &o).unwrap().hi.min(oracle.bracket(&at(t), &o).unwrap().hi);
        assert!(g.lo >= -SOLVER_SLACK && g.hi <= cap + SOLVER_SLACK, "{g:?}");
    }
}

#[test]
fn random_box_delta_is_finite_and_reseed_stable() {
    let d = ModelDomain::radial(2, 2);
    let oracle = CatlinOracle::new(&d, DistanceOptions::quick());
    let a = four_point_delta(&sample_box(&d, 40, 1), &oracle).unwrap();
    let b = four_point_delta(&sample_box(&d, 40, 2), &oracle).unwrap();
    assert!(a.delta.is_finite() && b.delta.is_finite());
    assert_eq!(a.quadruples, 40 * 39 * 38 * 37);
    let rel = (a.delta - b.delta).abs() / a.delta.max(b.delta);
    assert!(rel <= 0.1, "delta {} vs {} ({rel})", a.delta, b.delta);
}

#[test]
fn degenerate_triangle_is_thin() {
    let d = ModelDomain::radial(2, 2);
    let pts = sample_box(&d, 2, 3);
    let est = thin_triangle_delta(&d, &pts[0], &pts[0], &pts[1], &ThinTriangleOptions::default()).unwrap();
    assert!(est.delta <= SOLVER_SLACK, "{}", est.delta);
}
