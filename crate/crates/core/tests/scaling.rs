use corank::scaling::{
    blowdown_at_infinity, convergence_report, engulfing_probe, engulfing_scan, limit_at_infinity, normal_approach,
    polydisc_radii, scale_at_point, SequenceMember,
};
use corank::{AmbientPoint, Complex64, HermitianPolynomial, ModelDomain, Polydisc};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn quartic_plus_quadratic() -> ModelDomain {
    let p = HermitianPolynomial::from_terms(&[(2, 2, c(1.0, 0.0)), (1, 1, c(1.0, 0.0))]).unwrap();
    ModelDomain::new(2, p, "|z|^4 + |z|^2").unwrap()
}

#[test]
fn polydisc_radii_examples() {
    let d = ModelDomain::radial(3, 2);
    let xi = AmbientPoint::real(&[0.0, 0.0, 0.0]);
    let r = polydisc_radii(&d, &xi, 1e-4).unwrap();
    assert_eq!(r[0], 1e-4);
    assert!((r[1] - 0.1).abs() < 1e-15 && (r[2] - 1e-2).abs() < 1e-15, "{r:?}");
    let r = polydisc_radii(&d, &xi, 1.0).unwrap();
    assert_eq!(r, vec![1.0, 1.0, 1.0]);
}

#[test]
fn engulfing_at_the_base_point_is_one() {
    let d = ModelDomain::radial(2, 2);
    let xi = AmbientPoint::real(&[0.0, 0.0]);
    let rep = engulfing_probe(&d, &xi, 1e-4, 1, 3).unwrap();
    assert_eq!(rep.samples, 1);
    assert!((rep.c_e_empirical - 1.0).abs() < 1e-6, "{}", rep.c_e_empirical);
}

#[test]
fn engulfing_constant_is_stable() {
    let d = ModelDomain::radial(2, 2);
    let xi = AmbientPoint::real(&[0.0, 0.0]);
    let a = engulfing_probe(&d, &xi, 1e-4, 1000, 4).unwrap();
    let b = engulfing_probe(&d, &xi, 1e-4, 2000, 4).unwrap();
    assert!(a.pass && a.c_e_empirical.is_finite());
    assert!(b.c_e_empirical >= a.c_e_empirical && b.c_e_empirical <= 1.1 * a.c_e_empirical, "{a:?} {b:?}");
    let scan = engulfing_scan(&d, &xi, &[1e-3, 1e-4, 1e-5], 500, 4).unwrap();
    assert!(scan.pass, "{scan:?}");
}

#[test]
fn rescaled_base_point_sits_at_depth_one() {
    let d = ModelDomain::radial(2, 2);
    let xi = AmbientPoint::new(vec![c(-1.0, 0.0), c(1.0, 0.0)]);
    let seq = scale_at_point(&d, &normal_approach(&d, &xi, &[10, 1000, 100_000]).unwrap()).unwrap();
    for step in &seq.steps {
        assert!((step.scaled.defining_value(&step.v).unwrap() + 1.0).abs() < 1e-15);
        let back = ModelDomain::from_spec(&step.scaled.to_spec()).unwrap();
        assert_eq!(back.poly(), step.scaled.poly());
    }
    assert_eq!(seq.limit.poly().coefficient(1, 1), c(1.0, 0.0));
    assert_eq!(seq.limit.degree(), 2);
}

#[test]
fn blowdown_examples() {
    let d = quartic_plus_quadratic();
    let chi = blowdown_at_infinity(&d, 4).unwrap();
    assert_eq!(chi.poly().coefficient(1, 1), c(0.5, 0.0));
    assert_eq!(chi.poly().coefficient(2, 2), c(1.0, 0.0));
    assert_eq!(blowdown_at_infinity(&d, 1).unwrap().poly(), d.poly());
    let q = ModelDomain::radial(2, 2);
    assert_eq!(blowdown_at_infinity(&q, 37).unwrap().poly(), q.poly());
    assert!(blowdown_at_infinity(&d, 0).is_err());
}

#[test]
fn limit_at_infinity_examples() {
    assert_eq!(limit_at_infinity(&quartic_plus_quadratic()).unwrap().poly(), ModelDomain::radial(2, 2).poly());
    let siegel = ModelDomain::radial(2, 1);
    assert_eq!(limit_at_infinity(&siegel).unwrap().poly(), siegel.poly());
    let mixed = HermitianPolynomial::from_terms(&[(2, 2, c(1.0, 0.0)), (3, 1, c(0.5, 0.0))]).unwrap();
    let d = ModelDomain::new(2, mixed.clone(), "mixed").unwrap();
    assert_eq!(limit_at_infinity(&d).unwrap().poly(), &mixed);
}

#[test]
fn blowdown_errors_decrease_with_n() {
    let d = HermitianPolynomial::from_terms(&[(3, 3, c(1.0, 0.0)), (2, 2, c(0.5, 0.0)), (1, 1, c(2.0, 0.0))]).unwrap();
    let d = ModelDomain::new(2, d, "sextic").unwrap();
    let limit = limit_at_infinity(&d).unwrap();
    let ns = [1u64, 10, 100, 1000];
    let chis: Vec<ModelDomain> = ns.iter().map(|&n| blowdown_at_infinity(&d, n).unwrap()).collect();
    let members: Vec<SequenceMember> =
        ns.iter().zip(&chis).map(|(&n, chi)| SequenceMember { n, eps: None, tau: None, domain: chi }).collect();
    let region = Polydisc::new(&AmbientPoint::real(&[-3.0, 0.0]), vec![0.5, 0.8]).unwrap();
    let rows = convergence_report(&members, &limit, &region, 6, 8).unwrap();
    assert!(rows.windows(2).all(|w| w[1].sup_r_error <= w[0].sup_r_error && w[1].sup_metric_error <= w[0].sup_metric_error));
    let itself = convergence_report(&members[2..3], &chis[2], &region, 6, 8).unwrap();
    assert_eq!(itself[0].sup_r_error, 0.0);
    assert_eq!(itself[0].sup_metric_error, 0.0);
}
