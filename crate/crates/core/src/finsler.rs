//! The explicit Finsler metric `M_{r_P}` on a model domain, the log-ratio
//! distance lower bound, affine-disc Kobayashi upper bounds, and sup-norm
//! comparisons between metrics of two domains.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{AmbientPoint, ModelDomain, TangentVector};
use crate::error::{Error, Result};
use crate::region::Polydisc;

/// Bisection steps for the disc radius along one angle.
pub const DISC_BISECTIONS: usize = 60;
pub const DEFAULT_ANGLE_SAMPLES: usize = 64;
/// Sign-change scan resolution before bisection.
const DISC_SCAN_STEPS: usize = 128;

/// Metric on raw coordinates; `None` when `z` is not interior.
pub(crate) fn metric_raw(d: &ModelDomain, z: &[Complex64], x: &[Complex64]) -> Option<f64> {
    let r = d.r(z);
    if !(r < 0.0) {
        return None;
    }
    let s = -r;
    let mut b0 = x[0] + 2.0 * x[1] * d.p_prime(z[1]);
    for (xa, za) in x[2..].iter().zip(&z[2..]) {
        b0 += 2.0 * xa * za.conj();
    }
    let mut m = b0.norm() / s;
    let x1 = x[1].norm();
    if x1 > 0.0 {
        let weight: f64 = d
            .caps()
            .caps(z[1])
            .filter(|&(_, cap)| cap > 0.0)
            .map(|(l, cap)| (cap / s).powf(1.0 / f64::from(l)))
            .sum();
        m += x1 * weight;
    }
    let tail: f64 = x[2..].iter().map(|c| c.norm()).sum();
    Some(m + tail / s.sqrt())
}

/// Tangential weight `Σ_ℓ (A^P_ℓ(z₁)/s)^{1/ℓ}` multiplying `|x₁|` at depth `s`.
pub fn tangential_weight(d: &ModelDomain, z1: Complex64, depth: f64) -> f64 {
    d.caps()
        .caps(z1)
        .filter(|&(_, cap)| cap > 0.0)
        .map(|(l, cap)| (cap / depth).powf(1.0 / f64::from(l)))
        .sum()
}

/// `M_{r_P}(z; X)`.
pub fn catlin_metric(d: &ModelDomain, z: &AmbientPoint, x: &TangentVector) -> Result<f64> {
    d.check_dim(z.dim())?;
    d.check_dim(x.dim())?;
    metric_raw(d, z, x).ok_or_else(|| Error::PointNotInterior { value: d.r(z) })
}

/// `|log(r_P(p)/r_P(q))|`, a lower bound for the distance of `M_{r_P}`.
pub fn log_ratio_lower_bound(d: &ModelDomain, p: &AmbientPoint, q: &AmbientPoint) -> Result<f64> {
    let sp = d.depth(p)?;
    let sq = d.depth(q)?;
    Ok((sp / sq).ln().abs())
}

/// First exit radius of the ray `t ↦ z + t·v`; infinite if none was found.
fn first_exit(d: &ModelDomain, z: &AmbientPoint, v: &[Complex64]) -> f64 {
    let at = |t: f64| {
        let p: Vec<Complex64> = z.iter().zip(v).map(|(a, b)| a + b * t).collect();
        d.r(&p)
    };
    let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut hi = (-d.r(z)).max(1e-300) / vnorm;
    let mut found = false;
    for _ in 0..400 {
        if at(hi) >= 0.0 {
            found = true;
            break;
        }
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    if !found {
        return f64::INFINITY;
    }
    // first sign change on a uniform scan, then bisection
    let mut lo = 0.0;
    let step = hi / DISC_SCAN_STEPS as f64;
    for i in 1..=DISC_SCAN_STEPS {
        let t = step * i as f64;
        if at(t) >= 0.0 {
            hi = t;
            break;
        }
        lo = t;
    }
    for _ in 0..DISC_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if at(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `1/R` for the largest affine disc `λ ↦ z + λX`, `|λ| < R`, found inside
/// the domain over `angle_samples` directions of `λ`.
pub fn disc_upper_bound(d: &ModelDomain, z: &AmbientPoint, x: &TangentVector, angle_samples: usize) -> Result<f64> {
    d.check_dim(x.dim())?;
    d.depth(z)?;
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let n = angle_samples.max(1);
    let radius = (0..n)
        .map(|k| {
            let rot = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            let v: Vec<Complex64> = x.iter().map(|c| c * rot).collect();
            first_exit(d, z, &v)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(if radius.is_finite() { 1.0 / radius } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricComparisonReport {
    pub sup_abs_error: f64,
    /// Grid points interior to both domains.
    pub grid_points: usize,
    pub directions: usize,
    pub region: String,
}

/// Deterministic test directions: the coordinate axes followed by unit
/// vectors from a fixed-seed stream.
pub fn probe_directions(dim: usize, count: usize) -> Vec<TangentVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d1c5);
    (0..count)
        .map(|i| {
            if i < dim {
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                v[i] = Complex64::new(1.0, 0.0);
                TangentVector(v)
            } else {
                let v: Vec<Complex64> = (0..dim)
                    .map(|_| Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
                    .collect();
                let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                TangentVector(v.into_iter().map(|c| c / n).collect())
            }
        })
        .collect()
}

/// `sup |M_a − M_b|` over polydisc grid points interior to both domains.
pub fn metric_sup_error(
    a: &ModelDomain,
    b: &ModelDomain,
    region: &Polydisc,
    grid: usize,
    directions: usize,
) -> Result<MetricComparisonReport> {
    a.check_dim(b.dim())?;
    a.check_dim(region.dim())?;
    let dirs = probe_directions(a.dim(), directions.max(1));
    let points = region.grid_points(grid);
    let per_point: Vec<Option<f64>> = points
        .par_iter()
        .map(|z| {
            if a.r(z) >= 0.0 || b.r(z) >= 0.0 {
                return None;
            }
            Some(
                dirs.iter()
                    .filter_map(|x| Some((metric_raw(a, z, x)? - metric_raw(b, z, x)?).abs()))
                    .fold(0.0, f64::max),
            )
        })
        .collect();
    let used = per_point.iter().flatten().count();
    if used == 0 {
        return Err(Error::EmptyIntersection);
    }
    Ok(MetricComparisonReport {
        sup_abs_error: per_point.into_iter().flatten().fold(0.0, f64::max),
        grid_points: used,
        directions: dirs.len(),
        region: region.describe(),
    })
}

/// Range of `disc_upper_bound / M` over random interior samples. The upper
/// end is the empirical comparability constant `Â`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparabilityReport {
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub samples: usize,
}

pub fn empirical_comparability(
    d: &ModelDomain,
    region: &Polydisc,
    samples: usize,
    seed: u64,
) -> Result<ComparabilityReport> {
    d.check_dim(region.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    let mut attempts = 0;
    while pairs.len() < samples && attempts < samples * 100 {
        attempts += 1;
        let z = region.sample(&mut rng);
        if d.r(&z) >= 0.0 {
            continue;
        }
        let x = TangentVector(
            (0..d.dim())
                .map(|_| Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
                .collect(),
        );
        pairs.push((z, x));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let ratios: Vec<f64> = pairs
        .par_iter()
        .map(|(z, x)| {
            let m = metric_raw(d, z, x).unwrap_or(f64::NAN);
            disc_upper_bound(d, z, x, DEFAULT_ANGLE_SAMPLES).map(|u| u / m).unwrap_or(f64::NAN)
        })
        .collect();
    Ok(ComparabilityReport {
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        samples: ratios.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::HermitianPolynomial;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn quartic() -> ModelDomain {
        ModelDomain::radial(2, 2)
    }

    #[test]
    fn catlin_metric_examples() {
        let d = quartic();
        let z = AmbientPoint::real(&[-1.0, 0.0]);
        assert_eq!(catlin_metric(&d, &z, &TangentVector::real(&[1.0, 0.0])).unwrap(), 1.0);
        assert_relative_eq!(
            catlin_metric(&d, &z, &TangentVector::real(&[0.0, 1.0])).unwrap(),
            2f64.sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            catlin_metric(&d, &z, &TangentVector::real(&[0.0, 2.0])).unwrap(),
            2.0 * 2f64.sqrt(),
            max_relative = 1e-15
        );
        let outside = AmbientPoint::real(&[0.0, 0.0]);
        assert!(matches!(
            catlin_metric(&d, &outside, &TangentVector::real(&[1.0, 0.0])),
            Err(Error::PointNotInterior { .. })
        ));
    }

    #[test]
    fn metric_blows_up_like_inverse_depth() {
        let d = ModelDomain::radial(3, 2);
        let x = TangentVector::real(&[1.0, 0.0, 0.0]);
        for t in [1e-6, 1e-3, 0.5, 1.0, 7.0] {
            let m = catlin_metric(&d, &AmbientPoint::real(&[-t, 0.0, 0.0]), &x).unwrap();
            assert_relative_eq!(m, 1.0 / t, max_relative = 1e-15);
        }
    }

    #[test]
    fn log_ratio_examples() {
        let d = quartic();
        let p = AmbientPoint::real(&[-1.0, 0.0]);
        let q = AmbientPoint::real(&[-(-2f64).exp(), 0.0]);
        assert_relative_eq!(log_ratio_lower_bound(&d, &p, &q).unwrap(), 2.0, max_relative = 1e-15);
        assert_eq!(log_ratio_lower_bound(&d, &p, &p).unwrap(), 0.0);
        let p2 = AmbientPoint::real(&[-2.0, 0.0]);
        assert_relative_eq!(log_ratio_lower_bound(&d, &p2, &p).unwrap(), 2f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn disc_upper_bound_examples() {
        let d = quartic();
        let z = AmbientPoint::real(&[-1.0, 0.0]);
        let u = disc_upper_bound(&d, &z, &TangentVector::real(&[1.0, 0.0]), 64).unwrap();
        assert_relative_eq!(u, 1.0, max_relative = 1e-12);
        let u = disc_upper_bound(&d, &z, &TangentVector::real(&[0.0, 1.0]), 64).unwrap();
        assert_relative_eq!(u, 1.0, max_relative = 1e-12);
        let x = TangentVector::new(vec![c(0.3, -0.2), c(0.5, 0.1)]);
        let base = disc_upper_bound(&d, &z, &x, 64).unwrap();
        let lam = c(0.0, -2.5);
        let scaled = disc_upper_bound(&d, &z, &x.scaled(lam), 64).unwrap();
        assert_relative_eq!(scaled, lam.norm() * base, max_relative = 1e-9);
        assert_eq!(
            disc_upper_bound(&d, &z, &TangentVector::real(&[0.0, 0.0]), 64),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn metric_sup_error_examples() {
        let d = quartic();
        let region = Polydisc::new(&AmbientPoint::real(&[-1.0, 0.0]), vec![0.5, 0.6]).unwrap();
        let same = metric_sup_error(&d, &d, &region, 3, 6).unwrap();
        assert_eq!(same.sup_abs_error, 0.0);
        assert!(same.grid_points > 0);

        let perturbed = |eps: f64| {
            let p = HermitianPolynomial::from_terms(&[(2, 2, c(1.0, 0.0)), (1, 1, c(eps, 0.0))]).unwrap();
            ModelDomain::new(2, p, "").unwrap()
        };
        let e1 = metric_sup_error(&d, &perturbed(0.1), &region, 3, 6).unwrap().sup_abs_error;
        let e2 = metric_sup_error(&d, &perturbed(0.01), &region, 3, 6).unwrap().sup_abs_error;
        assert!(e1 > 0.0 && e2 > 0.0 && e2 < e1, "{e1} {e2}");

        let far = Polydisc::new(&AmbientPoint::real(&[5.0, 0.0]), vec![0.5, 0.5]).unwrap();
        assert_eq!(metric_sup_error(&d, &d, &far, 2, 2), Err(Error::EmptyIntersection));
    }

    #[test]
    fn disc_bound_is_comparable_to_metric() {
        let d = quartic();
        let region = Polydisc::new(&AmbientPoint::real(&[-1.0, 0.0]), vec![0.9, 1.0]).unwrap();
        let rep = empirical_comparability(&d, &region, 64, 3).unwrap();
        assert!(rep.max_ratio.is_finite() && rep.max_ratio < 10.0, "{rep:?}");
        assert!(rep.min_ratio > 0.0);
    }

    fn arb_point() -> impl Strategy<Value = AmbientPoint> {
        (-3.0f64..-0.01, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -0.5f64..0.5, -0.5f64..0.5).prop_map(
            |(a, b, e, f, g, h)| {
                let d = ModelDomain::radial(3, 2);
                let x = d.boundary_from_slice(&[c(e, f), c(g, h)], b).unwrap();
                x.pushed_in(-a)
            },
        )
    }

    fn arb_vector() -> impl Strategy<Value = TangentVector> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3).prop_map(|v| TangentVector(v.into_iter().map(|(a, b)| c(a, b)).collect()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn absolute_homogeneity(z in arb_point(), x in arb_vector(), lr in -3.0f64..3.0, li in -3.0f64..3.0) {
            let d = ModelDomain::radial(3, 2);
            let lam = c(lr, li);
            let a = catlin_metric(&d, &z, &x.scaled(lam)).unwrap();
            let b = lam.norm() * catlin_metric(&d, &z, &x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300) + 1e-300);
        }

        #[test]
        fn positivity_and_subadditivity(z in arb_point(), x in arb_vector(), y in arb_vector()) {
            let d = ModelDomain::radial(3, 2);
            let mx = catlin_metric(&d, &z, &x).unwrap();
            let my = catlin_metric(&d, &z, &y).unwrap();
            if !x.is_zero() { prop_assert!(mx > 0.0); }
            let mxy = catlin_metric(&d, &z, &x.add(&y)).unwrap();
            prop_assert!(mxy <= mx + my + 1e-10 * (1.0 + mx + my));
        }
    }
}
