//! Distance lower bounds beyond the log ratio.
//!
//! For an anchor `a` and a radial profile `Ψ` the function
//!
//! `f(z) = log s − 2·log(s + φ(z))`, `s = −r_P(z)`,
//! `φ(z) = Ψ(|z₁ − a₁|) + ¼·Σ_α |z_α − a_α|²`
//!
//! satisfies `|df(X)| ≤ M_{r_P}(z; X)` as long as
//! `Ψ'(ρ) ≤ ½·inf_s (s + Ψ(ρ))·Σ_ℓ (A_ℓ(ρ)/s)^{1/ℓ}`, where `A_ℓ(ρ)` is the
//! smallest cap on the circle `|z₁ − a₁| = ρ`. Then `|f(p) − f(q)|` bounds the
//! distance from below. The profile is the larger of a closed-form
//! homogeneous solution (driven by the constant top-order cap) and an Euler
//! integration of the inequality with the right side frozen at the start of
//! each step.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::domain::{AmbientPoint, ModelDomain};
use crate::error::Result;
use crate::finsler::log_ratio_lower_bound;

const PROFILE_STEPS: usize = 256;
const CIRCLE_SAMPLES: usize = 64;
const GOLDEN_ITERATIONS: usize = 90;
const LOG_DEPTH_WINDOW: f64 = 40.0;

/// Radial profile sampled on `[0, ρ_max]`, constant beyond.
struct RadialProfile {
    h: f64,
    values: Vec<f64>,
}

impl RadialProfile {
    fn build(d: &ModelDomain, center: Complex64, rho_max: f64) -> Self {
        let deg = d.degree();
        let caps = d.caps();
        let a_top = caps.cap(deg, center);
        let l = f64::from(deg);
        let base_coeff = a_top * 2f64.powf(-l) * (l - 1.0).powf(1.0 - l);
        let base = |rho: f64| base_coeff * rho.powf(l);

        let h = rho_max / PROFILE_STEPS as f64;
        let min_caps: Vec<Vec<(f64, f64)>> = (0..=PROFILE_STEPS)
            .map(|i| {
                let rho = h * i as f64;
                (2..=deg)
                    .map(|order| {
                        let amin = if rho == 0.0 {
                            caps.cap(order, center)
                        } else {
                            (0..CIRCLE_SAMPLES)
                                .map(|k| {
                                    let z = center + Complex64::from_polar(rho, 2.0 * PI * k as f64 / CIRCLE_SAMPLES as f64);
                                    caps.cap(order, z)
                                })
                                .fold(f64::INFINITY, f64::min)
                        };
                        (amin, 1.0 / f64::from(order))
                    })
                    .filter(|&(a, _)| a > 0.0)
                    .collect()
            })
            .collect();

        let mut values = Vec::with_capacity(PROFILE_STEPS + 1);
        values.push(0.0);
        for i in 0..PROFILE_STEPS {
            let psi = values[i];
            let g = growth_rate(&min_caps[i], psi).min(growth_rate(&min_caps[i + 1], psi));
            let next = (psi + h * 0.5 * g).max(base(h * (i + 1) as f64));
            values.push(next);
        }
        Self { h, values }
    }

    fn eval(&self, rho: f64) -> f64 {
        if self.h == 0.0 {
            return 0.0;
        }
        let x = rho / self.h;
        if x >= PROFILE_STEPS as f64 {
            return self.values[PROFILE_STEPS];
        }
        let i = x.floor() as usize;
        let t = x - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

/// `inf_s (s + ψ)·Σ_ℓ (A_ℓ/s)^{1/ℓ}`; convex in `log s`, so a golden-section
/// search on a wide window around `log ψ` finds it.
fn growth_rate(caps: &[(f64, f64)], psi: f64) -> f64 {
    if psi <= 0.0 || caps.is_empty() {
        return 0.0;
    }
    let g = |u: f64| {
        let s = u.exp();
        (s + psi) * caps.iter().map(|&(a, e)| (a / s).powf(e)).sum::<f64>()
    };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (psi.ln() - LOG_DEPTH_WINDOW, psi.ln() + LOG_DEPTH_WINDOW);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = g(x2);
        }
    }
    // evaluated minima overestimate the infimum by a relative O(window·φ^n)
    f1.min(f2).min(g(lo)).min(g(hi)) * (1.0 - 1e-9)
}

fn potential(profile: &RadialProfile, anchor: &AmbientPoint, z: &AmbientPoint, s: f64) -> f64 {
    let rho = (z[1] - anchor[1]).norm();
    let tail: f64 = z[2..].iter().zip(&anchor[2..]).map(|(a, b)| (a - b).norm_sqr()).sum();
    let phi = profile.eval(rho) + 0.25 * tail;
    s.ln() - 2.0 * (s + phi).ln()
}

/// `|f(p) − f(q)|` for the potential anchored at `anchor`.
pub fn busemann_lower_bound(d: &ModelDomain, anchor: &AmbientPoint, p: &AmbientPoint, q: &AmbientPoint) -> Result<f64> {
    d.check_dim(anchor.dim())?;
    let sp = d.depth(p)?;
    let sq = d.depth(q)?;
    let rho_max = (p[1] - anchor[1]).norm().max((q[1] - anchor[1]).norm());
    let profile = RadialProfile::build(d, anchor[1], rho_max);
    Ok((potential(&profile, anchor, p, sp) - potential(&profile, anchor, q, sq)).abs())
}

/// Largest of the log-ratio bound and the potentials anchored at `p` and `q`.
pub fn certified_lower_bound(d: &ModelDomain, p: &AmbientPoint, q: &AmbientPoint) -> Result<f64> {
    let base = log_ratio_lower_bound(d, p, q)?;
    if p[1..] == q[1..] {
        return Ok(base);
    }
    let bp = busemann_lower_bound(d, p, p, q)?;
    let bq = busemann_lower_bound(d, q, p, q)?;
    Ok(base.max(bp).max(bq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::{curve_length, CurvePath};
    use approx::assert_relative_eq;

    #[test]
    fn reduces_to_log_ratio_on_a_normal_line() {
        let d = ModelDomain::radial(2, 2);
        let p = AmbientPoint::real(&[-1.0, 0.3]);
        let q = AmbientPoint::real(&[-3.0, 0.3]);
        assert_relative_eq!(
            certified_lower_bound(&d, &p, &q).unwrap(),
            log_ratio_lower_bound(&d, &p, &q).unwrap(),
            epsilon = 0.0
        );
    }

    #[test]
    fn closed_form_profile_matches_homogeneous_solution() {
        let d = ModelDomain::radial(2, 2);
        let prof = RadialProfile::build(&d, Complex64::new(0.0, 0.0), 1.0);
        assert!(prof.eval(1.0) >= 1.0 / 108.0 * (1.0 - 1e-12));
        let d = ModelDomain::radial(2, 1);
        let prof = RadialProfile::build(&d, Complex64::new(0.0, 0.0), 2.0);
        assert!(prof.eval(2.0) >= 0.25 * 4.0 * (1.0 - 1e-12));
    }

    #[test]
    fn grows_for_tangential_separation() {
        let d = ModelDomain::radial(2, 2);
        let p = AmbientPoint::real(&[-1e-4, 0.0]);
        let q = AmbientPoint::real(&[-1e-4 - 1.0, 1.0]);
        let lb = certified_lower_bound(&d, &p, &q).unwrap();
        assert!(lb > log_ratio_lower_bound(&d, &p, &q).unwrap() + 1.0);
    }

    #[test]
    fn never_exceeds_a_curve_length() {
        let d = ModelDomain::radial(3, 2);
        let p = d.boundary_from_slice(&[Complex64::new(0.2, 0.0), Complex64::new(0.1, 0.0)], 0.0).unwrap().pushed_in(0.01);
        let q = d.boundary_from_slice(&[Complex64::new(-0.3, 0.0), Complex64::new(0.4, 0.0)], 0.0).unwrap().pushed_in(0.02);
        let up = |h: f64| {
            let mut pts = Vec::new();
            for k in 0..=20 {
                let t = k as f64 / 20.0;
                pts.push(p.pushed_in((h - 0.01) * t));
            }
            let top_p = p.pushed_in(h - 0.01);
            let top_q = q.pushed_in(h - 0.02);
            for k in 1..20 {
                pts.push(AmbientPoint::lerp(&top_p, &top_q, k as f64 / 20.0));
            }
            for k in 0..=20 {
                pts.push(q.pushed_in((h - 0.02) * (1.0 - k as f64 / 20.0)));
            }
            curve_length(&d, &CurvePath::from_points_dedup(pts).unwrap(), 8).unwrap()
        };
        let best = [0.02, 0.05, 0.1, 0.2, 0.5].iter().map(|&h| up(h)).fold(f64::INFINITY, f64::min);
        let lb = certified_lower_bound(&d, &p, &q).unwrap();
        assert!(lb <= best, "{lb} > {best}");
        assert!(lb > 0.5 * log_ratio_lower_bound(&d, &p, &q).unwrap());
    }
}
