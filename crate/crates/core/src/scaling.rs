//! Rescaling of model domains.
//!
//! At a boundary point `ξ` the polynomial normal form `Φ_ξ` is exact, and the
//! anisotropic dilation `Λ = diag(1/ε, 1/τ, 1/√ε, …)` turns the domain into
//! another model domain whose polynomial has coefficients
//! `a_{j,k}(ξ)·ε^{-1}·τ^{j+k}`. At infinity the diagonal dilation `χ_n`
//! multiplies the degree-`k` part of `P` by `n^{k/deg − 1}`.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::domain::{AmbientPoint, ModelDomain, TangentVector};
use crate::error::{Error, Result};
use crate::finsler::metric_sup_error;
use crate::geodesy::boundary_tolerance;
use crate::poly::{BivariatePolynomial, HermitianPolynomial};
use crate::region::Polydisc;

/// `Φ_ξ`: `ζ₀ = w₀ + 2Σ_j h_j w₁^j + Σ_α 2ξ̄_α w_α`, `ζ_k = w_k`, `w = z − ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialCoordinates {
    pub base_point: AmbientPoint,
    /// `h_1, h_2, …`.
    pub holo_coeffs: Vec<Complex64>,
    /// `2ξ̄_α` for `α = 2..d`.
    pub linear_alpha: Vec<Complex64>,
    pub centered_poly: HermitianPolynomial,
}

fn holo_sum(h: &[Complex64], w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pow = w;
    for c in h {
        acc += c * pow;
        pow *= w;
    }
    acc
}

fn holo_derivative(h: &[Complex64], w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    for (j, c) in h.iter().enumerate() {
        acc += c * pow * (j + 1) as f64;
        pow *= w;
    }
    acc
}

impl SpecialCoordinates {
    pub fn dim(&self) -> usize {
        self.base_point.dim()
    }

    /// `Φ_ξ(ξ + w)` for an offset `w`.
    pub fn forward_offset(&self, w: &[Complex64]) -> AmbientPoint {
        let mut z0 = w[0] + 2.0 * holo_sum(&self.holo_coeffs, w[1]);
        for (l, wa) in self.linear_alpha.iter().zip(&w[2..]) {
            z0 += l * wa;
        }
        let mut out = w.to_vec();
        out[0] = z0;
        AmbientPoint(out)
    }

    pub fn forward(&self, z: &AmbientPoint) -> AmbientPoint {
        let w: Vec<Complex64> = z.iter().zip(self.base_point.iter()).map(|(a, b)| a - b).collect();
        self.forward_offset(&w)
    }

    /// Offset `w = Φ_ξ^{-1}(ζ) − ξ`.
    pub fn inverse_offset(&self, zeta: &[Complex64]) -> Vec<Complex64> {
        let mut w0 = zeta[0] - 2.0 * holo_sum(&self.holo_coeffs, zeta[1]);
        for (l, za) in self.linear_alpha.iter().zip(&zeta[2..]) {
            w0 -= l * za;
        }
        let mut w = zeta.to_vec();
        w[0] = w0;
        w
    }

    pub fn inverse(&self, zeta: &AmbientPoint) -> AmbientPoint {
        AmbientPoint(self.inverse_offset(zeta).iter().zip(self.base_point.iter()).map(|(w, b)| w + b).collect())
    }

    /// `dΦ_ξ` at `z` applied to `x`.
    pub fn push_forward(&self, z: &AmbientPoint, x: &TangentVector) -> TangentVector {
        let w1 = z[1] - self.base_point[1];
        let mut x0 = x[0] + 2.0 * holo_derivative(&self.holo_coeffs, w1) * x[1];
        for (l, xa) in self.linear_alpha.iter().zip(&x[2..]) {
            x0 += l * xa;
        }
        let mut out = x.0.clone();
        out[0] = x0;
        TangentVector(out)
    }

    /// `dΦ_ξ^{-1}` at `ζ` applied to `y`.
    pub fn pull_back(&self, zeta: &AmbientPoint, y: &TangentVector) -> TangentVector {
        let mut x0 = y[0] - 2.0 * holo_derivative(&self.holo_coeffs, zeta[1]) * y[1];
        for (l, ya) in self.linear_alpha.iter().zip(&y[2..]) {
            x0 -= l * ya;
        }
        let mut out = y.0.clone();
        out[0] = x0;
        TangentVector(out)
    }

    /// `Re ζ₀ + centered(ζ₁) + Σ|ζ_α|²`, which equals `r_P∘Φ_ξ^{-1}`.
    pub fn normal_form_value(&self, zeta: &AmbientPoint) -> f64 {
        zeta[0].re + self.centered_poly.value(zeta[1]) + zeta[2..].iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// `A_ℓ(ξ)` for `ℓ = 2..deg`.
    pub fn coefficient_caps(&self) -> Vec<(u32, f64)> {
        (2..=self.centered_poly.degree())
            .map(|l| (l, self.centered_poly.cap_coefficient(l).unwrap_or(0.0)))
            .collect()
    }
}

fn check_boundary(d: &ModelDomain, xi: &AmbientPoint) -> Result<()> {
    let r = d.defining_value(xi)?;
    if r.abs() > boundary_tolerance(xi) {
        return Err(Error::NotBoundaryPoint { value: r });
    }
    Ok(())
}

pub fn special_coordinates(d: &ModelDomain, xi: &AmbientPoint) -> Result<SpecialCoordinates> {
    check_boundary(d, xi)?;
    let rc = d.poly().recenter(xi[1]);
    Ok(SpecialCoordinates {
        base_point: xi.clone(),
        holo_coeffs: rc.holo_part,
        linear_alpha: xi[2..].iter().map(|c| 2.0 * c.conj()).collect(),
        centered_poly: rc.centered,
    })
}

/// The order and cap realizing `τ = min_ℓ (δ/A_ℓ)^{1/ℓ}`.
fn tau_order(caps: &[(u32, f64)], delta: f64) -> Result<(u32, f64, f64)> {
    caps.iter()
        .filter(|&&(_, a)| a > 0.0)
        .map(|&(l, a)| (l, a, (delta / a).powf(1.0 / f64::from(l))))
        .min_by(|x, y| x.2.total_cmp(&y.2))
        .ok_or(Error::InfiniteTypePoint)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be > 0")));
    }
    Ok(())
}

/// `τ(ξ, δ)` from the coefficient caps of the normal form at `ξ`.
pub fn tau(d: &ModelDomain, xi: &AmbientPoint, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let sc = special_coordinates(d, xi)?;
    Ok(tau_order(&sc.coefficient_caps(), delta)?.2)
}

/// `η(ξ, δ)`, the same minimum over the derivative caps `A^P_ℓ(ξ₁)`.
pub fn eta(d: &ModelDomain, xi: &AmbientPoint, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_boundary(d, xi)?;
    let caps: Vec<(u32, f64)> = d.caps().caps(xi[1]).collect();
    Ok(tau_order(&caps, delta)?.2)
}

/// `(δ, τ(ξ, δ), √δ, …)`.
pub fn polydisc_radii(d: &ModelDomain, xi: &AmbientPoint, delta: f64) -> Result<Vec<f64>> {
    let t = tau(d, xi, delta)?;
    let mut radii = vec![delta, t];
    radii.resize(d.dim(), delta.sqrt());
    Ok(radii)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EngulfingReport {
    pub delta: f64,
    pub c_e_empirical: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Smallest `δ'` with `ζ ∈ R_{δ'}(ξ)`.
fn containing_delta(zeta: &AmbientPoint, caps: &[(u32, f64)]) -> f64 {
    let mut out = zeta[0].norm();
    let r1 = zeta[1].norm();
    for &(l, a) in caps {
        out = out.max(a * r1.powi(l as i32));
    }
    for c in &zeta[2..] {
        out = out.max(c.norm_sqr());
    }
    out
}

/// Samples boundary points `y ∈ Q_δ(ξ)` (the first one is `ξ` itself) and
/// reports the smallest `C ≥ 1` with `Q_δ(y) ⊂ Q_{Cδ}(ξ)` for every sample.
/// `Q_δ(y)` is represented by a tensor grid of `R_δ(y)` pulled back through `Φ_y`.
pub fn engulfing_probe(d: &ModelDomain, xi: &AmbientPoint, delta: f64, samples: usize, seed: u64) -> Result<EngulfingReport> {
    check_delta(delta)?;
    let sx = special_coordinates(d, xi)?;
    let caps_x = sx.coefficient_caps();
    let radii_x = polydisc_radii(d, xi, delta)?;
    let zero = AmbientPoint(vec![Complex64::new(0.0, 0.0); d.dim()]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ys = vec![xi.clone()];
    let mut attempts = 0usize;
    while ys.len() < samples.max(1) && attempts < 200 * samples.max(1) {
        attempts += 1;
        let mut zeta: Vec<Complex64> = (0..d.dim())
            .map(|k| {
                let rho = radii_x[k] * rng.random::<f64>().sqrt();
                Complex64::from_polar(rho, 2.0 * std::f64::consts::PI * rng.random::<f64>())
            })
            .collect();
        zeta[0] = Complex64::new(0.0, radii_x[0] * (2.0 * rng.random::<f64>() - 1.0));
        let zp = AmbientPoint(zeta.clone());
        zeta[0].re = -sx.normal_form_value(&zp);
        if zeta[0].norm() > radii_x[0] {
            continue;
        }
        ys.push(sx.inverse(&AmbientPoint(zeta)));
    }
    let mut worst: f64 = 1.0;
    for y in &ys {
        let y = d.boundary_projection(y)?;
        let sy = special_coordinates(d, &y)?;
        let radii_y: Vec<f64> = polydisc_radii(d, &y, delta)?.into_iter().map(|r| r * (1.0 - 1e-9)).collect();
        let grid = Polydisc::new(&zero, radii_y)?.grid_points(1);
        for g in &grid {
            let z = sy.inverse(g);
            let zeta = sx.forward(&z);
            worst = worst.max(containing_delta(&zeta, &caps_x) / delta);
        }
    }
    Ok(EngulfingReport { delta, c_e_empirical: worst, samples: ys.len(), pass: worst.is_finite() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngulfingScan {
    pub reports: Vec<EngulfingReport>,
    /// Max over min of the empirical constants across the scanned `δ`.
    pub spread: f64,
    pub pass: bool,
}

/// Repeats [`engulfing_probe`] over several `δ`; passes when every constant
/// is finite and they stay within a factor 2 of each other.
pub fn engulfing_scan(d: &ModelDomain, xi: &AmbientPoint, deltas: &[f64], samples: usize, seed: u64) -> Result<EngulfingScan> {
    let reports: Vec<EngulfingReport> =
        deltas.iter().map(|&delta| engulfing_probe(d, xi, delta, samples, seed)).collect::<Result<_>>()?;
    let hi = reports.iter().map(|r| r.c_e_empirical).fold(0.0, f64::max);
    let lo = reports.iter().map(|r| r.c_e_empirical).fold(f64::INFINITY, f64::min);
    let spread = hi / lo;
    let pass = !reports.is_empty() && reports.iter().all(|r| r.pass) && spread <= 2.0;
    Ok(EngulfingScan { reports, spread, pass })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStep {
    pub n: u64,
    pub u: AmbientPoint,
    pub eps: f64,
    pub xi: AmbientPoint,
    pub tau: f64,
    /// Diagonal of `Λ`: `(1/ε, 1/τ, 1/√ε, …)`.
    pub dilation: Vec<f64>,
    pub scaled: ModelDomain,
    pub v: AmbientPoint,
    pub coords: SpecialCoordinates,
}

impl ScalingStep {
    /// `ψ = Λ∘Φ_ξ`.
    pub fn psi(&self, z: &AmbientPoint) -> AmbientPoint {
        let zeta = self.coords.forward(z);
        AmbientPoint(zeta.iter().zip(&self.dilation).map(|(c, s)| c * s).collect())
    }

    pub fn psi_inverse(&self, eta: &AmbientPoint) -> AmbientPoint {
        let zeta = AmbientPoint(eta.iter().zip(&self.dilation).map(|(c, s)| c / s).collect());
        self.coords.inverse(&zeta)
    }

    /// `dψ^{-1}` at `η` applied to `y`.
    pub fn pull_back(&self, eta: &AmbientPoint, y: &TangentVector) -> TangentVector {
        let zeta = AmbientPoint(eta.iter().zip(&self.dilation).map(|(c, s)| c / s).collect());
        let yz = TangentVector(y.iter().zip(&self.dilation).map(|(c, s)| c / s).collect());
        self.coords.pull_back(&zeta, &yz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    /// Base points eventually constant; limit taken in closed form.
    Analytic,
    /// Last computed step.
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSequence {
    pub steps: Vec<ScalingStep>,
    pub limit: ModelDomain,
    pub limit_kind: LimitKind,
}

/// `u_n = ξ − (1/n, '0)` for each `n`.
pub fn normal_approach(d: &ModelDomain, xi: &AmbientPoint, ns: &[u64]) -> Result<Vec<(u64, AmbientPoint)>> {
    check_boundary(d, xi)?;
    ns.iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::InvalidArgument("n must be >= 1".into()));
            }
            Ok((n, xi.pushed_in(1.0 / n as f64)))
        })
        .collect()
}

/// One rescaling step at the interior point `u`.
pub fn scale_step(d: &ModelDomain, n: u64, u: &AmbientPoint) -> Result<ScalingStep> {
    let r = d.defining_value(u)?;
    if !(r < 0.0) {
        return Err(Error::PointNotInterior { value: r });
    }
    let eps = -r;
    let xi = u.pushed_in(-eps);
    let xi_r = d.defining_value(&xi)?;
    if xi_r.abs() > boundary_tolerance(&xi).max(1e-10) {
        return Err(Error::NotNormalApproach);
    }
    let coords = special_coordinates(d, &xi).map_err(|e| match e {
        Error::NotBoundaryPoint { .. } => Error::NotNormalApproach,
        other => other,
    })?;
    let (order, cap, tau) = tau_order(&coords.coefficient_caps(), eps)?;
    // τ^m/ε = ε^{m/ℓ−1}·A_ℓ^{−m/ℓ}, exact at m = ℓ
    let lf = f64::from(order);
    let scaled_poly = coords
        .centered_poly
        .scale_by_degree(|m| eps.powf(f64::from(m) / lf - 1.0) * cap.powf(-f64::from(m) / lf));
    let scaled = ModelDomain::new_unchecked(d.dim(), scaled_poly, format!("{}@n={n}", d.label()));
    let mut dilation = vec![1.0 / eps, 1.0 / tau];
    dilation.resize(d.dim(), 1.0 / eps.sqrt());
    // Φ_ξ(u) = (−ε, '0) exactly, so ψ(u) = (−1, '0)
    let mut v = vec![Complex64::new(0.0, 0.0); d.dim()];
    v[0] = Complex64::new(-1.0, 0.0);
    Ok(ScalingStep { n, u: u.clone(), eps, xi, tau, dilation, scaled, v: AmbientPoint(v), coords })
}

/// Rescaling along a sequence of interior points plus its coefficient-wise limit.
pub fn scale_at_point(d: &ModelDomain, seq: &[(u64, AmbientPoint)]) -> Result<ScalingSequence> {
    if seq.is_empty() {
        return Err(Error::InvalidArgument("empty scaling sequence".into()));
    }
    let steps: Vec<ScalingStep> = seq.iter().map(|(n, u)| scale_step(d, *n, u)).collect::<Result<_>>()?;
    let last = steps.last().expect("nonempty");
    let constant_base = steps.iter().all(|s| s.xi[1..] == last.xi[1..]);
    if constant_base {
        let caps = last.coords.coefficient_caps();
        let (order, cap) = caps
            .iter()
            .copied()
            .find(|&(_, a)| a > 0.0)
            .ok_or(Error::InfiniteTypePoint)?;
        let limit_poly = HermitianPolynomial::from_bivariate_unchecked(BivariatePolynomial::from_terms(
            last.coords
                .centered_poly
                .terms()
                .filter(|&((j, k), _)| j + k == order)
                .map(|(jk, c)| (jk, c / cap)),
        ));
        let limit = ModelDomain::new(d.dim(), limit_poly, format!("{}-limit", d.label()))
            .map_err(|e| Error::DegenerateLimit(e.to_string()))?;
        Ok(ScalingSequence { steps, limit, limit_kind: LimitKind::Analytic })
    } else {
        let limit = last.scaled.clone();
        Ok(ScalingSequence { steps, limit, limit_kind: LimitKind::Empirical })
    }
}

/// `χ_n`: degree-`k` part of `P` scaled by `n^{k/deg − 1}`.
pub fn blowdown_at_infinity(d: &ModelDomain, n: u64) -> Result<ModelDomain> {
    if n == 0 {
        return Err(Error::InvalidArgument("blowdown needs n >= 1".into()));
    }
    let deg = f64::from(d.degree());
    let nf = n as f64;
    let poly = d.poly().scale_by_degree(|k| if f64::from(k) == deg { 1.0 } else { nf.powf(f64::from(k) / deg - 1.0) });
    Ok(ModelDomain::new_unchecked(d.dim(), poly, format!("{}@blowdown={n}", d.label())))
}

/// The top homogeneous part of `P`.
pub fn limit_at_infinity(d: &ModelDomain) -> Result<ModelDomain> {
    let top = d.poly().homogeneous_part(d.degree());
    ModelDomain::new(d.dim(), top, format!("{}-top", d.label())).map_err(|e| Error::DegenerateLimit(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub eps: Option<f64>,
    pub tau: Option<f64>,
    pub sup_r_error: f64,
    pub sup_metric_error: f64,
}

/// One member of a rescaled sequence.
#[derive(Debug, Clone, Copy)]
pub struct SequenceMember<'a> {
    pub n: u64,
    pub eps: Option<f64>,
    pub tau: Option<f64>,
    pub domain: &'a ModelDomain,
}

impl<'a> From<&'a ScalingStep> for SequenceMember<'a> {
    fn from(s: &'a ScalingStep) -> Self {
        Self { n: s.n, eps: Some(s.eps), tau: Some(s.tau), domain: &s.scaled }
    }
}

/// Per member: sup over the region grid of `|r_n − r_target|` and of the
/// metric difference on points interior to both.
pub fn convergence_report(
    members: &[SequenceMember<'_>],
    target: &ModelDomain,
    region: &Polydisc,
    grid: usize,
    directions: usize,
) -> Result<Vec<ConvergenceRow>> {
    target.check_dim(region.dim())?;
    let points = region.grid_points(grid);
    let mut rows: Vec<ConvergenceRow> = members
        .iter()
        .map(|m| {
            m.domain.check_dim(target.dim())?;
            let sup_r = points.iter().map(|z| (m.domain.r(z) - target.r(z)).abs()).fold(0.0, f64::max);
            let metric = metric_sup_error(m.domain, target, region, grid, directions)?;
            Ok(ConvergenceRow { n: m.n, eps: m.eps, tau: m.tau, sup_r_error: sup_r, sup_metric_error: metric.sup_abs_error })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

/// CSV with columns `n, eps, tau, sup_r_error, sup_metric_error`.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], out: W, comment: Option<&str>) -> Result<()> {
    let mut out = out;
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "eps", "tau", "sup_r_error", "sup_metric_error"])?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
    for r in rows {
        w.write_record([
            r.n.to_string(),
            opt(r.eps),
            opt(r.tau),
            format!("{:e}", r.sup_r_error),
            format!("{:e}", r.sup_metric_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finsler::catlin_metric;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normal_form_of_the_siegel_domain() {
        let d = ModelDomain::radial(2, 1);
        let xi = AmbientPoint::real(&[-1.0, 1.0]);
        let sc = special_coordinates(&d, &xi).unwrap();
        assert_eq!(sc.holo_coeffs, vec![c(1.0, 0.0)]);
        assert_eq!(sc.centered_poly, HermitianPolynomial::radial(1, 1.0));
        assert_eq!(sc.forward(&xi), AmbientPoint::real(&[0.0, 0.0]));
        assert!(sc.forward(&xi.pushed_in(0.3)).distance_euclid(&AmbientPoint::real(&[-0.3, 0.0])) < 1e-15);
    }

    #[test]
    fn normal_form_at_the_flat_point_is_the_identity() {
        let d = ModelDomain::radial(2, 2);
        let sc = special_coordinates(&d, &AmbientPoint::real(&[0.0, 0.0])).unwrap();
        assert!(sc.holo_coeffs.iter().all(|h| h.norm() == 0.0));
        assert_eq!(&sc.centered_poly, d.poly());
        let z = AmbientPoint::new(vec![c(-0.3, 0.2), c(0.1, -0.4)]);
        assert_eq!(sc.forward(&z), z);
    }

    #[test]
    fn normal_form_absorbs_the_linear_tail() {
        let d = ModelDomain::radial(3, 2);
        let sc = special_coordinates(&d, &AmbientPoint::real(&[-1.0, 0.0, 1.0])).unwrap();
        assert_eq!(sc.linear_alpha, vec![c(2.0, 0.0)]);
        assert_eq!(&sc.centered_poly, d.poly());
    }

    #[test]
    fn rejects_interior_base() {
        let d = ModelDomain::radial(2, 2);
        assert!(matches!(
            special_coordinates(&d, &AmbientPoint::real(&[-1.0, 0.0])),
            Err(Error::NotBoundaryPoint { .. })
        ));
    }

    #[test]
    fn tau_examples() {
        let d = ModelDomain::radial(2, 2);
        assert_relative_eq!(tau(&d, &AmbientPoint::real(&[0.0, 0.0]), 1e-4).unwrap(), 0.1, max_relative = 1e-14);
        assert_relative_eq!(tau(&d, &AmbientPoint::real(&[-1.0, 1.0]), 0.01).unwrap(), 0.05, max_relative = 1e-14);
        let d3 = ModelDomain::radial(3, 2);
        let r = polydisc_radii(&d3, &AmbientPoint::real(&[0.0, 0.0, 0.0]), 1e-4).unwrap();
        assert_eq!(r[0], 1e-4);
        assert_relative_eq!(r[1], 0.1, max_relative = 1e-14);
        assert_relative_eq!(r[2], 1e-2, max_relative = 1e-14);
        let r = polydisc_radii(&d3, &AmbientPoint::real(&[0.0, 0.0, 0.0]), 1.0).unwrap();
        assert_eq!(r, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn tau_is_within_the_type_window() {
        let d = ModelDomain::radial(2, 2);
        let xi = d.boundary_from_slice(&[c(0.4, 0.3)], 0.0).unwrap();
        for k in 2..8 {
            let delta = 10f64.powi(-k);
            let t = tau(&d, &xi, delta).unwrap();
            let e = eta(&d, &xi, delta).unwrap();
            assert!(t >= 0.1 * delta.sqrt() && t <= 10.0 * delta.powf(0.25));
            assert!(t / e > 0.1 && t / e < 10.0);
        }
    }

    #[test]
    fn self_similar_quartic() {
        let d = ModelDomain::radial(2, 2);
        let seq: Vec<(u64, AmbientPoint)> = [10u64, 100, 1000, 10000]
            .iter()
            .map(|&n| (n, AmbientPoint::real(&[-1.0 / n as f64, 0.0])))
            .collect();
        let out = scale_at_point(&d, &seq).unwrap();
        for s in &out.steps {
            assert_eq!(s.scaled.poly(), d.poly());
            assert_eq!(s.v, AmbientPoint::real(&[-1.0, 0.0]));
            assert_eq!(s.xi, AmbientPoint::real(&[0.0, 0.0]));
            assert_relative_eq!(s.tau, (s.n as f64).powf(-0.25), max_relative = 1e-14);
            assert_eq!(s.scaled.defining_value(&s.v).unwrap(), -1.0);
        }
        assert_eq!(out.limit_kind, LimitKind::Analytic);
        assert_eq!(out.limit.poly(), d.poly());
    }

    #[test]
    fn siegel_limit_at_a_strongly_pseudoconvex_point() {
        let d = ModelDomain::radial(2, 2);
        let xi = AmbientPoint::real(&[-1.0, 1.0]);
        let out = scale_at_point(&d, &normal_approach(&d, &xi, &[10, 1000, 1_000_000]).unwrap()).unwrap();
        let last = out.steps.last().unwrap();
        assert!((last.scaled.poly().coefficient(1, 1).re - 1.0).abs() < 1e-3);
        assert!((last.scaled.poly().cap_coefficient(3).unwrap()) < 0.005);
        assert_eq!(out.limit.poly(), &HermitianPolynomial::radial(1, 1.0));
    }

    #[test]
    fn blowdown_scales_lower_degrees() {
        let p = HermitianPolynomial::from_terms(&[(2, 2, c(1.0, 0.0)), (1, 1, c(1.0, 0.0))]).unwrap();
        let d = ModelDomain::new(2, p, "mixed").unwrap();
        let b = blowdown_at_infinity(&d, 4).unwrap();
        assert_eq!(b.poly().coefficient(1, 1), c(0.5, 0.0));
        assert_eq!(b.poly().coefficient(2, 2), c(1.0, 0.0));
        assert_eq!(blowdown_at_infinity(&d, 1).unwrap().poly(), d.poly());
        let q = ModelDomain::radial(2, 2);
        assert_eq!(blowdown_at_infinity(&q, 17).unwrap().poly(), q.poly());
        assert_eq!(limit_at_infinity(&d).unwrap().poly(), q.poly());
        let e = ModelDomain::new(
            2,
            HermitianPolynomial::from_terms(&[(2, 2, c(1.0, 0.0)), (3, 1, c(0.25, 0.0))]).unwrap(),
            "",
        )
        .unwrap();
        assert_eq!(limit_at_infinity(&e).unwrap().poly(), e.poly());
    }

    #[test]
    fn blowdown_convergence_report() {
        let p = HermitianPolynomial::from_terms(&[(2, 2, c(1.0, 0.0)), (1, 1, c(1.0, 0.0))]).unwrap();
        let d = ModelDomain::new(2, p, "mixed").unwrap();
        let target = limit_at_infinity(&d).unwrap();
        let blown: Vec<(u64, ModelDomain)> = [1u64, 10, 100].iter().map(|&n| (n, blowdown_at_infinity(&d, n).unwrap())).collect();
        let members: Vec<SequenceMember> =
            blown.iter().map(|(n, m)| SequenceMember { n: *n, eps: None, tau: None, domain: m }).collect();
        let region = Polydisc::new(&AmbientPoint::real(&[-2.0, 0.0]), vec![1.0, 1.0]).unwrap();
        let rows = convergence_report(&members, &target, &region, 4, 6).unwrap();
        for row in &rows {
            assert_relative_eq!(row.sup_r_error, (row.n as f64).powf(-0.5), max_relative = 1e-9);
        }
        assert!(rows.windows(2).all(|w| w[1].sup_metric_error <= w[0].sup_metric_error));
        let mut buf = Vec::new();
        write_convergence_csv(&rows, &mut buf, None).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,eps,tau,sup_r_error,sup_metric_error\n1,,,"));
    }

    #[test]
    fn engulfing_at_the_flat_point() {
        let d = ModelDomain::radial(2, 2);
        let xi = AmbientPoint::real(&[0.0, 0.0]);
        let only_xi = engulfing_probe(&d, &xi, 1e-4, 1, 1).unwrap();
        assert!((only_xi.c_e_empirical - 1.0).abs() < 1e-6);
        let scan = engulfing_scan(&d, &xi, &[1e-3, 1e-4, 1e-5], 200, 3).unwrap();
        assert!(scan.pass, "{scan:?}");
        let more = engulfing_probe(&d, &xi, 1e-4, 400, 3).unwrap();
        let base = engulfing_probe(&d, &xi, 1e-4, 200, 3).unwrap();
        assert!(more.c_e_empirical <= 1.5 * base.c_e_empirical);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn normal_form_identity(a in -1.0f64..1.0, b in -1.0f64..1.0, t in -1.0f64..1.0,
                                zr in -1.0f64..1.0, zi in -1.0f64..1.0, z0 in -2.0f64..1.0, y0 in -1.0f64..1.0) {
            let p = HermitianPolynomial::from_terms(&[(2, 2, c(1.0, 0.0)), (3, 1, c(0.2, 0.1)), (1, 1, c(0.5, 0.0))]).unwrap();
            let d = ModelDomain::new(3, p, "").unwrap();
            let xi = d.boundary_from_slice(&[c(a, b), c(t, 0.3)], 0.7).unwrap();
            let sc = special_coordinates(&d, &xi).unwrap();
            let z = AmbientPoint::new(vec![c(z0, y0), c(zr, zi), c(0.2, -t)]);
            let zeta = sc.forward(&z);
            let lhs = d.defining_value(&z).unwrap();
            prop_assert!((sc.normal_form_value(&zeta) - lhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
            prop_assert!(sc.inverse(&zeta).distance_euclid(&z) <= 1e-12);
        }

        #[test]
        fn metric_pulls_back_exactly(a in -1.0f64..1.0, n in 1u64..100000, er in -1.0f64..1.0, ei in -1.0f64..1.0,
                                     depth in 0.05f64..2.0, x0 in -1.0f64..1.0, x1 in -1.0f64..1.0, x2 in -1.0f64..1.0) {
            let d = ModelDomain::radial(3, 2);
            let xi = d.boundary_from_slice(&[c(a, 0.2), c(0.3, a)], 0.1).unwrap();
            let u = xi.pushed_in(1.0 / n as f64);
            let step = scale_step(&d, n, &u).unwrap();
            let eta = step.scaled.boundary_from_slice(&[c(er, ei), c(0.5 * ei, er)], 0.3).unwrap().pushed_in(depth);
            let y = TangentVector::new(vec![c(x0, x1), c(x1, x2), c(x2, x0)]);
            let lhs = catlin_metric(&step.scaled, &eta, &y).unwrap();
            let z = step.psi_inverse(&eta);
            let rhs = catlin_metric(&d, &z, &step.pull_back(&eta, &y)).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs, "{} vs {}", lhs, rhs);
            prop_assert!(step.psi(&z).distance_euclid(&eta) <= 1e-6 * (1.0 + eta[0].norm()));
        }
    }
}
