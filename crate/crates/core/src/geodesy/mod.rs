//! Curves, their `M_{r_P}`-length, closed-form normal geodesics and
//! bracketed distance estimates.
//!
//! Distances are never reported as a single number: every estimator returns
//! a [`DistanceEstimate`] whose lower end is a certified lower bound (see
//! [`lower`]) and whose upper end is the length of an explicit witness curve.

pub mod composite;
pub mod graph;
pub mod lower;
pub mod quasi;
pub mod variational;

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::domain::{AmbientPoint, ModelDomain};
use crate::error::{Error, Result};
use crate::finsler::metric_raw;
use crate::interval::Interval;

pub use composite::{distance, quick_upper_bound, seed_curves, DistanceOptions, GraphCheck};
pub use graph::{distance_graph, from_chart, to_chart, ChartBox, GraphSpacing};
pub use lower::{busemann_lower_bound, certified_lower_bound};
pub use quasi::{verify_quasi_geodesic, QuasiGeodesicReport};
pub use variational::{distance_variational, shorten, ShorteningTrace, VariationalOptions};

/// Simpson subintervals per segment before the doubling check.
pub const DEFAULT_QUADRATURE_ORDER: usize = 8;
/// Relative agreement required between the `n` and `2n` Simpson sums.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;
const QUADRATURE_MAX_DEPTH: u32 = 48;

/// Relative optimality slack granted to the curve-shortening solvers.
pub const SOLVER_SLACK: f64 = 0.02;

/// A sampled piecewise-linear curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePath {
    params: Vec<f64>,
    points: Vec<AmbientPoint>,
}

impl CurvePath {
    pub fn new(params: Vec<f64>, points: Vec<AmbientPoint>) -> Result<Self> {
        if params.len() != points.len() {
            return Err(Error::InvalidCurve(format!(
                "{} params for {} points",
                params.len(),
                points.len()
            )));
        }
        if points.len() < 2 {
            return Err(Error::InvalidCurve("a curve needs at least two samples".into()));
        }
        if params.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidCurve("parameters must be strictly ascending".into()));
        }
        let dim = points[0].dim();
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::InvalidCurve("points of mixed dimension".into()));
        }
        Ok(Self { params, points })
    }

    /// Parameters `0, 1, 2, …`.
    pub fn from_points(points: Vec<AmbientPoint>) -> Result<Self> {
        let params = (0..points.len()).map(|i| i as f64).collect();
        Self::new(params, points)
    }

    /// Like [`CurvePath::from_points`] after dropping consecutive duplicates.
    pub(crate) fn from_points_dedup(points: Vec<AmbientPoint>) -> Result<Self> {
        let mut pts: Vec<AmbientPoint> = Vec::with_capacity(points.len());
        for p in points {
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        if pts.len() == 1 {
            pts.push(pts[0].clone());
        }
        Self::from_points(pts)
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[AmbientPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> &AmbientPoint {
        &self.points[0]
    }

    pub fn end(&self) -> &AmbientPoint {
        &self.points[self.points.len() - 1]
    }

    /// Same trace traversed backwards, parameters mirrored.
    pub fn reversed(&self) -> Self {
        let t_end = self.params[self.params.len() - 1];
        let t0 = self.params[0];
        Self {
            params: self.params.iter().rev().map(|t| t0 + t_end - t).collect(),
            points: self.points.iter().rev().cloned().collect(),
        }
    }

    /// `self` followed by `other`; `other` must start where `self` ends.
    pub fn concat(&self, other: &CurvePath) -> Result<Self> {
        if self.end() != other.start() {
            return Err(Error::InvalidCurve("curves do not join".into()));
        }
        let mut pts = self.points.clone();
        pts.extend(other.points[1..].iter().cloned());
        Self::from_points(pts)
    }

    /// CSV rows `t, re z0, im z0, …, re z_d, im z_d`, preceded by an optional
    /// `#` comment line.
    pub fn write_csv<W: Write>(&self, out: W, comment: Option<&str>) -> Result<()> {
        let mut out = out;
        if let Some(c) = comment {
            for line in c.lines() {
                writeln!(out, "# {line}")?;
            }
        }
        let dim = self.points[0].dim();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        for k in 0..dim {
            header.push(format!("re_z{k}"));
            header.push(format!("im_z{k}"));
        }
        w.write_record(&header)?;
        for (t, p) in self.params.iter().zip(&self.points) {
            let mut row = vec![format!("{t:e}")];
            for c in p.iter() {
                row.push(format!("{:e}", c.re));
                row.push(format!("{:e}", c.im));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`CurvePath::write_csv`]; `#` lines are skipped.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).has_headers(true).from_reader(input);
        let mut params = Vec::new();
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() < 3 || vals.len().is_multiple_of(2) {
                return Err(Error::Parse(format!("curve row with {} fields", vals.len())));
            }
            params.push(vals[0]);
            points.push(AmbientPoint(vals[1..].chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()));
        }
        Self::new(params, points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    Graph,
    Variational,
    Composite,
}

/// A certified distance bracket with the curve realizing its upper end.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceEstimate {
    pub lower: f64,
    pub upper: f64,
    pub witness: CurvePath,
    pub method: DistanceMethod,
}

impl DistanceEstimate {
    pub fn bracket(&self) -> Interval {
        Interval::new(self.lower, self.upper)
    }

    pub fn reversed(&self) -> Self {
        Self { witness: self.witness.reversed(), ..self.clone() }
    }
}

/// `(S_n, S_2n)` Simpson sums on `[lo, hi]` sharing the `2n + 1` nodes.
fn simpson_pair<F>(f: &mut F, lo: f64, hi: f64, n: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 2 * n;
    let h = (hi - lo) / m as f64;
    let vals: Vec<f64> = (0..=m).map(|i| f(lo + h * i as f64)).collect::<Result<_>>()?;
    let fine = (0..m)
        .step_by(2)
        .map(|i| vals[i] + 4.0 * vals[i + 1] + vals[i + 2])
        .sum::<f64>()
        * h
        / 3.0;
    let coarse = (0..m)
        .step_by(4)
        .map(|i| vals[i] + 4.0 * vals[i + 2] + vals[i + 4])
        .sum::<f64>()
        * (2.0 * h)
        / 3.0;
    Ok((coarse, fine))
}

fn adaptive<F>(f: &mut F, lo: f64, hi: f64, n: usize, depth: u32) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (coarse, fine) = simpson_pair(f, lo, hi, n)?;
    if (fine - coarse).abs() <= QUADRATURE_TOLERANCE * fine.abs() + 1e-300 || depth >= QUADRATURE_MAX_DEPTH {
        return Ok(fine);
    }
    let mid = 0.5 * (lo + hi);
    Ok(adaptive(f, lo, mid, n, depth + 1)? + adaptive(f, mid, hi, n, depth + 1)?)
}

/// Length of the straight segment `a → b` on raw coordinates.
pub(crate) fn segment_length_raw(d: &ModelDomain, a: &[Complex64], b: &[Complex64], order: usize) -> Result<f64> {
    let x: Vec<Complex64> = b.iter().zip(a).map(|(u, v)| u - v).collect();
    if x.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
        return Ok(0.0);
    }
    let mut buf = a.to_vec();
    let mut f = |t: f64| {
        for ((slot, &base), &dir) in buf.iter_mut().zip(a).zip(&x) {
            *slot = base + dir * t;
        }
        metric_raw(d, &buf, &x).ok_or_else(|| Error::CurveExitsDomain { value: d.r(&buf) })
    };
    let order = order.max(2) + order % 2;
    adaptive(&mut f, 0.0, 1.0, order, 0)
}

/// Non-adaptive composite Simpson with `2·order` subintervals; `None` when a
/// node is not interior. Used where only relative comparisons matter.
pub(crate) fn segment_length_fixed(d: &ModelDomain, a: &[Complex64], b: &[Complex64], order: usize) -> Option<f64> {
    let x: Vec<Complex64> = b.iter().zip(a).map(|(u, v)| u - v).collect();
    let mut buf = a.to_vec();
    let mut f = |t: f64| {
        for ((slot, &base), &dir) in buf.iter_mut().zip(a).zip(&x) {
            *slot = base + dir * t;
        }
        metric_raw(d, &buf, &x).ok_or(Error::ZeroVector)
    };
    simpson_pair(&mut f, 0.0, 1.0, order.max(2)).ok().map(|(_, fine)| fine)
}

pub fn segment_length(d: &ModelDomain, a: &AmbientPoint, b: &AmbientPoint, order: usize) -> Result<f64> {
    d.check_dim(a.dim())?;
    d.check_dim(b.dim())?;
    segment_length_raw(d, a, b, order)
}

/// Per-segment lengths of the piecewise-linear interpolant.
pub fn segment_lengths(d: &ModelDomain, c: &CurvePath, quadrature_order: usize) -> Result<Vec<f64>> {
    d.check_dim(c.start().dim())?;
    c.points.windows(2).map(|w| segment_length_raw(d, &w[0], &w[1], quadrature_order)).collect()
}

/// `M_{r_P}`-length of the piecewise-linear interpolant through the samples.
pub fn curve_length(d: &ModelDomain, c: &CurvePath, quadrature_order: usize) -> Result<f64> {
    Ok(segment_lengths(d, c, quadrature_order)?.iter().sum())
}

/// Tolerance for accepting a point as a boundary point.
pub(crate) fn boundary_tolerance(x: &AmbientPoint) -> f64 {
    1e-10 * (1.0 + x.iter().map(|c| c.norm()).fold(0.0, f64::max).powi(2))
}

/// `σ(t) = x − (a·e^{−t}, '0)` sampled at `samples` equispaced `t` in `t_range`.
pub fn normal_geodesic(
    d: &ModelDomain,
    x: &AmbientPoint,
    a: f64,
    t_range: (f64, f64),
    samples: usize,
) -> Result<CurvePath> {
    let r = d.defining_value(x)?;
    if r.abs() > boundary_tolerance(x) {
        return Err(Error::NotBoundaryPoint { value: r });
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("normal geodesic scale a = {a} must be > 0")));
    }
    let (t0, t1) = t_range;
    if !(t0 < t1) || samples < 2 {
        return Err(Error::InvalidArgument("normal geodesic needs t0 < t1 and >= 2 samples".into()));
    }
    let params: Vec<f64> = (0..samples).map(|i| t0 + (t1 - t0) * i as f64 / (samples - 1) as f64).collect();
    let points = params.iter().map(|t| x.pushed_in(a * (-t).exp())).collect();
    CurvePath::new(params, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quartic() -> ModelDomain {
        ModelDomain::radial(2, 2)
    }

    #[test]
    fn curve_validation() {
        let p = AmbientPoint::real(&[-1.0, 0.0]);
        assert!(CurvePath::new(vec![0.0], vec![p.clone()]).is_err());
        assert!(CurvePath::new(vec![0.0, 0.0], vec![p.clone(), p.clone()]).is_err());
        assert!(CurvePath::new(vec![0.0, 1.0], vec![p.clone()]).is_err());
        assert!(CurvePath::new(vec![0.0, 1.0], vec![p.clone(), p]).is_ok());
    }

    #[test]
    fn straight_segment_has_log_length() {
        let d = quartic();
        let c = CurvePath::from_points(vec![AmbientPoint::real(&[-1.0, 0.0]), AmbientPoint::real(&[-2.0, 0.0])]).unwrap();
        let len = curve_length(&d, &c, DEFAULT_QUADRATURE_ORDER).unwrap();
        assert_relative_eq!(len, 2f64.ln(), max_relative = 1e-7);
        // Simpson overestimates 1/s-type integrands
        assert!(len >= 2f64.ln());
    }

    #[test]
    fn normal_geodesic_has_unit_speed() {
        let d = quartic();
        let x = AmbientPoint::real(&[0.0, 0.0]);
        let c = normal_geodesic(&d, &x, 1.0, (0.0, 2.0), 9).unwrap();
        for (t, p) in c.params().iter().zip(c.points()) {
            assert_relative_eq!(d.defining_value(p).unwrap(), -(-t).exp(), max_relative = 1e-15);
        }
        assert_relative_eq!(curve_length(&d, &c, DEFAULT_QUADRATURE_ORDER).unwrap(), 2.0, max_relative = 1e-7);

        let x = AmbientPoint::real(&[-1.0, 1.0]);
        let c = normal_geodesic(&d, &x, 1.0, (0.0, 1.0), 2).unwrap();
        assert_eq!(c.start(), &AmbientPoint::real(&[-2.0, 1.0]));
        assert_eq!(d.defining_value(c.start()).unwrap(), -1.0);
        assert!(c.points().iter().all(|p| d.contains(p).unwrap()));
    }

    #[test]
    fn normal_geodesic_rejects_interior_base() {
        let d = quartic();
        let err = normal_geodesic(&d, &AmbientPoint::real(&[-1.0, 0.0]), 1.0, (0.0, 1.0), 4);
        assert!(matches!(err, Err(Error::NotBoundaryPoint { .. })));
    }

    #[test]
    fn degenerate_segment_has_zero_length() {
        let d = quartic();
        let p = AmbientPoint::real(&[-1.0, 0.0]);
        let c = CurvePath::from_points(vec![p.clone(), p]).unwrap();
        assert_eq!(curve_length(&d, &c, 8).unwrap(), 0.0);
    }

    #[test]
    fn exiting_curve_is_rejected() {
        let d = quartic();
        let c = CurvePath::from_points(vec![AmbientPoint::real(&[-0.1, -1.0]), AmbientPoint::real(&[-0.1, 1.0])]).unwrap();
        assert!(matches!(curve_length(&d, &c, 8), Err(Error::CurveExitsDomain { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let d = quartic();
        let c = normal_geodesic(&d, &AmbientPoint::real(&[-1.0, 1.0]), 0.5, (0.0, 3.0), 5).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf, Some("test curve")).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# test curve\nt,re_z0,im_z0,re_z1,im_z1\n"));
        let back = CurvePath::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, c);
    }
}
