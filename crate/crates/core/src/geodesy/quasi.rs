//! Empirical `(A, B)`-quasi-geodesic check
//! `A⁻¹|t − s| − B ≤ d(σ(t), σ(s)) ≤ A|t − s| + B` on sampled parameter pairs.

use rayon::prelude::*;
use serde::Serialize;

use super::composite::{distance, DistanceOptions};
use super::CurvePath;
use crate::domain::ModelDomain;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiGeodesicReport {
    /// Smallest `A ≥ 1` satisfying both sides with the requested `B`.
    pub a_required: f64,
    /// Smallest `B ≥ 0` satisfying both sides with the requested `A`.
    pub b_required: f64,
    /// Parameter pair with the largest violation (or smallest margin).
    pub worst_pair: (f64, f64),
    pub pairs: usize,
    pub pass: bool,
}

/// Evaluates the two-sided inequality on up to `max_pairs` sample pairs
/// (`0` means all). The lower side uses the bracket's upper end and the upper
/// side its lower end, so a failure is never caused by solver slack alone.
pub fn verify_quasi_geodesic(
    d: &ModelDomain,
    curve: &CurvePath,
    a: f64,
    b: f64,
    max_pairs: usize,
    opts: &DistanceOptions,
) -> Result<QuasiGeodesicReport> {
    if !(a >= 1.0) || !(b >= 0.0) {
        return Err(Error::InvalidArgument(format!("need A >= 1 and B >= 0, got A = {a}, B = {b}")));
    }
    let n = curve.len();
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    if max_pairs > 0 && pairs.len() > max_pairs {
        let stride = pairs.len() as f64 / max_pairs as f64;
        pairs = (0..max_pairs).map(|k| pairs[(k as f64 * stride) as usize]).collect();
    }
    let pts = curve.points();
    let ts = curve.params();
    let brackets: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| distance(d, &pts[i], &pts[j], opts).map(|e| (e.lower, e.upper)))
        .collect::<Result<_>>()?;
    let mut a_req: f64 = 1.0;
    let mut b_req: f64 = 0.0;
    let mut worst = (f64::NEG_INFINITY, (ts[0], ts[n - 1]));
    for (&(i, j), &(lo, up)) in pairs.iter().zip(&brackets) {
        let dt = (ts[j] - ts[i]).abs();
        let excess = (lo - a * dt).max(dt / a - up);
        b_req = b_req.max(excess);
        if dt > 0.0 {
            a_req = a_req.max((lo - b) / dt);
            a_req = a_req.max(if up + b > 0.0 { dt / (up + b) } else { f64::INFINITY });
        }
        if excess > worst.0 {
            worst = (excess, (ts[i], ts[j]));
        }
    }
    Ok(QuasiGeodesicReport { a_required: a_req, b_required: b_req, worst_pair: worst.1, pairs: pairs.len(), pass: b_req <= b })
}
