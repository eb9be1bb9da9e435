//! Gromov products, δ estimates and boundary divergence probes.
//!
//! Every quantity is an interval built from distance brackets, and every
//! comparison takes the conservative end, so a reported δ over-estimates the
//! δ of the bracketed metric.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use dashmap::DashMap;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{AmbientPoint, ModelDomain};
use crate::error::{Error, Result};
use crate::geodesy::{distance, quick_upper_bound, segment_lengths, CurvePath, DistanceOptions};
use crate::interval::Interval;

/// Caveat attached to every δ report.
pub const NEAR_GEODESIC_CAVEAT: &str =
    "distances are solver brackets and witnesses are near-geodesics; delta bounds the true delta only up to the solver optimality gap";

/// A symmetric distance bracket provider.
pub trait DistanceOracle: Sync {
    fn bracket(&self, p: &AmbientPoint, q: &AmbientPoint) -> Result<Interval>;
}

/// Exact metric given by a closure.
pub struct FnOracle<F>(pub F);

impl<F> DistanceOracle for FnOracle<F>
where
    F: Fn(&AmbientPoint, &AmbientPoint) -> f64 + Sync,
{
    fn bracket(&self, p: &AmbientPoint, q: &AmbientPoint) -> Result<Interval> {
        Ok(Interval::point((self.0)(p, q)))
    }
}

type PairKey = (Vec<u64>, Vec<u64>);

/// Brackets from [`distance`], memoized by unordered point pair.
pub struct CatlinOracle<'a> {
    domain: &'a ModelDomain,
    opts: DistanceOptions,
    cache: DashMap<PairKey, Interval>,
    solver_calls: AtomicUsize,
}

impl<'a> CatlinOracle<'a> {
    pub fn new(domain: &'a ModelDomain, opts: DistanceOptions) -> Self {
        Self { domain, opts, cache: DashMap::new(), solver_calls: AtomicUsize::new(0) }
    }

    pub fn domain(&self) -> &ModelDomain {
        self.domain
    }

    /// Number of uncached solver runs so far.
    pub fn solver_calls(&self) -> usize {
        self.solver_calls.load(AtomicOrdering::Relaxed)
    }

    /// Every bracket computed so far, in no particular order.
    pub fn cached_brackets(&self) -> Vec<Interval> {
        self.cache.iter().map(|e| *e.value()).collect()
    }

    fn key(p: &AmbientPoint, q: &AmbientPoint) -> PairKey {
        let (a, b) = (p.key(), q.key());
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

impl DistanceOracle for CatlinOracle<'_> {
    fn bracket(&self, p: &AmbientPoint, q: &AmbientPoint) -> Result<Interval> {
        let key = Self::key(p, q);
        if let Some(hit) = self.cache.get(&key) {
            return Ok(*hit);
        }
        self.solver_calls.fetch_add(1, AtomicOrdering::Relaxed);
        let est = distance(self.domain, p, q, &self.opts)?;
        let iv = Interval::new(est.lower, est.upper);
        self.cache.insert(key, iv);
        Ok(iv)
    }
}

/// `(x|y)_o = ½(d(x,o) + d(y,o) − d(x,y))` in interval arithmetic.
pub fn gromov_product(
    oracle: &dyn DistanceOracle,
    x: &AmbientPoint,
    y: &AmbientPoint,
    o: &AmbientPoint,
) -> Result<Interval> {
    let dxo = oracle.bracket(x, o)?;
    let dyo = oracle.bracket(y, o)?;
    let dxy = oracle.bracket(x, y)?;
    Ok(product_from(dxo, dyo, dxy))
}

fn product_from(dxo: Interval, dyo: Interval, dxy: Interval) -> Interval {
    (dxo + dyo - dxy) * 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMethod {
    FourPoint,
    ThinTriangle,
}

impl DeltaMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DeltaMethod::FourPoint => "four_point",
            DeltaMethod::ThinTriangle => "thin_triangle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaEstimate {
    pub delta: f64,
    /// Quadruples (or side samples) examined.
    pub quadruples: usize,
    pub witness: Vec<AmbientPoint>,
    pub method: DeltaMethod,
    pub caveat: String,
}

/// Pairwise brackets, computed in parallel in a fixed order.
fn distance_matrix(points: &[AmbientPoint], oracle: &dyn DistanceOracle) -> Result<Vec<Vec<Interval>>> {
    let n = points.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let vals: Vec<Interval> = pairs.par_iter().map(|&(i, j)| oracle.bracket(&points[i], &points[j])).collect::<Result<_>>()?;
    let mut m = vec![vec![Interval::point(0.0); n]; n];
    for (&(i, j), v) in pairs.iter().zip(vals) {
        m[i][j] = v;
        m[j][i] = v;
    }
    Ok(m)
}

/// `max min((x|z)_w, (y|z)_w) − (x|y)_w` over ordered quadruples of distinct
/// points, taking upper ends of the minimum and the lower end of `(x|y)_w`.
pub fn four_point_delta(points: &[AmbientPoint], oracle: &dyn DistanceOracle) -> Result<DeltaEstimate> {
    let n = points.len();
    if n < 4 {
        return Err(Error::InvalidArgument(format!("four-point delta needs at least 4 points, got {n}")));
    }
    let m = distance_matrix(points, oracle)?;
    let gp = |x: usize, y: usize, w: usize| product_from(m[x][w], m[y][w], m[x][y]);
    let (best, arg) = (0..n)
        .into_par_iter()
        .map(|w| {
            let mut best = (f64::NEG_INFINITY, [0usize; 4]);
            for x in (0..n).filter(|&x| x != w) {
                for y in (0..n).filter(|&y| y != w && y != x) {
                    let xy = gp(x, y, w).lo;
                    for z in (0..n).filter(|&z| z != w && z != x && z != y) {
                        let defect = gp(x, z, w).hi.min(gp(y, z, w).hi) - xy;
                        if defect > best.0 {
                            best = (defect, [x, y, z, w]);
                        }
                    }
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, [0; 4]), |a, b| if b.0 > a.0 { b } else { a });
    Ok(DeltaEstimate {
        delta: best.max(0.0),
        quadruples: n * (n - 1) * (n - 2) * (n - 3),
        witness: arg.iter().map(|&i| points[i].clone()).collect(),
        method: DeltaMethod::FourPoint,
        caveat: NEAR_GEODESIC_CAVEAT.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThinTriangleOptions {
    /// Solver settings for the three sides.
    pub sides: DistanceOptions,
    /// Solver settings for the point-to-side queries.
    pub probes: DistanceOptions,
    /// Points tested on each side.
    pub side_samples: usize,
    /// Coarse samples per side before the golden-section refinement.
    pub cover_samples: usize,
}

impl Default for ThinTriangleOptions {
    fn default() -> Self {
        Self { sides: DistanceOptions::default(), probes: DistanceOptions::quick(), side_samples: 12, cover_samples: 48 }
    }
}

/// A witness curve parametrized by cumulative `M`-length, linear within
/// each segment.
struct ArcLength {
    pts: Vec<AmbientPoint>,
    cum: Vec<f64>,
}

impl ArcLength {
    fn new(d: &ModelDomain, c: &CurvePath, order: usize) -> Result<Self> {
        let seg = segment_lengths(d, c, order)?;
        let mut cum = Vec::with_capacity(seg.len() + 1);
        cum.push(0.0);
        for l in seg {
            cum.push(cum.last().expect("nonempty") + l);
        }
        Ok(Self { pts: c.points().to_vec(), cum })
    }

    fn total(&self) -> f64 {
        *self.cum.last().expect("nonempty")
    }

    fn at(&self, u: f64) -> AmbientPoint {
        let n = self.pts.len();
        if u <= 0.0 || self.total() == 0.0 {
            return self.pts[0].clone();
        }
        if u >= self.total() {
            return self.pts[n - 1].clone();
        }
        let i = self.cum.partition_point(|&c| c <= u).clamp(1, n - 1) - 1;
        let len = self.cum[i + 1] - self.cum[i];
        let t = if len > 0.0 { ((u - self.cum[i]) / len).clamp(0.0, 1.0) } else { 0.0 };
        AmbientPoint::lerp(&self.pts[i], &self.pts[i + 1], t)
    }

    /// `count` points evenly spread by length (endpoints included).
    fn samples(&self, count: usize) -> Vec<AmbientPoint> {
        if count < 2 {
            return vec![self.pts[0].clone(); count.max(1)];
        }
        (0..count).map(|k| self.at(self.total() * k as f64 / (count - 1) as f64)).collect()
    }
}

/// Upper bound on the distance from `p` to a side: the best of `coarse`
/// evenly spaced samples, then a golden-section search by length between
/// its neighbours.
fn distance_to_side(d: &ModelDomain, p: &AmbientPoint, side: &ArcLength, coarse: usize, opts: &DistanceOptions) -> Result<f64> {
    let dist = |u: f64| -> Result<f64> {
        let q = side.at(u);
        if *p == q {
            Ok(0.0)
        } else {
            Ok(quick_upper_bound(d, p, &q, opts)?.0)
        }
    };
    let total = side.total();
    let m = coarse.max(2);
    let h = total / (m - 1) as f64;
    let vals: Vec<f64> = (0..m).map(|k| dist(h * k as f64)).collect::<Result<_>>()?;
    let (k, mut best) = vals.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty side");
    if total == 0.0 {
        return Ok(best);
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((k as f64 - 1.0).max(0.0) * h, ((k + 1) as f64 * h).min(total));
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (dist(x1)?, dist(x2)?);
    for _ in 0..GOLDEN_STEPS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = dist(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = dist(x2)?;
        }
        best = best.min(f1).min(f2);
    }
    Ok(best)
}

const GOLDEN_STEPS: usize = 20;

/// Largest distance from a sampled point of one side to the union of the
/// other two, over all three sides.
pub fn thin_triangle_delta(
    d: &ModelDomain,
    x: &AmbientPoint,
    y: &AmbientPoint,
    z: &AmbientPoint,
    opts: &ThinTriangleOptions,
) -> Result<DeltaEstimate> {
    let order = opts.sides.variational.quadrature_order;
    let (xy, yz, zx) = (distance(d, x, y, &opts.sides)?, distance(d, y, z, &opts.sides)?, distance(d, z, x, &opts.sides)?);
    let sides = [xy.witness, yz.witness, zx.witness];
    let arcs: Vec<ArcLength> = sides.iter().map(|c| ArcLength::new(d, c, order)).collect::<Result<_>>()?;
    let samples: Vec<Vec<AmbientPoint>> = arcs.iter().map(|a| a.samples(opts.side_samples.max(2))).collect();
    let jobs: Vec<(usize, usize)> = (0..3).flat_map(|s| (0..samples[s].len()).map(move |k| (s, k))).collect();
    let vals: Vec<f64> = jobs
        .par_iter()
        .map(|&(s, k)| {
            let p = &samples[s][k];
            let a = distance_to_side(d, p, &arcs[(s + 1) % 3], opts.cover_samples, &opts.probes)?;
            let b = distance_to_side(d, p, &arcs[(s + 2) % 3], opts.cover_samples, &opts.probes)?;
            Ok(a.min(b))
        })
        .collect::<Result<_>>()?;
    let (arg, delta) = vals
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let (s, k) = jobs[arg];
    Ok(DeltaEstimate {
        delta: delta.max(0.0),
        quadruples: jobs.len(),
        witness: vec![x.clone(), y.clone(), z.clone(), samples[s][k].clone()],
        method: DeltaMethod::ThinTriangle,
        caveat: NEAR_GEODESIC_CAVEAT.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceProbeRow {
    pub n: u32,
    pub p: AmbientPoint,
    pub q: AmbientPoint,
    pub product_lower: f64,
    pub product_upper: f64,
}

/// `(p_n|q_n)_o` for `p_n = ξ⁺ − (e^{−n}, '0)`, `q_n = ξ⁻ − (e^{−n}, '0)`, `n = 1..=n_max`.
pub fn boundary_divergence_probe(
    oracle: &CatlinOracle<'_>,
    xi_plus: &AmbientPoint,
    xi_minus: &AmbientPoint,
    o: &AmbientPoint,
    n_max: u32,
) -> Result<Vec<DivergenceProbeRow>> {
    let d = oracle.domain();
    for xi in [xi_plus, xi_minus] {
        let r = d.defining_value(xi)?;
        if r.abs() > crate::geodesy::boundary_tolerance(xi) {
            return Err(Error::NotBoundaryPoint { value: r });
        }
    }
    d.depth(o)?;
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let h = (-f64::from(n)).exp();
            let p = xi_plus.pushed_in(h);
            let q = xi_minus.pushed_in(h);
            let g = gromov_product(oracle, &p, &q, o)?;
            Ok(DivergenceProbeRow { n, p, q, product_lower: g.lo, product_upper: g.hi })
        })
        .collect()
}

/// CSV with columns `method, points, delta, seed`.
pub fn write_delta_csv<W: Write>(rows: &[(DeltaEstimate, usize, Option<u64>)], out: W, comment: Option<&str>) -> Result<()> {
    let mut out = out;
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "points", "delta", "seed"])?;
    for (est, points, seed) in rows {
        w.write_record([
            est.method.name().to_string(),
            points.to_string(),
            format!("{:e}", est.delta),
            seed.map_or(String::new(), |s| s.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::SOLVER_SLACK;

    fn line_oracle() -> FnOracle<impl Fn(&AmbientPoint, &AmbientPoint) -> f64 + Sync> {
        FnOracle(|p: &AmbientPoint, q: &AmbientPoint| (p[0].re - q[0].re).abs())
    }

    #[test]
    fn product_arithmetic() {
        let g = product_from(Interval::point(3.0), Interval::point(4.0), Interval::point(5.0));
        assert_eq!(g, Interval::point(1.0));
        let o = AmbientPoint::real(&[0.0, 0.0]);
        let x = AmbientPoint::real(&[2.5, 0.0]);
        assert!(gromov_product(&line_oracle(), &x, &x, &o).unwrap().contains(2.5));
    }

    #[test]
    fn trees_have_zero_delta() {
        let weights = [0.5, 1.0, 2.0, 3.5, 0.25];
        let star = FnOracle(move |p: &AmbientPoint, q: &AmbientPoint| {
            let (i, j) = (p[0].re as usize, q[0].re as usize);
            if i == j {
                0.0
            } else {
                weights[i] + weights[j]
            }
        });
        let pts: Vec<AmbientPoint> = (0..5).map(|i| AmbientPoint::real(&[i as f64, 0.0])).collect();
        assert_eq!(four_point_delta(&pts, &star).unwrap().delta, 0.0);
        let line: Vec<AmbientPoint> = [0.0, 1.0, 2.5, 7.0].iter().map(|&t| AmbientPoint::real(&[t, 0.0])).collect();
        assert_eq!(four_point_delta(&line, &line_oracle()).unwrap().delta, 0.0);
    }

    #[test]
    fn cycle_has_positive_delta() {
        // four points on a circle of circumference 4 with the arc metric
        let cyc = FnOracle(|p: &AmbientPoint, q: &AmbientPoint| {
            let k = (p[0].re - q[0].re).abs();
            k.min(4.0 - k)
        });
        let pts: Vec<AmbientPoint> = (0..4).map(|i| AmbientPoint::real(&[i as f64, 0.0])).collect();
        let est = four_point_delta(&pts, &cyc).unwrap();
        assert_eq!(est.delta, 1.0);
        assert_eq!(est.quadruples, 24);
        assert!(four_point_delta(&pts[..3], &cyc).is_err());
    }

    #[test]
    fn normal_line_is_flat_and_order_free() {
        let d = ModelDomain::radial(2, 2);
        let oracle = CatlinOracle::new(&d, DistanceOptions::default());
        let x = AmbientPoint::real(&[0.0, 0.0]);
        let pts: Vec<AmbientPoint> = [0.0, 0.7, 1.9, 3.0].iter().map(|&t: &f64| x.pushed_in((-t).exp())).collect();
        let est = four_point_delta(&pts, &oracle).unwrap();
        assert!(est.delta <= 2.0 * SOLVER_SLACK, "{}", est.delta);
        let mut rev = pts.clone();
        rev.reverse();
        rev.swap(0, 2);
        assert_eq!(four_point_delta(&rev, &oracle).unwrap().delta, est.delta);
        let g = gromov_product(&oracle, &pts[1], &pts[2], &pts[0]).unwrap();
        assert!(g.lo <= 0.7 + 1e-9 && 0.7 <= g.hi + 1e-9 && g.width() <= 3.0 * SOLVER_SLACK, "{g:?}");
    }

    #[test]
    fn thin_triangles_on_the_normal_line() {
        let d = ModelDomain::radial(2, 2);
        let x = AmbientPoint::real(&[0.0, 0.0]);
        let p: Vec<AmbientPoint> = [0.0, 1.2, 3.0].iter().map(|&t: &f64| x.pushed_in((-t).exp())).collect();
        let opts = ThinTriangleOptions::default();
        let est = thin_triangle_delta(&d, &p[0], &p[1], &p[2], &opts).unwrap();
        assert!(est.delta <= 2.0 * SOLVER_SLACK, "{}", est.delta);
        let deg = thin_triangle_delta(&d, &p[0], &p[0], &p[2], &opts).unwrap();
        assert!(deg.delta <= SOLVER_SLACK, "{}", deg.delta);
    }

    #[test]
    fn probe_rows() {
        let d = ModelDomain::radial(2, 2);
        let oracle = CatlinOracle::new(&d, DistanceOptions::quick());
        let o = AmbientPoint::real(&[-1.0, 0.0]);
        let xi = AmbientPoint::real(&[0.0, 0.0]);
        assert!(boundary_divergence_probe(&oracle, &xi, &xi, &o, 0).unwrap().is_empty());
        let rows = boundary_divergence_probe(&oracle, &xi, &xi, &o, 4).unwrap();
        assert!(rows.windows(2).all(|w| w[1].product_lower > w[0].product_lower));
        assert!(rows.iter().all(|r| r.product_lower <= r.product_upper));
    }
}
