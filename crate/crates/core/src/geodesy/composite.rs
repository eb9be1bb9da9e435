//! The default distance estimator: build several seed curves, shorten the
//! best one, optionally compare against the lattice search, and bracket the
//! result with the certified lower bound.

use std::cmp::Ordering;

use super::graph::{from_chart, to_chart, ChartBox, GraphSpacing};
use super::lower::certified_lower_bound;
use super::variational::{shorten, VariationalOptions};
use super::{curve_length, distance_graph, CurvePath, DistanceEstimate, DistanceMethod};
use crate::domain::{AmbientPoint, ModelDomain};
use crate::error::{Error, Result};

/// Lattice search settings used as an extra upper-bound candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCheck {
    pub spacing: GraphSpacing,
    pub log_below: f64,
    pub log_above: f64,
    pub tangential_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceOptions {
    pub variational: VariationalOptions,
    pub graph: Option<GraphCheck>,
    /// Samples on straight and across-the-top seed pieces.
    pub seed_points: usize,
    /// Depth ratio between consecutive samples on vertical seed legs.
    pub leg_ratio: f64,
    /// Ratio between consecutive trial heights of down-across-up seeds.
    pub height_ratio: f64,
    /// Midpoint refinements, each followed by another shortening pass.
    pub refinements: usize,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self {
            variational: VariationalOptions::default(),
            graph: None,
            seed_points: 16,
            leg_ratio: 1.6,
            height_ratio: 2f64.sqrt(),
            refinements: 1,
        }
    }
}

impl DistanceOptions {
    /// Seeds only, no shortening: a cheap upper bound.
    pub fn quick() -> Self {
        Self { variational: VariationalOptions { iterations: 0, ..Default::default() }, refinements: 0, ..Default::default() }
    }
}

fn straight(p: &AmbientPoint, q: &AmbientPoint, n: usize) -> Vec<AmbientPoint> {
    let mut pts: Vec<AmbientPoint> = (0..=n).map(|k| AmbientPoint::lerp(p, q, k as f64 / n as f64)).collect();
    pts[n] = q.clone();
    pts
}

fn chart_line(d: &ModelDomain, a: &[f64], b: &[f64], n: usize) -> Result<Vec<AmbientPoint>> {
    (0..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            let c: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect();
            from_chart(d, &c)
        })
        .collect()
}

/// `z` pushed deeper along its normal line from depth `s` to `h`,
/// geometrically sampled (endpoint included, start excluded).
fn vertical_leg(z: &AmbientPoint, s: f64, h: f64, ratio: f64) -> Vec<AmbientPoint> {
    let steps = ((h / s).ln() / ratio.ln()).ceil().max(1.0) as usize;
    (1..=steps).map(|k| z.pushed_in(s * (h / s).powf(k as f64 / steps as f64) - s)).collect()
}

/// Height scale at which moving from `p` to `q` across the top costs O(1).
fn natural_height(d: &ModelDomain, p: &AmbientPoint, q: &AmbientPoint) -> f64 {
    let d1 = (p[1] - q[1]).norm();
    let caps = d.caps();
    let mut h = (p[0].im - q[0].im).abs();
    for order in 2..=d.degree() {
        let a = caps.cap(order, p[1]).max(caps.cap(order, q[1]));
        h = h.max(a * d1.powi(order as i32));
    }
    let tail: f64 = p[2..].iter().zip(&q[2..]).map(|(a, b)| (a - b).norm_sqr()).sum();
    h.max(tail)
}

/// Candidate curves from `p` to `q`, each interior to the domain.
pub fn seed_curves(d: &ModelDomain, p: &AmbientPoint, q: &AmbientPoint, opts: &DistanceOptions) -> Result<Vec<CurvePath>> {
    let sp = d.depth(p)?;
    let sq = d.depth(q)?;
    let n = opts.seed_points.max(2);
    let mut seeds = Vec::new();
    let st = straight(p, q, n);
    if st.iter().all(|z| d.r(z) < 0.0) {
        seeds.push(st);
    }
    let cp = to_chart(d, p)?;
    let cq = to_chart(d, q)?;
    let mut line = chart_line(d, &cp, &cq, n)?;
    line[0] = p.clone();
    line[n] = q.clone();
    seeds.push(line);

    let smax = sp.max(sq);
    let cap = 64.0 * natural_height(d, p, q).max(smax);
    let mut h = smax;
    while h <= cap * (1.0 + 1e-12) {
        let mut pts = vec![p.clone()];
        if h > sp {
            pts.extend(vertical_leg(p, sp, h, opts.leg_ratio));
        }
        let top_p = to_chart(d, pts.last().expect("nonempty"))?;
        let mut top_q = cq.clone();
        top_q[0] = h.ln();
        let across = chart_line(d, &top_p, &top_q, n)?;
        pts.extend(across.into_iter().skip(1));
        if h > sq {
            let mut down = vertical_leg(q, sq, h, opts.leg_ratio);
            down.pop();
            down.reverse();
            pts.extend(down);
            pts.push(q.clone());
        } else {
            let last = pts.len() - 1;
            pts[last] = q.clone();
        }
        seeds.push(pts);
        h *= opts.height_ratio;
    }
    seeds.into_iter().map(CurvePath::from_points_dedup).collect()
}

fn best_seed(d: &ModelDomain, p: &AmbientPoint, q: &AmbientPoint, opts: &DistanceOptions) -> Result<(f64, CurvePath)> {
    let order = opts.variational.quadrature_order;
    seed_curves(d, p, q, opts)?
        .into_iter()
        .filter_map(|c| curve_length(d, &c, order).ok().map(|l| (l, c)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or(Error::Disconnected)
}

/// Shortest seed length and the seed itself.
pub fn quick_upper_bound(d: &ModelDomain, p: &AmbientPoint, q: &AmbientPoint, opts: &DistanceOptions) -> Result<(f64, CurvePath)> {
    if p.lex_cmp(q) == Ordering::Greater {
        let (l, c) = quick_upper_bound(d, q, p, opts)?;
        return Ok((l, c.reversed()));
    }
    best_seed(d, p, q, opts)
}

fn refine(c: &CurvePath) -> Result<CurvePath> {
    let pts = c.points();
    let mut out = Vec::with_capacity(2 * pts.len());
    for w in pts.windows(2) {
        out.push(w[0].clone());
        out.push(AmbientPoint::lerp(&w[0], &w[1], 0.5));
    }
    out.push(pts[pts.len() - 1].clone());
    CurvePath::from_points(out)
}

/// Bracket for `d_{M}(p, q)`; symmetric in `p` and `q` by construction.
pub fn distance(d: &ModelDomain, p: &AmbientPoint, q: &AmbientPoint, opts: &DistanceOptions) -> Result<DistanceEstimate> {
    d.check_dim(p.dim())?;
    d.check_dim(q.dim())?;
    if p.lex_cmp(q) == Ordering::Greater {
        return Ok(distance(d, q, p, opts)?.reversed());
    }
    let lower = certified_lower_bound(d, p, q)?;
    if p == q {
        let witness = CurvePath::from_points(vec![p.clone(), q.clone()])?;
        return Ok(DistanceEstimate { lower: 0.0, upper: 0.0, witness, method: DistanceMethod::Composite });
    }
    let (mut upper, mut witness) = best_seed(d, p, q, opts)?;
    if opts.variational.iterations > 0 {
        let mut trace = shorten(d, &witness, &opts.variational)?;
        for _ in 0..opts.refinements {
            trace = shorten(d, &refine(&trace.curve)?, &opts.variational)?;
        }
        if trace.length < upper {
            upper = trace.length;
            witness = trace.curve;
        }
    }
    if let Some(g) = &opts.graph {
        let bbox = ChartBox::spanning(d, p, q, g.log_below, g.log_above, g.tangential_margin)?;
        match distance_graph(d, p, q, &bbox, &g.spacing, opts.variational.quadrature_order) {
            Ok(est) if est.upper < upper => {
                upper = est.upper;
                witness = est.witness;
            }
            Ok(_) | Err(Error::Disconnected) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(DistanceEstimate { lower, upper, witness, method: DistanceMethod::Composite })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn at(d: &ModelDomain, tail: &[f64], depth: f64) -> AmbientPoint {
        let tail: Vec<Complex64> = tail.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        d.boundary_from_slice(&tail, 0.0).unwrap().pushed_in(depth)
    }

    #[test]
    fn seeds_join_the_endpoints_inside() {
        let d = ModelDomain::radial(3, 2);
        let p = at(&d, &[0.2, 0.1], 0.01);
        let q = at(&d, &[-0.4, 0.3], 0.5);
        let seeds = seed_curves(&d, &p, &q, &DistanceOptions::default()).unwrap();
        assert!(seeds.len() > 3);
        for s in &seeds {
            assert_eq!(s.start(), &p);
            assert_eq!(s.end(), &q);
            assert!(s.points().iter().all(|z| d.contains(z).unwrap()));
        }
    }

    #[test]
    fn symmetric_and_bracketed() {
        let d = ModelDomain::radial(2, 2);
        let p = at(&d, &[-0.4], 0.02);
        let q = at(&d, &[0.5], 0.3);
        let a = distance(&d, &p, &q, &DistanceOptions::default()).unwrap();
        let b = distance(&d, &q, &p, &DistanceOptions::default()).unwrap();
        assert_eq!(a.upper, b.upper);
        assert_eq!(a.lower, b.lower);
        assert!(a.lower <= a.upper);
        assert_eq!(a.witness.start(), &p);
        assert_eq!(b.witness.start(), &q);
    }

    #[test]
    fn normal_pair_is_tight() {
        let d = ModelDomain::radial(2, 2);
        let p = AmbientPoint::real(&[-1.0, 0.0]);
        let q = AmbientPoint::real(&[-2.0, 0.0]);
        let est = distance(&d, &p, &q, &DistanceOptions::default()).unwrap();
        assert!((est.upper - est.lower) / est.lower < 1e-6);
    }
}
