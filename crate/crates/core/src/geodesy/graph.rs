//! Shortest paths on a lattice in chart coordinates
//! `(log s, Im z₀, Re z₁, Im z₁, …)`, `s = −r_P(z)`.
//!
//! Every chart point maps to an interior point, and uniform steps in
//! `log s` give normal spacing proportional to the depth. The lattice is
//! anchored at the start point; the end point is joined to the lattice nodes
//! within one spacing of it. Edge weights are exact segment lengths.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use num_complex::Complex64;
use rayon::prelude::*;

use super::lower::certified_lower_bound;
use super::{segment_length_raw, CurvePath, DistanceEstimate, DistanceMethod};
use crate::domain::{AmbientPoint, ModelDomain};
use crate::error::{Error, Result};

const MAX_NODES: u128 = 50_000_000;

/// Axis-aligned box in chart coordinates (length `2·dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChartBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSpacing {
    pub log_depth: f64,
    pub tangential: f64,
}

pub fn to_chart(d: &ModelDomain, z: &AmbientPoint) -> Result<Vec<f64>> {
    let s = d.depth(z)?;
    let mut c = vec![s.ln(), z[0].im];
    for w in &z[1..] {
        c.push(w.re);
        c.push(w.im);
    }
    Ok(c)
}

pub fn from_chart(d: &ModelDomain, c: &[f64]) -> Result<AmbientPoint> {
    d.check_dim(c.len() / 2)?;
    let tail: Vec<Complex64> = c[2..].chunks(2).map(|w| Complex64::new(w[0], w[1])).collect();
    Ok(d.boundary_from_slice(&tail, c[1])?.pushed_in(c[0].exp()))
}

impl ChartBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() < 4 || !lo.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument("chart box needs matching even-length bounds".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::InvalidArgument("chart box bounds must satisfy lo <= hi".into()));
        }
        Ok(Self { lo, hi })
    }

    /// Bounding box of both endpoints, widened by `log_below`/`log_above` in
    /// `log s` and by `tangential` elsewhere.
    pub fn spanning(
        d: &ModelDomain,
        p: &AmbientPoint,
        q: &AmbientPoint,
        log_below: f64,
        log_above: f64,
        tangential: f64,
    ) -> Result<Self> {
        let cp = to_chart(d, p)?;
        let cq = to_chart(d, q)?;
        let mut lo: Vec<f64> = cp.iter().zip(&cq).map(|(a, b)| a.min(*b) - tangential).collect();
        let mut hi: Vec<f64> = cp.iter().zip(&cq).map(|(a, b)| a.max(*b) + tangential).collect();
        lo[0] = cp[0].min(cq[0]) - log_below;
        hi[0] = cp[0].max(cq[0]) + log_above;
        Self::new(lo, hi)
    }
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    id: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Lattice {
    origin: Vec<f64>,
    step: Vec<f64>,
    kmin: Vec<i64>,
    counts: Vec<usize>,
    total: usize,
}

impl Lattice {
    fn index(&self, k: &[i64]) -> Option<usize> {
        let mut id = 0usize;
        for ((&ki, &lo), &n) in k.iter().zip(&self.kmin).zip(&self.counts).rev() {
            let off = ki - lo;
            if off < 0 || off as usize >= n {
                return None;
            }
            id = id * n + off as usize;
        }
        Some(id)
    }

    fn multi(&self, mut id: usize) -> Vec<i64> {
        let mut k = Vec::with_capacity(self.counts.len());
        for (&lo, &n) in self.kmin.iter().zip(&self.counts) {
            k.push(lo + (id % n) as i64);
            id /= n;
        }
        k
    }

    fn chart(&self, k: &[i64]) -> Vec<f64> {
        k.iter().zip(&self.origin).zip(&self.step).map(|((&ki, o), h)| o + h * ki as f64).collect()
    }
}

/// Dijkstra on the chart lattice inside `bbox`, brackets `d(p, q)`.
pub fn distance_graph(
    d: &ModelDomain,
    p: &AmbientPoint,
    q: &AmbientPoint,
    bbox: &ChartBox,
    spacing: &GraphSpacing,
    quadrature_order: usize,
) -> Result<DistanceEstimate> {
    if !(spacing.log_depth > 0.0) || !(spacing.tangential > 0.0) {
        return Err(Error::InvalidArgument("graph spacing must be positive".into()));
    }
    let cp = to_chart(d, p)?;
    let cq = to_chart(d, q)?;
    if bbox.lo.len() != cp.len() {
        return Err(Error::DimensionMismatch { expected: cp.len() / 2, got: bbox.lo.len() / 2 });
    }
    let lower = certified_lower_bound(d, p, q)?;
    let k = cp.len();
    let step: Vec<f64> = (0..k).map(|i| if i == 0 { spacing.log_depth } else { spacing.tangential }).collect();
    let kmin: Vec<i64> = (0..k).map(|i| ((bbox.lo[i] - cp[i]) / step[i]).ceil().min(0.0) as i64).collect();
    let kmax: Vec<i64> = (0..k).map(|i| ((bbox.hi[i] - cp[i]) / step[i]).floor().max(0.0) as i64).collect();
    let counts: Vec<usize> = kmin.iter().zip(&kmax).map(|(a, b)| (b - a + 1) as usize).collect();
    let total_nodes: u128 = counts.iter().map(|&c| c as u128).product();
    if total_nodes > MAX_NODES {
        return Err(Error::InvalidArgument(format!("graph of {total_nodes} nodes exceeds the {MAX_NODES} cap")));
    }
    let lat = Lattice { origin: cp.clone(), step, kmin, counts, total: total_nodes as usize };
    let start = lat.index(&vec![0; k]).expect("start node lies in the lattice");
    let target = lat.total;

    // lattice nodes within one spacing of q, per axis
    let frac: Vec<f64> = (0..k).map(|i| (cq[i] - cp[i]) / lat.step[i]).collect();
    let near_q = |kk: &[i64]| kk.iter().zip(&frac).all(|(&a, &f)| (a as f64 - f).abs() <= 1.0 + 1e-12);

    let offsets: Vec<Vec<i64>> = {
        let mut all = vec![vec![]];
        for _ in 0..k {
            all = all
                .into_iter()
                .flat_map(|v: Vec<i64>| {
                    (-1..=1).map(move |o| {
                        let mut w = v.clone();
                        w.push(o);
                        w
                    })
                })
                .collect();
        }
        all.retain(|v| v.iter().any(|&o| o != 0));
        all
    };

    let position = |id: usize| -> Option<AmbientPoint> {
        if id == start {
            Some(p.clone())
        } else if id == target {
            Some(q.clone())
        } else {
            from_chart(d, &lat.chart(&lat.multi(id))).ok()
        }
    };

    let mut dist: HashMap<usize, f64> = HashMap::new();
    let mut prev: HashMap<usize, usize> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(start, 0.0);
    heap.push(Entry { dist: 0.0, id: start });
    let mut found = None;
    while let Some(Entry { dist: du, id: u }) = heap.pop() {
        if du > dist.get(&u).copied().unwrap_or(f64::INFINITY) {
            continue;
        }
        if u == target {
            found = Some(du);
            break;
        }
        let ku = lat.multi(u);
        let zu = match position(u) {
            Some(z) => z,
            None => continue,
        };
        let mut nbrs: Vec<usize> = offsets
            .iter()
            .filter_map(|o| {
                let kv: Vec<i64> = ku.iter().zip(o).map(|(a, b)| a + b).collect();
                lat.index(&kv)
            })
            .collect();
        if near_q(&ku) {
            nbrs.push(target);
        }
        let weights: Vec<(usize, Option<f64>)> = nbrs
            .par_iter()
            .map(|&v| {
                let w = position(v).and_then(|zv| segment_length_raw(d, &zu, &zv, quadrature_order).ok());
                (v, w)
            })
            .collect();
        for (v, w) in weights {
            let Some(w) = w else { continue };
            let cand = du + w;
            if cand < dist.get(&v).copied().unwrap_or(f64::INFINITY) {
                dist.insert(v, cand);
                prev.insert(v, u);
                heap.push(Entry { dist: cand, id: v });
            }
        }
    }
    let upper = found.ok_or(Error::Disconnected)?;
    let mut ids = vec![target];
    while let Some(&u) = prev.get(ids.last().expect("nonempty")) {
        ids.push(u);
    }
    ids.reverse();
    let pts = ids.into_iter().map(|id| position(id).expect("visited nodes are interior")).collect();
    let witness = CurvePath::from_points_dedup(pts)?;
    Ok(DistanceEstimate { lower, upper, witness, method: DistanceMethod::Graph })
}
