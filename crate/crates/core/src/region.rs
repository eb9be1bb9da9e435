//! Bounded sampling regions. Model domains are unbounded, so every sampling
//! operation takes an explicit polydisc.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::AmbientPoint;
use crate::error::{Error, Result};

/// `{z : |z_k − c_k| ≤ radius_k for every k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polydisc {
    pub center: Vec<Complex64>,
    pub radii: Vec<f64>,
}

impl Polydisc {
    pub fn new(center: &AmbientPoint, radii: Vec<f64>) -> Result<Self> {
        if center.dim() != radii.len() {
            return Err(Error::DimensionMismatch { expected: center.dim(), got: radii.len() });
        }
        if radii.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidArgument("polydisc radii must be finite and >= 0".into()));
        }
        Ok(Self { center: center.0.clone(), radii })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .center
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| format!("|z-({}{:+}i)|<={}", c.re, c.im, r))
            .collect();
        parts.join(" x ")
    }

    /// Per coordinate: the center plus `grid` radial levels out to the radius
    /// (inclusive) with `max(4, 2·grid)` angles each. Returns the tensor grid.
    pub fn grid_points(&self, grid: usize) -> Vec<AmbientPoint> {
        let grid = grid.max(1);
        let angles = (2 * grid).max(4);
        let axes: Vec<Vec<Complex64>> = self
            .center
            .iter()
            .zip(&self.radii)
            .map(|(&c, &r)| {
                let mut axis = vec![c];
                if r > 0.0 {
                    for i in 1..=grid {
                        let rho = r * i as f64 / grid as f64;
                        for a in 0..angles {
                            axis.push(c + Complex64::from_polar(rho, 2.0 * PI * a as f64 / angles as f64));
                        }
                    }
                }
                axis
            })
            .collect();
        let mut out = vec![Vec::with_capacity(self.dim())];
        for axis in &axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(AmbientPoint).collect()
    }

    /// Uniform sample (area measure in each coordinate disc).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> AmbientPoint {
        AmbientPoint(
            self.center
                .iter()
                .zip(&self.radii)
                .map(|(&c, &r)| {
                    let rho = r * rng.random::<f64>().sqrt();
                    c + Complex64::from_polar(rho, 2.0 * PI * rng.random::<f64>())
                })
                .collect(),
        )
    }

    pub fn contains(&self, z: &AmbientPoint) -> bool {
        z.dim() == self.dim()
            && z.iter().zip(&self.center).zip(&self.radii).all(|((a, c), r)| (a - c).norm() <= r * (1.0 + 1e-12))
    }
}
