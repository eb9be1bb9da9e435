//! Model domains `Ω_P = {Re z₀ + P(z₁) + Σ_{α≥2} |z_α|² < 0}`.

use std::fmt;
use std::ops::Deref;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{BivariatePolynomial, CapTable, HermitianPolynomial, PolyTerm};

/// Radius and radial levels of the subharmonicity check run on construction.
pub const DEFAULT_BOX_RADIUS: f64 = 2.0;
pub const DEFAULT_BOX_SAMPLES: usize = 32;

/// A point `(z₀, …, z_d)` of `ℂ^{d+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AmbientPoint(pub Vec<Complex64>);

/// A tangent vector `(x₀, …, x_d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TangentVector(pub Vec<Complex64>);

impl AmbientPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self(coords)
    }

    /// Point with real coordinates, handy for points on the real slice.
    pub fn real(coords: &[f64]) -> Self {
        Self(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `self + t·v`.
    pub fn offset(&self, v: &TangentVector, t: f64) -> Self {
        Self(self.0.iter().zip(&v.0).map(|(a, b)| a + b * t).collect())
    }

    /// Moves along `−Re z₀` by `depth` (toward the interior of a graph domain).
    pub fn pushed_in(&self, depth: f64) -> Self {
        let mut c = self.0.clone();
        c[0] -= depth;
        Self(c)
    }

    /// `b − a`.
    pub fn delta(a: &AmbientPoint, b: &AmbientPoint) -> TangentVector {
        TangentVector(b.0.iter().zip(&a.0).map(|(x, y)| x - y).collect())
    }

    pub fn lerp(a: &AmbientPoint, b: &AmbientPoint, t: f64) -> Self {
        Self(a.0.iter().zip(&b.0).map(|(x, y)| x + (y - x) * t).collect())
    }

    pub fn distance_euclid(&self, other: &AmbientPoint) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Total order on coordinates, used to orient symmetric computations.
    pub fn lex_cmp(&self, other: &AmbientPoint) -> std::cmp::Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            let o = a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
            if o.is_ne() {
                return o;
            }
        }
        self.0.len().cmp(&other.0.len())
    }

    /// Bit pattern key for hashing.
    pub fn key(&self) -> Vec<u64> {
        self.0.iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]).collect()
    }
}

impl Deref for AmbientPoint {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl fmt::Display for AmbientPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", c.re, c.im)?;
        }
        write!(f, ")")
    }
}

impl TangentVector {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self(coords)
    }

    pub fn real(coords: &[f64]) -> Self {
        Self(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self(self.0.iter().map(|x| x * s).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.re == 0.0 && x.im == 0.0)
    }

    pub fn add(&self, other: &TangentVector) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Deref for TangentVector {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// Degree data of the model polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeData {
    pub degree_2m: u32,
    pub vanishing_order_at_0: u32,
}

/// On-disk domain description: `{"dim": _, "label": _, "P": [terms]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub dim: usize,
    #[serde(default)]
    pub label: String,
    #[serde(rename = "P")]
    pub poly: Vec<PolyTerm>,
}

/// `Ω_P ⊂ ℂ^{d+1}` with a subharmonic, centered model polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDomain {
    dim: usize,
    poly: HermitianPolynomial,
    label: String,
    dpoly: BivariatePolynomial,
    caps: CapTable,
}

impl ModelDomain {
    /// Validates the model-domain invariants: `dim ≥ 2`, no harmonic terms,
    /// even degree `≥ 2`, and subharmonicity on the default box.
    pub fn new(dim: usize, poly: HermitianPolynomial, label: impl Into<String>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDomain(format!("ambient dimension {dim} < 2")));
        }
        if poly.is_zero() {
            return Err(Error::DegenerateType);
        }
        if poly.has_harmonic_terms() {
            return Err(Error::InvalidDomain("model polynomial has harmonic terms".into()));
        }
        let deg = poly.degree();
        if deg < 2 || !deg.is_multiple_of(2) {
            return Err(Error::InvalidDomain(format!("degree {deg} is not even and >= 2")));
        }
        let rep = poly.subharmonicity_report(DEFAULT_BOX_RADIUS, DEFAULT_BOX_SAMPLES);
        if !rep.pass {
            return Err(Error::InvalidDomain(format!(
                "not subharmonic: laplacian {} at {}",
                rep.min_laplacian, rep.argmin
            )));
        }
        Ok(Self::new_unchecked(dim, poly, label))
    }

    pub(crate) fn new_unchecked(dim: usize, poly: HermitianPolynomial, label: impl Into<String>) -> Self {
        let dpoly = poly.wirtinger_derivative(1, 0);
        let caps = CapTable::new(&poly);
        Self { dim, poly, label: label.into(), dpoly, caps }
    }

    /// The model domain with `P = |z₁|^{2m}`.
    pub fn radial(dim: usize, m: u32) -> Self {
        Self::new_unchecked(dim, HermitianPolynomial::radial(m, 1.0), format!("|z|^{}", 2 * m))
    }

    pub fn from_spec(spec: &DomainSpec) -> Result<Self> {
        Self::new(spec.dim, HermitianPolynomial::from_literal(&spec.poly)?, spec.label.clone())
    }

    pub fn to_spec(&self) -> DomainSpec {
        DomainSpec { dim: self.dim, label: self.label.clone(), poly: self.poly.to_literal() }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_spec(&serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_spec())?)?;
        Ok(())
    }

    /// Same domain with a different label.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn poly(&self) -> &HermitianPolynomial {
        &self.poly
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn caps(&self) -> &CapTable {
        &self.caps
    }

    /// `2m = deg P`, the top of the cap sum in the metric.
    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }

    /// `∂P/∂z₁` at `z₁`.
    pub fn p_prime(&self, z1: Complex64) -> Complex64 {
        self.dpoly.eval(z1)
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got });
        }
        Ok(())
    }

    /// `r_P(z)` on a raw coordinate slice; the caller guarantees the length.
    pub(crate) fn r(&self, z: &[Complex64]) -> f64 {
        z[0].re + self.poly.value(z[1]) + z[2..].iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn defining_value(&self, z: &AmbientPoint) -> Result<f64> {
        self.check_dim(z.dim())?;
        Ok(self.r(z))
    }

    pub fn contains(&self, z: &AmbientPoint) -> Result<bool> {
        Ok(self.defining_value(z)? < 0.0)
    }

    /// Depth `−r_P(z)`, positive inside; errors on non-interior points.
    pub fn depth(&self, z: &AmbientPoint) -> Result<f64> {
        let r = self.defining_value(z)?;
        if r < 0.0 {
            Ok(-r)
        } else {
            Err(Error::PointNotInterior { value: r })
        }
    }

    /// The boundary point `(−P(z₁) − Σ|z_α|² + i·im0, z₁, …, z_d)` over a slice.
    pub fn boundary_from_slice(&self, tail: &[Complex64], im0: f64) -> Result<AmbientPoint> {
        self.check_dim(tail.len() + 1)?;
        let re0 = -self.poly.value(tail[0]) - tail[1..].iter().map(|c| c.norm_sqr()).sum::<f64>();
        let mut coords = Vec::with_capacity(self.dim);
        coords.push(Complex64::new(re0, im0));
        coords.extend_from_slice(tail);
        Ok(AmbientPoint(coords))
    }

    /// Boundary point on the normal line through `z` (`z + (−r(z), '0)`).
    pub fn boundary_projection(&self, z: &AmbientPoint) -> Result<AmbientPoint> {
        let r = self.defining_value(z)?;
        Ok(z.pushed_in(r))
    }

    pub fn type_data(&self) -> Result<TypeData> {
        let order = self.poly.vanishing_order().ok_or(Error::DegenerateType)?;
        Ok(TypeData { degree_2m: self.poly.degree(), vanishing_order_at_0: order })
    }
}
