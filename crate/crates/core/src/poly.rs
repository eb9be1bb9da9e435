//! Real-valued Hermitian polynomials `P(z, z̄) = Σ c_{j,k} z^j z̄^k` and
//! their Wirtinger calculus.
//!
//! Coefficients are stored as `f64` pairs. After sums and re-expansions,
//! coefficients below [`PRUNE_THRESHOLD`] in modulus are dropped so that the
//! degree stays well defined; pure rescalings keep every nonzero coefficient.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients with modulus below this are removed after arithmetic.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Relative tolerance for the conjugate-pair check in [`HermitianPolynomial::from_terms`].
const HERMITIAN_TOL: f64 = 1e-12;

/// Relative tolerance for the realness assertion during evaluation.
const REALNESS_TOL: f64 = 1e-10;

/// One record of the polynomial literal format `{"j":_,"k":_,"re":_,"im":_}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub j: u32,
    pub k: u32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl PolyTerm {
    pub fn new(j: u32, k: u32, c: Complex64) -> Self {
        Self { j, k, re: c.re, im: c.im }
    }

    pub fn coefficient(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i))
}

fn binomial(n: u32, k: u32) -> f64 {
    falling(n, k) / falling(k, k)
}

fn factorial(n: u32) -> f64 {
    falling(n, n)
}

/// Powers `z^0..=z^n` and `z̄^0..=z̄^n`.
fn power_tables(z: Complex64, n: u32) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = n as usize;
    let mut zp = Vec::with_capacity(n + 1);
    let mut zb = Vec::with_capacity(n + 1);
    let (mut a, mut b) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let zc = z.conj();
    for _ in 0..=n {
        zp.push(a);
        zb.push(b);
        a *= z;
        b *= zc;
    }
    (zp, zb)
}

/// A general polynomial in `(z, z̄)` with complex coefficients.
///
/// Wirtinger derivatives of a Hermitian polynomial land here since they are
/// no longer real-valued in general.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BivariatePolynomial {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl BivariatePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Sums duplicate exponents and prunes negligible coefficients.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (key, c) in terms {
            *map.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c: &mut Complex64| c.norm() >= PRUNE_THRESHOLD);
        Self { terms: map }
    }

    /// Keeps every nonzero coefficient as given, however small.
    fn from_terms_unpruned<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), Complex64)>,
    {
        Self { terms: terms.into_iter().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).collect() }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coefficient(&self, j: u32, k: u32) -> Complex64 {
        self.terms.get(&(j, k)).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum `j + k` over stored terms (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(j, k)| j + k).max().unwrap_or(0)
    }

    fn max_exponent(&self) -> u32 {
        self.terms.keys().map(|&(j, k)| j.max(k)).max().unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let (zp, zb) = power_tables(z, self.max_exponent());
        self.terms
            .iter()
            .map(|(&(j, k), &c)| c * zp[j as usize] * zb[k as usize])
            .sum()
    }

    /// Evaluates and asserts the value is real up to a tolerance scaled by the
    /// magnitude of the summands.
    pub fn eval_real(&self, z: Complex64) -> Result<f64> {
        let (zp, zb) = power_tables(z, self.max_exponent());
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (&(j, k), &c) in &self.terms {
            let t = c * zp[j as usize] * zb[k as usize];
            scale += t.norm();
            sum += t;
        }
        if sum.im.abs() > REALNESS_TOL * (1.0 + scale) {
            return Err(Error::RealnessViolation { imag: sum.im });
        }
        Ok(sum.re)
    }

    /// Coefficient-level `∂^j ∂̄^k`.
    pub fn derivative(&self, j: u32, k: u32) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|&(&(a, b), _)| a >= j && b >= k)
                .map(|(&(a, b), &c)| ((a - j, b - k), c * falling(a, j) * falling(b, k))),
        )
    }
}

/// A real-valued polynomial `P(z, z̄)`; stored terms satisfy `c_{k,j} = conj(c_{j,k})`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HermitianPolynomial {
    inner: BivariatePolynomial,
}

impl HermitianPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds the Hermitian symmetrization of a term list.
    ///
    /// A term supplied without its mirror gets the conjugate mirror. Duplicate
    /// exponents are summed first; a supplied mirror pair must already be
    /// conjugate.
    pub fn from_terms(terms: &[(u32, u32, Complex64)]) -> Result<Self> {
        let mut map: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for &(j, k, c) in terms {
            *map.entry((j, k)).or_default() += c;
        }
        let mut out = BTreeMap::new();
        for (&(j, k), &c) in &map {
            if j > k {
                continue;
            }
            match map.get(&(k, j)) {
                Some(&m) => {
                    let gap = (m - c.conj()).norm();
                    if gap > HERMITIAN_TOL * (c.norm() + m.norm()).max(f64::MIN_POSITIVE) {
                        return Err(Error::HermitianViolation { j, k });
                    }
                    let avg = (c + m.conj()) * 0.5;
                    if j == k {
                        out.insert((j, j), Complex64::new(avg.re, 0.0));
                    } else {
                        out.insert((j, k), avg);
                        out.insert((k, j), avg.conj());
                    }
                }
                None => {
                    out.insert((j, k), c);
                    out.insert((k, j), c.conj());
                }
            }
        }
        // mirrors of terms supplied only with j > k
        for (&(j, k), &c) in &map {
            if j > k && !map.contains_key(&(k, j)) {
                out.insert((j, k), c);
                out.insert((k, j), c.conj());
            }
        }
        Ok(Self { inner: BivariatePolynomial::from_terms(out) })
    }

    pub fn from_literal(terms: &[PolyTerm]) -> Result<Self> {
        let list: Vec<_> = terms.iter().map(|t| (t.j, t.k, t.coefficient())).collect();
        Self::from_terms(&list)
    }

    /// Literal records for every stored term, `j` then `k` ascending.
    pub fn to_literal(&self) -> Vec<PolyTerm> {
        self.inner.terms().map(|((j, k), c)| PolyTerm::new(j, k, c)).collect()
    }

    /// `c·|z|^{2m}`.
    pub fn radial(m: u32, c: f64) -> Self {
        Self::from_bivariate_unchecked(BivariatePolynomial::from_terms([(
            (m, m),
            Complex64::new(c, 0.0),
        )]))
    }

    /// Wraps terms known to be conjugate-symmetric (e.g. a real rescaling of a
    /// Hermitian polynomial).
    pub(crate) fn from_bivariate_unchecked(inner: BivariatePolynomial) -> Self {
        Self { inner }
    }

    pub fn as_bivariate(&self) -> &BivariatePolynomial {
        &self.inner
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.inner.terms()
    }

    pub fn coefficient(&self, j: u32, k: u32) -> Complex64 {
        self.inner.coefficient(j, k)
    }

    pub fn degree(&self) -> u32 {
        self.inner.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    /// Lowest `j + k` with a nonzero term.
    pub fn vanishing_order(&self) -> Option<u32> {
        self.inner.terms().map(|((j, k), _)| j + k).min()
    }

    /// True if some stored term has `j = 0` or `k = 0` (including a constant).
    pub fn has_harmonic_terms(&self) -> bool {
        self.inner.terms().any(|((j, k), _)| j == 0 || k == 0)
    }

    pub fn eval(&self, z: Complex64) -> Result<f64> {
        self.inner.eval_real(z)
    }

    /// Real part of the value, without the realness assertion.
    pub(crate) fn value(&self, z: Complex64) -> f64 {
        self.inner.eval(z).re
    }

    pub fn wirtinger_derivative(&self, j: u32, k: u32) -> BivariatePolynomial {
        self.inner.derivative(j, k)
    }

    fn check_order(&self, order: u32) -> Result<()> {
        let hi = self.degree();
        if order < 2 || order > hi {
            return Err(Error::OutOfRange { order, lo: 2, hi });
        }
        Ok(())
    }

    /// `A^P_ℓ(z) = max |∂^j ∂̄^k P(z)|` over `j, k > 0`, `j + k = ℓ`.
    pub fn cap_derivative(&self, order: u32, z: Complex64) -> Result<f64> {
        self.check_order(order)?;
        let (zp, zb) = power_tables(z, self.inner.max_exponent());
        Ok((1..order)
            .map(|j| {
                let k = order - j;
                self.inner
                    .terms()
                    .filter(|&((a, b), _)| a >= j && b >= k)
                    .map(|((a, b), c)| {
                        c * (falling(a, j) * falling(b, k))
                            * zp[(a - j) as usize]
                            * zb[(b - k) as usize]
                    })
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max))
    }

    /// `A_ℓ = max |a_{j,k}|` over `j, k > 0`, `j + k = ℓ`, read off the
    /// coefficients directly (meant for centered polynomials).
    pub fn cap_coefficient(&self, order: u32) -> Result<f64> {
        self.check_order(order)?;
        Ok(self
            .inner
            .terms()
            .filter(|&((j, k), _)| j > 0 && k > 0 && j + k == order)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max))
    }

    /// Exact Taylor re-expansion of `P(ξ + w)` split into constant, harmonic
    /// and centered parts.
    pub fn recenter(&self, xi: Complex64) -> RecenterResult {
        let n = self.inner.max_exponent();
        let (xp, xb) = power_tables(xi, n);
        let mut expanded: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for ((a, b), c) in self.inner.terms() {
            for j in 0..=a {
                let left = c * binomial(a, j) * xp[(a - j) as usize];
                for k in 0..=b {
                    *expanded.entry((j, k)).or_default() +=
                        left * binomial(b, k) * xb[(b - k) as usize];
                }
            }
        }
        let constant = expanded.get(&(0, 0)).map_or(0.0, |c| c.re);
        let max_j = expanded.keys().map(|&(j, _)| j).max().unwrap_or(0);
        let mut holo_part: Vec<Complex64> = (1..=max_j)
            .map(|j| expanded.get(&(j, 0)).copied().unwrap_or_default())
            .collect();
        while holo_part.last().is_some_and(|h| h.norm() < PRUNE_THRESHOLD) {
            holo_part.pop();
        }
        // Re-symmetrize: round-off in the expansion breaks exact conjugacy.
        let centered = BivariatePolynomial::from_terms(expanded.iter().filter_map(|(&(j, k), &c)| {
            if j == 0 || k == 0 {
                return None;
            }
            let mirror = expanded.get(&(k, j)).copied().unwrap_or_default();
            let sym = (c + mirror.conj()) * 0.5;
            Some(((j, k), if j == k { Complex64::new(sym.re, 0.0) } else { sym }))
        }));
        RecenterResult {
            centered: Self::from_bivariate_unchecked(centered),
            holo_part,
            constant,
        }
    }

    /// Sum of the terms with `j + k = degree`.
    pub fn homogeneous_part(&self, degree: u32) -> Self {
        Self::from_bivariate_unchecked(BivariatePolynomial::from_terms_unpruned(
            self.inner.terms().filter(|&((j, k), _)| j + k == degree),
        ))
    }

    /// Multiplies every coefficient `c_{j,k}` by `factor(j + k)`. Small
    /// results are kept, since rescaling is exact up to rounding.
    pub fn scale_by_degree(&self, factor: impl Fn(u32) -> f64) -> Self {
        Self::from_bivariate_unchecked(BivariatePolynomial::from_terms_unpruned(
            self.inner.terms().map(|((j, k), c)| ((j, k), c * factor(j + k))),
        ))
    }

    /// `ΔP = 4 ∂∂̄P` on a tensor polar grid in `|z| ≤ box_radius`.
    ///
    /// The grid has `samples` radial levels plus the origin and `4·samples`
    /// angles per level.
    pub fn subharmonicity_report(&self, box_radius: f64, samples: usize) -> SubharmonicityReport {
        let samples = samples.max(1);
        let laplacian = self.inner.derivative(1, 1);
        let mut min_laplacian = 4.0 * laplacian.eval(Complex64::new(0.0, 0.0)).re;
        let mut argmin = Complex64::new(0.0, 0.0);
        let angles = 4 * samples;
        for i in 1..=samples {
            let rho = box_radius * i as f64 / samples as f64;
            for a in 0..angles {
                let z = Complex64::from_polar(rho, 2.0 * PI * a as f64 / angles as f64);
                let v = 4.0 * laplacian.eval(z).re;
                if v < min_laplacian {
                    min_laplacian = v;
                    argmin = z;
                }
            }
        }
        let scale = 4.0
            * laplacian
                .terms()
                .map(|((j, k), c)| c.norm() * box_radius.powi((j + k) as i32))
                .sum::<f64>();
        SubharmonicityReport {
            min_laplacian,
            argmin,
            pass: min_laplacian >= -1e-9 * (1.0 + scale),
        }
    }
}

/// `P(ξ + w) = constant + 2·Re(Σ_j h_j w^j) + centered(w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecenterResult {
    /// Terms with `j ≥ 1` and `k ≥ 1` only.
    pub centered: HermitianPolynomial,
    /// `h_1, h_2, …` (index 0 holds `h_1`).
    pub holo_part: Vec<Complex64>,
    pub constant: f64,
}

impl RecenterResult {
    /// `2·Re(Σ_j h_j w^j)`.
    pub fn harmonic_value(&self, w: Complex64) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = w;
        for h in &self.holo_part {
            acc += h * pow;
            pow *= w;
        }
        2.0 * acc.re
    }

    /// Right-hand side of the reassembly identity.
    pub fn reassemble(&self, w: Complex64) -> f64 {
        self.constant + self.harmonic_value(w) + self.centered.value(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubharmonicityReport {
    pub min_laplacian: f64,
    pub argmin: Complex64,
    pub pass: bool,
}

/// Precomputed Wirtinger derivatives feeding the derivative caps
/// `A^P_ℓ`, `2 ≤ ℓ ≤ deg P`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapTable {
    /// `orders[i]` holds every `∂^j ∂̄^k P` with `j + k = i + 2`, `j, k > 0`.
    orders: Vec<Vec<BivariatePolynomial>>,
}

impl CapTable {
    pub fn new(p: &HermitianPolynomial) -> Self {
        let deg = p.degree();
        let orders = (2..=deg.max(1))
            .map(|l| (1..l).map(|j| p.wirtinger_derivative(j, l - j)).collect())
            .collect();
        Self { orders }
    }

    /// Highest order in the table.
    pub fn max_order(&self) -> u32 {
        self.orders.len() as u32 + 1
    }

    /// `A^P_ℓ(z)`; zero outside the table's range.
    pub fn cap(&self, order: u32, z: Complex64) -> f64 {
        if order < 2 {
            return 0.0;
        }
        self.orders
            .get((order - 2) as usize)
            .map_or(0.0, |ds| ds.iter().map(|d| d.eval(z).norm()).fold(0.0, f64::max))
    }

    /// Iterator over `(ℓ, A^P_ℓ(z))`.
    pub fn caps(&self, z: Complex64) -> impl Iterator<Item = (u32, f64)> + '_ {
        (2..=self.max_order()).map(move |l| (l, self.cap(l, z)))
    }
}

/// `j!·k!`, the factor linking derivative caps and coefficient caps at the origin.
pub fn factorial_weight(j: u32, k: u32) -> f64 {
    factorial(j) * factorial(k)
}
