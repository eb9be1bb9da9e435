//! Numerical laboratory for the invariant geometry of Levi corank-one
//! polynomial model domains
//! `Ω_P = {Re z₀ + P(z₁, z̄₁) + Σ_{α≥2} |z_α|² < 0}`.
//!
//! * [`poly`]: Hermitian polynomials and Wirtinger calculus.
//! * [`domain`]: model domains, points and tangent vectors.
//! * [`finsler`]: the explicit Finsler metric `M_{r_P}` and Kobayashi bounds.
//! * [`geodesy`]: curve lengths, normal geodesics, bracketed distances.
//! * [`scaling`]: the boundary rescaling `ψ_n` and the dilation at infinity.
//! * [`hyperbolicity`]: Gromov products and δ estimates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod finsler;
pub mod geodesy;
pub mod hyperbolicity;
pub mod interval;
pub mod poly;
pub mod region;
pub mod scaling;

pub use domain::{AmbientPoint, DomainSpec, ModelDomain, TangentVector, TypeData};
pub use error::{Error, Result};
pub use geodesy::{CurvePath, DistanceEstimate, DistanceMethod, DistanceOptions};
pub use interval::Interval;
pub use poly::{BivariatePolynomial, HermitianPolynomial, PolyTerm, RecenterResult};
pub use region::Polydisc;

pub use num_complex::Complex64;
