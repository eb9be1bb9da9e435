//! Python bindings: `import corank`.

use corank::geodesy::{distance, normal_geodesic};
use corank::hyperbolicity::{four_point_delta, gromov_product, CatlinOracle};
use corank::scaling::{blowdown_at_infinity, limit_at_infinity, normal_approach, scale_at_point};
use corank::{AmbientPoint, Complex64, DistanceOptions, HermitianPolynomial, ModelDomain, TangentVector};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(corank, CorankError, PyException);

fn err(e: corank::Error) -> PyErr {
    CorankError::new_err(format!("{}: {e}", e.name()))
}

fn options(quick: bool) -> DistanceOptions {
    if quick {
        DistanceOptions::quick()
    } else {
        DistanceOptions::default()
    }
}

type Coords = Vec<Complex64>;

/// Model domain `Re z0 + P(z1) + sum |z_a|^2 < 0`.
#[pyclass(name = "Domain", module = "corank", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDomain(ModelDomain);

#[pymethods]
impl PyDomain {
    /// `terms` are `(j, k, c)` triples for the monomials `c z^j conj(z)^k` of `P`.
    #[new]
    #[pyo3(signature = (dim, terms, label = "P"))]
    fn new(dim: usize, terms: Vec<(u32, u32, Complex64)>, label: &str) -> PyResult<Self> {
        let poly = HermitianPolynomial::from_terms(&terms).map_err(err)?;
        ModelDomain::new(dim, poly, label).map(Self).map_err(err)
    }

    /// `P = |z1|^(2m)`.
    #[staticmethod]
    fn radial(dim: usize, m: u32) -> Self {
        Self(ModelDomain::radial(dim, m))
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        ModelDomain::load(path).map(Self).map_err(err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.0.save(path).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.0.degree()
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label().to_string()
    }

    fn terms(&self) -> Vec<(u32, u32, Complex64)> {
        self.0.poly().terms().map(|((j, k), c)| (j, k, c)).collect()
    }

    fn defining_value(&self, z: Coords) -> PyResult<f64> {
        self.0.defining_value(&AmbientPoint::new(z)).map_err(err)
    }

    fn contains(&self, z: Coords) -> PyResult<bool> {
        self.0.contains(&AmbientPoint::new(z)).map_err(err)
    }

    /// Finsler metric `M(z; x)`.
    fn metric(&self, z: Coords, x: Coords) -> PyResult<f64> {
        corank::finsler::catlin_metric(&self.0, &AmbientPoint::new(z), &TangentVector::new(x)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Domain(dim={}, label={:?})", self.0.dim(), self.0.label())
    }
}

/// Distance bracket `(lower, upper)` between two interior points.
#[pyfunction]
#[pyo3(signature = (domain, p, q, quick = false))]
fn distance_bracket(py: Python<'_>, domain: &PyDomain, p: Coords, q: Coords, quick: bool) -> PyResult<(f64, f64)> {
    let (p, q) = (AmbientPoint::new(p), AmbientPoint::new(q));
    let est = py.detach(|| distance(&domain.0, &p, &q, &options(quick))).map_err(err)?;
    Ok((est.lower, est.upper))
}

/// Samples `(t, point)` of `x - (a e^{-t}, 0)` for a boundary point `x`.
#[pyfunction]
#[pyo3(signature = (domain, x, t0, t1, samples = 33, a = 1.0))]
fn geodesic(domain: &PyDomain, x: Coords, t0: f64, t1: f64, samples: usize, a: f64) -> PyResult<Vec<(f64, Coords)>> {
    let c = normal_geodesic(&domain.0, &AmbientPoint::new(x), a, (t0, t1), samples).map_err(err)?;
    Ok(c.params().iter().zip(c.points()).map(|(&t, z)| (t, z.0.clone())).collect())
}

/// Rescaled domains along `xi - (1/n, 0)`; returns `(scaled, limit)`.
#[pyfunction]
fn scale(domain: &PyDomain, xi: Coords, ns: Vec<u64>) -> PyResult<(Vec<PyDomain>, PyDomain)> {
    let seq = normal_approach(&domain.0, &AmbientPoint::new(xi), &ns).map_err(err)?;
    let out = scale_at_point(&domain.0, &seq).map_err(err)?;
    Ok((out.steps.into_iter().map(|s| PyDomain(s.scaled)).collect(), PyDomain(out.limit)))
}

/// Blowdown at infinity by factor `n`.
#[pyfunction]
fn blowdown(domain: &PyDomain, n: u64) -> PyResult<PyDomain> {
    blowdown_at_infinity(&domain.0, n).map(PyDomain).map_err(err)
}

/// Top homogeneous part of `P`, the blowdown limit.
#[pyfunction]
fn blowdown_limit(domain: &PyDomain) -> PyResult<PyDomain> {
    limit_at_infinity(&domain.0).map(PyDomain).map_err(err)
}

/// Interval `(lo, hi)` containing the Gromov product `(x|y)_o`.
#[pyfunction]
#[pyo3(signature = (domain, x, y, o, quick = false))]
fn gromov(py: Python<'_>, domain: &PyDomain, x: Coords, y: Coords, o: Coords, quick: bool) -> PyResult<(f64, f64)> {
    let (x, y, o) = (AmbientPoint::new(x), AmbientPoint::new(y), AmbientPoint::new(o));
    let oracle = CatlinOracle::new(&domain.0, options(quick));
    let g = py.detach(|| gromov_product(&oracle, &x, &y, &o)).map_err(err)?;
    Ok((g.lo, g.hi))
}

/// Four-point δ over the given interior points.
#[pyfunction]
#[pyo3(signature = (domain, points, quick = false))]
fn delta(py: Python<'_>, domain: &PyDomain, points: Vec<Coords>, quick: bool) -> PyResult<f64> {
    let points: Vec<AmbientPoint> = points.into_iter().map(AmbientPoint::new).collect();
    let oracle = CatlinOracle::new(&domain.0, options(quick));
    py.detach(|| four_point_delta(&points, &oracle)).map(|e| e.delta).map_err(err)
}

#[pymodule]
#[pyo3(name = "corank")]
fn corank_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CorankError", m.py().get_type::<CorankError>())?;
    m.add_class::<PyDomain>()?;
    m.add_function(wrap_pyfunction!(distance_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(scale, m)?)?;
    m.add_function(wrap_pyfunction!(blowdown, m)?)?;
    m.add_function(wrap_pyfunction!(blowdown_limit, m)?)?;
    m.add_function(wrap_pyfunction!(gromov, m)?)?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    Ok(())
}
