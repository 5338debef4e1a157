//! Python bindings for `basket_sabr`.

use basket_sabr::oracle::{self, QuadratureSpec};
use basket_sabr::{hyperbolic, sabr_uncorrelated as unc, saddle_core as sc};
use basket_sabr::{Mode, TanakaWeight, UncorrParams};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(basket_sabr, BasketSabrError, PyValueError);

fn err(e: basket_sabr::Error) -> PyErr {
    BasketSabrError::new_err(e.to_string())
}

fn mode(s: &str) -> PyResult<Mode> {
    match s {
        "asymptotic" => Ok(Mode::Asymptotic),
        "upsilon_exact" => Ok(Mode::UpsilonExact),
        _ => Err(PyValueError::new_err(format!("mode must be 'asymptotic' or 'upsilon_exact', got {s:?}"))),
    }
}

#[pyclass(frozen, get_all, name = "PriceResult")]
struct PyPriceResult {
    method: String,
    value: f64,
    ln_value: f64,
    error_estimate: Option<f64>,
    evaluations: usize,
    warnings: Vec<String>,
}

impl From<basket_sabr::PriceResult> for PyPriceResult {
    fn from(p: basket_sabr::PriceResult) -> Self {
        let method = match p.method {
            basket_sabr::Method::Asymptotic => "asymptotic",
            basket_sabr::Method::UpsilonExact => "upsilon_exact",
            basket_sabr::Method::Oracle => "oracle",
        };
        PyPriceResult {
            method: method.into(),
            value: p.value,
            ln_value: p.ln_value,
            error_estimate: p.error_estimate,
            evaluations: p.evaluations,
            warnings: p.warnings,
        }
    }
}

#[pymethods]
impl PyPriceResult {
    fn __repr__(&self) -> String {
        format!("PriceResult(method={:?}, value={:e})", self.method, self.value)
    }
}

/// Saddle data: minimal distance, rate and one `(x, y, a_star, psi2)` per minimiser.
#[pyclass(frozen, get_all, name = "Saddle")]
struct PySaddle {
    strike: f64,
    distance: f64,
    rate: f64,
    minimizers: Vec<(f64, f64, f64, f64)>,
}

#[pyclass(frozen, get_all, name = "MinimizerClass")]
struct PyMinimizerClass {
    kind: String,
    locations: Vec<f64>,
    min_value: f64,
}

/// Bivariate SABR with correlated drivers.
#[pyclass(frozen, name = "CorrModel")]
struct PyCorrModel(basket_sabr::CorrModel);

#[pymethods]
impl PyCorrModel {
    #[new]
    #[pyo3(signature = (sigma_x, sigma_y, alpha, rho_xy, rho_xa, rho_ya, a0, tanaka_weight = "diagonal"))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        sigma_x: f64,
        sigma_y: f64,
        alpha: f64,
        rho_xy: f64,
        rho_xa: f64,
        rho_ya: f64,
        a0: f64,
        tanaka_weight: &str,
    ) -> PyResult<Self> {
        let weight = match tanaka_weight {
            "diagonal" => TanakaWeight::Diagonal,
            "full" => TanakaWeight::Full,
            w => return Err(PyValueError::new_err(format!("tanaka_weight must be 'diagonal' or 'full', got {w:?}"))),
        };
        let p = basket_sabr::CorrParams { sigma_x, sigma_y, alpha, rho_xy, rho_xa, rho_ya, a0 };
        Ok(PyCorrModel(basket_sabr::CorrModel::new(p).map_err(err)?.with_weight(weight)))
    }

    /// Distance from the start point to `(x, y, a)` in the transformed metric.
    fn distance(&self, x: f64, y: f64, a: f64) -> f64 {
        self.0.d(x, y, a)
    }

    fn a_star(&self, x: f64, y: f64) -> f64 {
        self.0.a_star(x, y)
    }

    fn hbar(&self, x: f64, y: f64) -> f64 {
        self.0.hbar(x, y)
    }

    fn ln_density(&self, x: f64, y: f64, a: f64, t: f64) -> f64 {
        self.0.ln_p_hat1(x, y, a, t)
    }

    fn find_saddles(&self, k: f64) -> PyResult<PySaddle> {
        let s = self.0.find_saddles(k).map_err(err)?;
        Ok(PySaddle {
            strike: s.strike,
            distance: s.lambda,
            rate: s.rate,
            minimizers: s.minimizers.iter().map(|m| (m.x, m.y, m.a_star, m.psi2)).collect(),
        })
    }

    #[pyo3(signature = (k, t, mode = "upsilon_exact"))]
    fn price(&self, k: f64, t: f64, mode: &str) -> PyResult<PyPriceResult> {
        self.0.price(k, t, self::mode(mode)?).map(Into::into).map_err(err)
    }

    fn psi_prefactor(&self, k: f64) -> PyResult<f64> {
        self.0.psi_prefactor(k).map_err(err)
    }

    fn basket_density(&self, k: f64, t: f64) -> PyResult<f64> {
        self.0.density(k, t).map_err(err)
    }

    /// `(sigma0, a, sqrt(sigma0^2 + a t))`.
    fn implied_vol_expansion(&self, k: f64, t: f64) -> PyResult<(f64, f64, f64)> {
        let e = self.0.implied_vol_expansion(k, t).map_err(err)?;
        Ok((e.sigma0, e.a, e.sigma))
    }

    /// Quadrature price; releases the GIL while integrating.
    #[pyo3(signature = (k, t, rel_tol = 1e-6, max_evals = 200_000_000))]
    fn numint_price(&self, py: Python<'_>, k: f64, t: f64, rel_tol: f64, max_evals: usize) -> PyResult<PyPriceResult> {
        let spec = QuadratureSpec { rel_tol, max_evals, ..QuadratureSpec::default() };
        py.detach(|| oracle::numint_price(&self.0, k, t, &spec)).map(Into::into).map_err(err)
    }

    #[pyo3(signature = (k, t, rel_tol = 1e-6, max_evals = 200_000_000))]
    fn numint_density(&self, py: Python<'_>, k: f64, t: f64, rel_tol: f64, max_evals: usize) -> PyResult<PyPriceResult> {
        let spec = QuadratureSpec { rel_tol, max_evals, ..QuadratureSpec::default() };
        py.detach(|| oracle::numint_density(&self.0, k, t, &spec)).map(Into::into).map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (k, t, a0 = 1.0, mode = "upsilon_exact"))]
fn price_uncorr(k: f64, t: f64, a0: f64, mode: &str) -> PyResult<PyPriceResult> {
    let p = UncorrParams::new(a0).map_err(err)?;
    unc::price_uncorr(k, t, &p, self::mode(mode)?).map(Into::into).map_err(err)
}

/// `(phi, hbar, n_minima)` of the uncorrelated model at strike `K`.
#[pyfunction]
#[pyo3(signature = (k, a0 = 1.0))]
fn phi_rate(k: f64, a0: f64) -> PyResult<(f64, f64, usize)> {
    let p = UncorrParams::new(a0).map_err(err)?;
    unc::phi_rate(k, &p).map(|s| (s.phi, s.hbar, s.n_minima)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (k, tol = sc::DEGENERATE_TOL))]
fn classify_minimizers(k: f64, tol: f64) -> PyResult<PyMinimizerClass> {
    let c = sc::classify_minimizers(k, tol).map_err(err)?;
    let kind = match c.kind {
        basket_sabr::MinimizerKind::UniqueCenter => "unique_center",
        basket_sabr::MinimizerKind::DegenerateQuartic => "degenerate_quartic",
        basket_sabr::MinimizerKind::SymmetricPair => "symmetric_pair",
    };
    Ok(PyMinimizerClass { kind: kind.into(), locations: c.locations, min_value: c.min_value })
}

#[pyfunction]
fn upsilon_exact(k: f64, t: f64) -> PyResult<f64> {
    sc::upsilon_exact(k, t).map_err(err)
}

#[pyfunction]
fn upsilon_quartic_exact(k: f64, t: f64) -> PyResult<f64> {
    sc::upsilon_quartic_exact(k, t).map_err(err)
}

#[pyfunction]
fn heat_kernel_h3(rho: f64, t: f64) -> PyResult<f64> {
    hyperbolic::heat_kernel_h3(rho, t).map_err(err)
}

#[pyfunction]
fn geodesic_distance(p: (f64, f64, f64), q: (f64, f64, f64)) -> PyResult<f64> {
    let p = basket_sabr::HPoint::new(p.0, p.1, p.2).map_err(err)?;
    let q = basket_sabr::HPoint::new(q.0, q.1, q.2).map_err(err)?;
    Ok(hyperbolic::geodesic_distance(&p, &q))
}

#[pyfunction]
fn bs_call(s: f64, k: f64, sigma: f64, t: f64) -> PyResult<f64> {
    oracle::bs_call(s, k, sigma, t).map_err(err)
}

#[pyfunction]
fn bs_implied_vol(price: f64, s: f64, k: f64, t: f64) -> PyResult<f64> {
    oracle::bs_implied_vol(price, s, k, t).map_err(err)
}

#[pymodule]
#[pyo3(name = "basket_sabr")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BasketSabrError", m.py().get_type::<BasketSabrError>())?;
    m.add_class::<PyCorrModel>()?;
    m.add_class::<PyPriceResult>()?;
    m.add_class::<PySaddle>()?;
    m.add_class::<PyMinimizerClass>()?;
    m.add_function(wrap_pyfunction!(price_uncorr, m)?)?;
    m.add_function(wrap_pyfunction!(phi_rate, m)?)?;
    m.add_function(wrap_pyfunction!(classify_minimizers, m)?)?;
    m.add_function(wrap_pyfunction!(upsilon_exact, m)?)?;
    m.add_function(wrap_pyfunction!(upsilon_quartic_exact, m)?)?;
    m.add_function(wrap_pyfunction!(heat_kernel_h3, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic_distance, m)?)?;
    m.add_function(wrap_pyfunction!(bs_call, m)?)?;
    m.add_function(wrap_pyfunction!(bs_implied_vol, m)?)?;
    Ok(())
}
