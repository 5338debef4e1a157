//! Uncorrelated bivariate SABR with `beta = 1` and unit vol-of-vol:
//! the rate function, the curvature data at the saddle points and the
//! resulting small-time basket call prices.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};
use crate::price::{Mode, PriceResult};
use crate::saddle_core::{
    along_strike_curve, classify_minimizers, half_acosh_sq_derivs, ln_upsilon_exact,
    ln_upsilon_quartic_exact, quartic_gaussian_constant, strike_curve_y, MinimizerKind,
    DEGENERATE_TOL,
};
use crate::special::ln_x_over_sinh;

/// Relative distance to `2e` inside which a generic price carries a warning.
pub const NEAR_DEGENERATE_BAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncorrParams {
    pub a0: f64,
}

impl UncorrParams {
    pub fn new(a0: f64) -> Result<Self> {
        Ok(UncorrParams {
            a0: require_positive("a0", a0)?,
        })
    }
}

/// Saddle-point data of the basket call at strike `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncorrSaddle {
    pub strike: f64,
    pub kind: MinimizerKind,
    /// Left-most minimiser; the other one (if any) is its mirror `(y*, x*)`.
    pub x_star: f64,
    pub y_star: f64,
    pub a_star: f64,
    /// Minimal distance `Hbar` from the start point to the strike surface.
    pub hbar: f64,
    /// Rate `phi = Hbar^2 / 2`.
    pub phi: f64,
    pub psi2: f64,
    pub phi_aa: f64,
    pub n_minima: usize,
}

/// Height minimising the distance from `(0, 0, a0)` to `(x, y, a)`.
pub fn a_star(x: f64, y: f64, a0: f64) -> f64 {
    (a0 * a0 + x * x + y * y).sqrt()
}

/// Distance from `(0, 0, a0)` to `(x, y, a_star)`.
pub fn rho_star(x: f64, y: f64, a0: f64) -> f64 {
    // acosh(sqrt(1 + r^2/a0^2)) = asinh(r/a0)
    ((x * x + y * y).sqrt() / a0).asinh()
}

/// Second derivative in `a` of `rho^2 / 2` at `a_star`.
pub fn phi_aa(x: f64, y: f64, a0: f64) -> f64 {
    let rho = rho_star(x, y, a0);
    crate::special::x_over_sinh(rho) / (a0 * a_star(x, y, a0))
}

/// `Hbar` along the strike curve, `x < log K`.
pub fn hbar_on_curve(x: f64, k: f64, a0: f64) -> f64 {
    let y = strike_curve_y(x, k);
    rho_star(x, y, a0)
}

/// `Psi(x) = Hbar(x, log(K - e^x))^2 / 2`.
pub fn psi(x: f64, k: f64, a0: f64) -> f64 {
    let h = hbar_on_curve(x, k, a0);
    0.5 * h * h
}

/// Exact second derivative of [`psi`].
pub fn psi_d2(x: f64, k: f64, a0: f64) -> f64 {
    let y = strike_curve_y(x, k);
    let b2 = a0 * a0;
    let g = (1.0 + (x * x + y * y) / b2).sqrt();
    let g3 = g * g * g;
    let grad = (x / (b2 * g), y / (b2 * g));
    let hess = (
        1.0 / (b2 * g) - x * x / (b2 * b2 * g3),
        -x * y / (b2 * b2 * g3),
        1.0 / (b2 * g) - y * y / (b2 * b2 * g3),
    );
    let (g1, g2) = along_strike_curve(x, k, grad, hess);
    let (h1, h2) = half_acosh_sq_derivs(rho_star(x, y, a0));
    h2 * g1 * g1 + h1 * g2
}

fn check_strike(k: f64) -> Result<f64> {
    require_finite("K", k)?;
    if k <= 2.0 {
        return Err(Error::Domain {
            what: "K",
            value: k,
            domain: "K > 2, out of the money",
        });
    }
    Ok(k)
}

/// Rate function and saddle data at strike `K > 2`.
pub fn phi_rate(k: f64, params: &UncorrParams) -> Result<UncorrSaddle> {
    check_strike(k)?;
    let a0 = params.a0;
    let class = classify_minimizers(k, DEGENERATE_TOL)?;
    let z = class.locations[0];
    let (x, y) = (z.ln(), (k - z).ln());
    let hbar = match class.kind {
        // closed form on the symmetric diagonal
        MinimizerKind::UniqueCenter | MinimizerKind::DegenerateQuartic => {
            (2f64.sqrt() * (k / 2.0).ln().abs() / a0).asinh()
        }
        MinimizerKind::SymmetricPair => rho_star(x, y, a0),
    };
    Ok(UncorrSaddle {
        strike: k,
        kind: class.kind,
        x_star: x,
        y_star: y,
        a_star: a_star(x, y, a0),
        hbar,
        phi: 0.5 * hbar * hbar,
        psi2: if class.kind == MinimizerKind::DegenerateQuartic { 0.0 } else { psi_d2(x, k, a0) },
        phi_aa: phi_aa(x, y, a0),
        n_minima: class.locations.len(),
    })
}

/// Log of the constant `C` in `E[sigma_S^2 delta(S - K)] ~ C u^{-1/2} exp(-phi/u)`.
fn ln_time_density_constant(s: &UncorrSaddle, a0: f64) -> f64 {
    let (x, y) = (s.x_star, s.y_star);
    let tanaka = (2.0 * x).exp() + (2.0 * y).exp();
    (s.n_minima as f64).ln() - y + tanaka.ln() - 0.5 * (x + y) - 0.5 * (a0 * s.a_star).ln()
        - 0.5 * (2.0 * PI).ln()
        - 0.5 * (s.phi_aa * s.psi2).ln()
        + ln_x_over_sinh(s.hbar)
}

/// Prefactor `psi(k)` of the leading-order price `psi t^{3/2} exp(-phi/t)`.
pub fn psi_prefactor(k: f64, params: &UncorrParams) -> Result<f64> {
    let s = phi_rate(k, params)?;
    if s.kind == MinimizerKind::DegenerateQuartic {
        return Err(Error::DegenerateSaddle { x: s.x_star, second_derivative: 0.0 });
    }
    let (x, y) = (s.x_star, s.y_star);
    let num = s.n_minima as f64 * ((2.0 * x).exp() + (2.0 * y).exp()) * (-y).exp() * (-0.5 * (x + y)).exp();
    let den = (2.0 * PI).sqrt() * (params.a0 * s.a_star).sqrt() * s.hbar * s.hbar.sinh() * (s.phi_aa * s.psi2).sqrt();
    Ok(num / den)
}

/// Small-time price of the basket call `E[(e^X + e^Y - K)^+]`.
///
/// Strikes within [`DEGENERATE_TOL`] of `2e` are priced by
/// [`price_uncorr_degenerate`]; strikes within a relative
/// [`NEAR_DEGENERATE_BAND`] of it carry a warning with both values.
pub fn price_uncorr(k: f64, t: f64, params: &UncorrParams, mode: Mode) -> Result<PriceResult> {
    check_strike(k)?;
    require_positive("t", t)?;
    let s = phi_rate(k, params)?;
    if s.kind == MinimizerKind::DegenerateQuartic {
        return price_uncorr_degenerate(t, params, mode);
    }
    if s.psi2 <= 0.0 {
        return Err(Error::DegenerateSaddle { x: s.x_star, second_derivative: s.psi2 });
    }
    let ln_c = ln_time_density_constant(&s, params.a0);
    let ln_p = match mode {
        Mode::Asymptotic => ln_c - 2.0 * s.hbar.ln() + 1.5 * t.ln() - s.phi / t,
        Mode::UpsilonExact => ln_c - 2f64.ln() + ln_upsilon_exact(s.hbar, t)?,
    };
    let mut out = PriceResult::from_ln(mode.into(), ln_p);
    let two_e = 2.0 * E;
    if ((k - two_e) / two_e).abs() < NEAR_DEGENERATE_BAND {
        let deg = price_uncorr_degenerate(t, params, mode)?;
        out.warnings.push(format!(
            "strike {k} is within {NEAR_DEGENERATE_BAND} (relative) of 2e: generic price {:e}, degenerate price {:e}",
            out.value, deg.value
        ));
    }
    Ok(out)
}

/// Coefficient of `(x - 1)^4` in `Hbar` along the curve at `K = 2e`.
pub fn degenerate_quartic_coeff(a0: f64) -> f64 {
    (5.0 / 12.0) / (2.0 * a0 * a0 + 4.0).sqrt()
}

/// Price at the degenerate strike `K = 2e`, where the two minimisers merge.
pub fn price_uncorr_degenerate(t: f64, params: &UncorrParams, mode: Mode) -> Result<PriceResult> {
    require_positive("t", t)?;
    let a0 = params.a0;
    let abar = (a0 * a0 + 2.0).sqrt();
    let hbar = (2f64.sqrt() / a0).asinh();
    let phi_aa = phi_aa(1.0, 1.0, a0);
    let xi = degenerate_quartic_coeff(a0);
    let quartic = quartic_gaussian_constant(xi * hbar)?;
    // (e^{2x} + e^{2y}) e^{-y} e^{-(x+y)/2} = 2 at x = y = 1
    let ln_c = 2f64.ln() - 0.5 * (a0 * abar).ln() - (2.0 * PI).ln() - 0.5 * phi_aa.ln()
        + quartic.ln()
        + ln_x_over_sinh(hbar);
    let ln_p = match mode {
        Mode::Asymptotic => ln_c - 2.0 * hbar.ln() + 1.25 * t.ln() - hbar * hbar / (2.0 * t),
        Mode::UpsilonExact => ln_c - 2f64.ln() + ln_upsilon_quartic_exact(hbar, t)?,
    };
    Ok(PriceResult::from_ln(mode.into(), ln_p))
}

/// Leading-order density of the basket `e^X + e^Y` at `K` in `(2, 2e)`.
pub fn density_sum_uncorr(k: f64, t: f64, params: &UncorrParams) -> Result<f64> {
    check_strike(k)?;
    require_positive("t", t)?;
    if k >= 2.0 * E {
        return Err(Error::Domain {
            what: "K",
            value: k,
            domain: "2 < K < 2e",
        });
    }
    let s = phi_rate(k, params)?;
    let (x, y) = (s.x_star, s.y_star);
    let ln_f = -y - 0.5 * (x + y) - 0.5 * params.a0.ln() - 2.5 * s.a_star.ln() - 0.5 * (2.0 * PI * t).ln()
        - 0.5 * (s.phi_aa * s.psi2).ln()
        + ln_x_over_sinh(s.hbar)
        - s.phi / t;
    Ok(ln_f.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saddle_core::second_derivative;

    #[test]
    fn closed_form_quantities() {
        assert_eq!(a_star(0.0, 0.0, 1.0), 1.0);
        assert!((a_star(0.3, 0.4, 1.0) - 1.25f64.sqrt()).abs() < 1e-15);
        assert!((rho_star(0.3, 0.4, 1.0) - 1.25f64.sqrt().acosh()).abs() < 1e-14);
        assert!((phi_aa(0.0, 0.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rate_below_2e() {
        let p = UncorrParams::new(1.0).unwrap();
        let s = phi_rate(3.0, &p).unwrap();
        let want = 0.5 * (1.0 + 2.0 * 1.5f64.ln().powi(2)).sqrt().acosh().powi(2);
        assert!((s.phi - want).abs() < 1e-14);
        assert_eq!(s.n_minima, 1);
        assert!(s.psi2 > 0.0);
    }

    #[test]
    fn rate_above_2e_has_two_minima() {
        let p = UncorrParams::new(1.0).unwrap();
        let s = phi_rate(10.0, &p).unwrap();
        assert_eq!(s.n_minima, 2);
        assert!(s.x_star < s.y_star);
        assert!(s.phi < psi(5f64.ln(), 10.0, 1.0));
    }

    #[test]
    fn psi_d2_matches_differences() {
        for &(x, k, a0) in &[(0.1, 2.5, 1.0), (-0.4, 4.0, 0.5), (0.2, 9.0, 2.0)] {
            let fd = second_derivative(&|x| psi(x, k, a0), x);
            let an = psi_d2(x, k, a0);
            assert!((fd - an).abs() < 1e-7 * an.abs().max(1.0), "{fd} {an}");
        }
    }

    #[test]
    fn rejects_itm_strikes() {
        let p = UncorrParams::new(1.0).unwrap();
        assert!(matches!(phi_rate(2.0, &p), Err(Error::Domain { .. })));
        assert!(price_uncorr(1.5, 0.01, &p, Mode::Asymptotic).is_err());
    }

    #[test]
    fn degenerate_strike_redirects() {
        let p = UncorrParams::new(1.0).unwrap();
        let a = price_uncorr(2.0 * E, 0.005, &p, Mode::Asymptotic).unwrap();
        let b = price_uncorr_degenerate(0.005, &p, Mode::Asymptotic).unwrap();
        assert_eq!(a.value, b.value);
        let near = price_uncorr(2.0 * E * (1.0 + 1e-5), 0.005, &p, Mode::Asymptotic).unwrap();
        assert_eq!(near.warnings.len(), 1);
    }

    #[test]
    fn prefactor_matches_transcribed_form() {
        let p = UncorrParams::new(1.0).unwrap();
        for &k in &[2.3, 5.0, 12.0] {
            let t: f64 = 0.01;
            let s = phi_rate(k, &p).unwrap();
            let direct = psi_prefactor(k, &p).unwrap() * t.powf(1.5) * (-s.phi / t).exp();
            let composed = price_uncorr(k, t, &p, Mode::Asymptotic).unwrap().value;
            assert!((direct / composed - 1.0).abs() < 1e-12);
        }
    }
}
