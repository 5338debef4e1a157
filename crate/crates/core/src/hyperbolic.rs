//! Three-dimensional hyperbolic space in the Poincaré half-space model and
//! the leading-order densities of the uncorrelated model built from its heat
//! kernel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Result};
use crate::special::{ln_x_over_sinh, x_over_sinh};

/// Point `(x, y, a)` of the half-space, `a > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub a: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64, a: f64) -> Result<Self> {
        Ok(HPoint {
            x: require_finite("x", x)?,
            y: require_finite("y", y)?,
            a: require_positive("a", a)?,
        })
    }
}

/// Distance from the squared horizontal separation and the two heights.
pub(crate) fn distance_from_parts(dh2: f64, a_p: f64, a_q: f64) -> f64 {
    let da = a_p - a_q;
    let u = (dh2 + da * da) / (2.0 * a_p * a_q);
    // acosh(1 + u)
    (u + (u * (2.0 + u)).sqrt()).ln_1p()
}

/// Geodesic distance in the metric `(dx^2 + dy^2 + da^2) / a^2`.
pub fn geodesic_distance(p: &HPoint, q: &HPoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    distance_from_parts(dx * dx + dy * dy, p.a, q.a)
}

/// Log of the heat kernel of `Delta/2` on H^3 at distance `rho`.
pub fn ln_heat_kernel_h3(rho: f64, t: f64) -> f64 {
    -1.5 * (2.0 * PI * t).ln() + ln_x_over_sinh(rho) - t / 2.0 - rho * rho / (2.0 * t)
}

/// Heat kernel of `Delta/2` on H^3:
/// `(2 pi t)^{-3/2} (rho / sinh rho) exp(-t/2 - rho^2 / 2t)`.
pub fn heat_kernel_h3(rho: f64, t: f64) -> Result<f64> {
    require_positive("t", t)?;
    if !(rho >= 0.0) {
        return Err(crate::error::invalid("rho", format!("must be >= 0, got {rho}")));
    }
    Ok((2.0 * PI * t).powf(-1.5) * x_over_sinh(rho) * (-t / 2.0 - rho * rho / (2.0 * t)).exp())
}

/// Integral of the uncorrelated drift one-form from `(0, 0, a0)` to `(x, y, a)`.
pub fn drift_functional(x: f64, y: f64, a: f64, a0: f64) -> f64 {
    -0.5 * (x + y) + 0.5 * (a / a0).ln()
}

fn check_density_args(x: f64, y: f64, a: f64, t: f64, a0: f64) -> Result<()> {
    require_finite("x", x)?;
    require_finite("y", y)?;
    require_positive("a", a)?;
    require_positive("t", t)?;
    require_positive("a0", a0)?;
    Ok(())
}

/// Log of the leading-order transition density of `(X, Y, A)` in the
/// uncorrelated model, started at `(0, 0, a0)`.
pub fn ln_density_uncorr_leading(x: f64, y: f64, a: f64, t: f64, a0: f64) -> Result<f64> {
    check_density_args(x, y, a, t, a0)?;
    let rho = distance_from_parts(x * x + y * y, a, a0);
    Ok(-0.5 * a0.ln() - 2.5 * a.ln() - 0.5 * (x + y) - 1.5 * (2.0 * PI * t).ln()
        + ln_x_over_sinh(rho)
        - rho * rho / (2.0 * t))
}

pub fn density_uncorr_leading(x: f64, y: f64, a: f64, t: f64, a0: f64) -> Result<f64> {
    ln_density_uncorr_leading(x, y, a, t, a0).map(f64::exp)
}

/// Log of the density including the `exp(-t/8)` factor, an upper bound for
/// the true density.
pub fn ln_density_uncorr_bound(x: f64, y: f64, a: f64, t: f64, a0: f64) -> Result<f64> {
    Ok(ln_density_uncorr_leading(x, y, a, t, a0)? - t / 8.0)
}

pub fn density_uncorr_bound(x: f64, y: f64, a: f64, t: f64, a0: f64) -> Result<f64> {
    ln_density_uncorr_bound(x, y, a, t, a0).map(f64::exp)
}
