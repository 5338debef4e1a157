//! Shared machinery for the saddle-point analysis: the auxiliary function
//! `hbar` that locates the minimisers of the uncorrelated rate, the family of
//! exact time integrals `Upsilon`, and one-dimensional minimisation.

use std::f64::consts::{E, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::special::{gamma, ln_upper_gamma};

/// `hbar(z) = log(z)^2 + log(K - z)^2` on `0 < z < K`.
pub fn hbar(z: f64, k: f64) -> f64 {
    let (l1, l2) = (z.ln(), (k - z).ln());
    l1 * l1 + l2 * l2
}

pub fn hbar_d1(z: f64, k: f64) -> f64 {
    2.0 * z.ln() / z - 2.0 * (k - z).ln() / (k - z)
}

pub fn hbar_d2(z: f64, k: f64) -> f64 {
    let w = k - z;
    2.0 * (1.0 - z.ln()) / (z * z) + 2.0 * (1.0 - w.ln()) / (w * w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimizerKind {
    /// `K < 2e`: the single minimiser `z = K/2`.
    UniqueCenter,
    /// `K = 2e`: a single minimiser at `z = e` with vanishing second derivative.
    DegenerateQuartic,
    /// `K > 2e`: two minimisers `z*` and `K - z*`, with `K/2` a local maximum.
    SymmetricPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerClass {
    pub kind: MinimizerKind,
    /// Minimiser locations in `z`, ascending.
    pub locations: Vec<f64>,
    pub min_value: f64,
}

/// Default half-width of the band around `K = 2e` treated as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Classify and locate the minimisers of `hbar` on `(0, K)`.
pub fn classify_minimizers(k: f64, tol: f64) -> Result<MinimizerClass> {
    require_positive("K", k)?;
    let two_e = 2.0 * E;
    if (k - two_e).abs() < tol {
        return Ok(MinimizerClass {
            kind: MinimizerKind::DegenerateQuartic,
            locations: vec![k / 2.0],
            min_value: hbar(k / 2.0, k),
        });
    }
    if k < two_e {
        return Ok(MinimizerClass {
            kind: MinimizerKind::UniqueCenter,
            locations: vec![k / 2.0],
            min_value: hbar(k / 2.0, k),
        });
    }
    // hbar'' is positive near 0 and negative at K/2; its first zero y1 bounds
    // the convex region that holds the left minimiser.
    let y1 = bisect(|z| hbar_d2(z, k), 1e-300_f64.max(k * 1e-12), k / 2.0);
    let z = bisect(|z| hbar_d1(z, k), k * 1e-300_f64.max(1e-15), y1);
    Ok(MinimizerClass {
        kind: MinimizerKind::SymmetricPair,
        locations: vec![z, k - z],
        min_value: hbar(z, k),
    })
}

/// Exact `int_0^t u^{-1/2} exp(-k^2 / 2u) du`.
pub fn upsilon_exact(k: f64, t: f64) -> Result<f64> {
    ln_upsilon_exact(k, t).map(f64::exp)
}

pub fn ln_upsilon_exact(k: f64, t: f64) -> Result<f64> {
    require_positive("k", k)?;
    require_positive("t", t)?;
    let z2 = k * k / (2.0 * t);
    if z2 < 1.0 {
        let z = z2.sqrt();
        let v = 2.0 * t.sqrt() * (-z2).exp() - k * (2.0 * PI).sqrt() * libm::erfc(z);
        Ok(v.ln())
    } else {
        // same closed form, written as (k / sqrt 2) Gamma(-1/2, k^2/2t)
        Ok((k / SQRT_2).ln() + ln_upper_gamma(-0.5, z2))
    }
}

/// Small-time expansion `(2/k^2) t^{3/2} exp(-k^2/2t)` of [`upsilon_exact`].
pub fn upsilon_asymptotic(k: f64, t: f64) -> f64 {
    2.0 / (k * k) * t.powf(1.5) * (-k * k / (2.0 * t)).exp()
}

/// Exact `int_0^t u^{-3/4} exp(-k^2 / 2u) du`.
pub fn upsilon_quartic_exact(k: f64, t: f64) -> Result<f64> {
    ln_upsilon_quartic_exact(k, t).map(f64::exp)
}

pub fn ln_upsilon_quartic_exact(k: f64, t: f64) -> Result<f64> {
    require_positive("k", k)?;
    require_positive("t", t)?;
    Ok(0.5 * k.ln() - 0.25 * 2f64.ln() + ln_upper_gamma(-0.25, k * k / (2.0 * t)))
}

/// Small-time expansion `(2/k^2) t^{5/4} exp(-k^2/2t)` of [`upsilon_quartic_exact`].
pub fn upsilon_quartic_asymptotic(k: f64, t: f64) -> f64 {
    2.0 / (k * k) * t.powf(1.25) * (-k * k / (2.0 * t)).exp()
}

/// `int exp(-zeta u^4) du = Gamma(1/4) / (2 zeta^{1/4})`.
pub fn quartic_gaussian_constant(zeta: f64) -> Result<f64> {
    require_positive("zeta", zeta)?;
    Ok(gamma(0.25) / (2.0 * zeta.powf(0.25)))
}

/// A minimiser of a one-dimensional objective with the curvature data needed
/// for Laplace's method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacePoint {
    pub x_star: f64,
    pub value: f64,
    pub second_deriv: f64,
    /// `f''''(x*) / 24` when the second derivative vanishes.
    pub quartic_coeff: Option<f64>,
}

/// Options for the multi-start search.
#[derive(Debug, Clone, Copy)]
pub struct MultiStart {
    pub starts: usize,
    /// Minimisers closer than this are merged.
    pub cluster_radius: f64,
    /// Minima within `value_tol * max(1, |f_min|)` of the lowest are global.
    pub value_tol: f64,
}

impl Default for MultiStart {
    fn default() -> Self {
        MultiStart {
            starts: 200,
            cluster_radius: 1e-6,
            value_tol: 1e-9,
        }
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..300 {
        if (b - a).abs() <= tol * (1.0 + c.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Fourth-order central second derivative with an automatically chosen step.
pub fn second_derivative<F: Fn(f64) -> f64>(f: &F, x: f64) -> f64 {
    let d2 = |h: f64| {
        (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
            / (12.0 * h * h)
    };
    richardson_pick(d2, 1e-2 * (1.0 + x.abs()))
}

/// Fourth derivative by central differences with an automatically chosen step.
pub fn fourth_derivative<F: Fn(f64) -> f64>(f: &F, x: f64) -> f64 {
    let d4 = |h: f64| {
        (-f(x + 3.0 * h) + 12.0 * f(x + 2.0 * h) - 39.0 * f(x + h) + 56.0 * f(x)
            - 39.0 * f(x - h)
            + 12.0 * f(x - 2.0 * h)
            - f(x - 3.0 * h))
            / (6.0 * h.powi(4))
    };
    richardson_pick(d4, 0.1 * (1.0 + x.abs()))
}

fn richardson_pick<D: Fn(f64) -> f64>(d: D, h0: f64) -> f64 {
    let mut h = h0;
    let mut prev = d(h);
    let mut best = (f64::INFINITY, prev);
    for _ in 0..12 {
        h *= 0.5;
        let cur = d(h);
        let diff = (cur - prev).abs();
        if diff < best.0 {
            best = (diff, cur);
        }
        prev = cur;
    }
    best.1
}

/// All interior local minima of `f` on `[lo, hi]` found from an equispaced
/// grid of `opts.starts` points, refined by golden section and merged within
/// `opts.cluster_radius`. Sorted by value.
pub fn local_minima<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, opts: &MultiStart) -> Vec<(f64, f64)> {
    let n = opts.starts.max(3);
    let h = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut found: Vec<(f64, f64)> = Vec::new();
    for i in 1..n - 1 {
        if fs[i] <= fs[i - 1] && fs[i] <= fs[i + 1] && fs[i].is_finite() {
            let (x, fx) = golden_section(f, xs[i - 1], xs[i + 1], 1e-13);
            found.push((x, fx));
        }
    }
    found.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for cand in found {
        if merged
            .iter()
            .all(|m| (m.0 - cand.0).abs() > opts.cluster_radius * (1.0 + m.0.abs()))
        {
            merged.push(cand);
        }
    }
    merged
}

/// The global minimisers among [`local_minima`].
pub fn global_minima<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, opts: &MultiStart) -> Vec<(f64, f64)> {
    let all = local_minima(f, lo, hi, opts);
    let Some(best) = all.first().map(|m| m.1) else {
        return all;
    };
    let cut = best + opts.value_tol * best.abs().max(1.0);
    let mut g: Vec<(f64, f64)> = all.into_iter().filter(|m| m.1 <= cut).collect();
    g.sort_by(|a, b| a.0.total_cmp(&b.0));
    g
}

/// Global interior minimiser of `f` on the bracket with its curvature data.
///
/// The second derivative is taken by finite differences; when it is below
/// `tol * max(1, |f*|)` the point is reported as degenerate with its quartic
/// coefficient.
pub fn minimize_1d<F: Fn(f64) -> f64>(f: F, bracket: (f64, f64), tol: f64) -> Result<LaplacePoint> {
    let (lo, hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid("bracket", format!("need finite lo < hi, got ({lo}, {hi})")));
    }
    let mins = global_minima(&f, lo, hi, &MultiStart::default());
    let Some(&(x, v)) = mins.first() else {
        return Err(Error::NoInteriorMinimum { lo, hi });
    };
    let f2 = second_derivative(&f, x);
    let quartic_coeff = if f2.abs() < tol * v.abs().max(1.0) {
        Some(fourth_derivative(&f, x) / 24.0)
    } else {
        None
    };
    Ok(LaplacePoint {
        x_star: x,
        value: v,
        second_deriv: f2,
        quartic_coeff,
    })
}

/// Derivatives of `h(g) = acosh(g)^2 / 2` expressed through `u = acosh(g)`.
pub(crate) fn half_acosh_sq_derivs(u: f64) -> (f64, f64) {
    if u < 1e-2 {
        let u2 = u * u;
        // u / sinh u and (sinh u - u cosh u) / sinh^3 u by series
        let d1 = 1.0 - u2 / 6.0 + 7.0 * u2 * u2 / 360.0;
        let d2 = -1.0 / 3.0 + 2.0 * u2 / 15.0 - 2.0 * u2 * u2 / 63.0;
        (d1, d2)
    } else {
        let (s, c) = (u.sinh(), u.cosh());
        (u / s, (s - u * c) / (s * s * s))
    }
}

/// First and second derivative along `y = log(K - e^x)` of a function with
/// partial derivatives `grad = (G_x, G_y)` and `hess = (G_xx, G_xy, G_yy)`.
pub(crate) fn along_strike_curve(x: f64, k: f64, grad: (f64, f64), hess: (f64, f64, f64)) -> (f64, f64) {
    let ex = x.exp();
    let yp = -ex / (k - ex);
    let ypp = -k * ex / ((k - ex) * (k - ex));
    let d1 = grad.0 + grad.1 * yp;
    let d2 = hess.0 + 2.0 * hess.1 * yp + hess.2 * yp * yp + grad.1 * ypp;
    (d1, d2)
}

/// `log(K - e^x)`, the strike curve `e^x + e^y = K`.
pub fn strike_curve_y(x: f64, k: f64) -> f64 {
    (k - x.exp()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_regions() {
        let c = classify_minimizers(3.0, DEGENERATE_TOL).unwrap();
        assert_eq!(c.kind, MinimizerKind::UniqueCenter);
        assert_eq!(c.locations, vec![1.5]);
        let c = classify_minimizers(2.0 * E, DEGENERATE_TOL).unwrap();
        assert_eq!(c.kind, MinimizerKind::DegenerateQuartic);
        assert!((c.locations[0] - E).abs() < 1e-15);
        let c = classify_minimizers(10.0, DEGENERATE_TOL).unwrap();
        assert_eq!(c.kind, MinimizerKind::SymmetricPair);
        let (z1, z2) = (c.locations[0], c.locations[1]);
        assert!((z1 + z2 - 10.0).abs() < 1e-14);
        assert!(hbar_d1(z1, 10.0).abs() < 1e-12);
        assert!(hbar_d2(z1, 10.0) > 0.0);
        assert!(c.min_value < hbar(5.0, 10.0));
    }

    #[test]
    fn upsilon_examples() {
        // reference values from 40-digit quadrature
        let v = upsilon_exact(1.0, 0.01).unwrap();
        assert!((v / 3.747_188_814_917_344e-25 - 1.0).abs() < 1e-12, "{v}");
        let q = upsilon_quartic_exact(1.0, 0.01).unwrap();
        assert!((q / 1.190_642_299_723_505_2e-24 - 1.0).abs() < 1e-12, "{q}");
        let a = upsilon_asymptotic(1.0, 0.01);
        assert!((v / a - 1.0).abs() < 0.05);
        let c = quartic_gaussian_constant(1.0).unwrap();
        assert!((c - 1.812_804_954_110_954).abs() < 1e-12);
    }

    #[test]
    fn upsilon_branches_join() {
        let k = 0.3f64;
        let t_edge = k * k / 2.0;
        let below = upsilon_exact(k, t_edge * 1.000_001).unwrap();
        let above = upsilon_exact(k, t_edge * 0.999_999).unwrap();
        assert!((below / above - 1.0).abs() < 1e-5);
    }

    #[test]
    fn minimize_quadratic_and_quartic() {
        let p = minimize_1d(|x| (x - 0.3) * (x - 0.3) + 1.0, (-2.0, 2.0), 1e-6).unwrap();
        assert!((p.x_star - 0.3).abs() < 1e-7);
        assert!((p.second_deriv - 2.0).abs() < 1e-6);
        assert!(p.quartic_coeff.is_none());
        let q = minimize_1d(|x: f64| 3.0 * x.powi(4), (-1.0, 2.0), 1e-6).unwrap();
        assert!(q.quartic_coeff.is_some());
        assert!((q.quartic_coeff.unwrap() - 3.0).abs() < 1e-3);
        assert!(matches!(
            minimize_1d(|x| x, (0.0, 1.0), 1e-6),
            Err(Error::NoInteriorMinimum { .. })
        ));
    }

    #[test]
    fn acosh_derivs_series_matches_closed_form() {
        let u = 0.99e-2;
        let (s, c) = (f64::sinh(u), f64::cosh(u));
        let (d1, d2) = half_acosh_sq_derivs(u);
        assert!((d1 - u / s).abs() < 1e-14);
        assert!((d2 - (s - u * c) / (s * s * s)).abs() < 1e-8);
    }
}
