//! Reference values by direct numerical integration of the leading-order
//! density, plus Black–Scholes pricing and implied volatility.
//!
//! All integrals are computed in log space relative to a reference level
//! taken at the peak of the integrand, so prices far below the smallest
//! positive double still come back with a finite `ln_value`.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::price::{Method, PriceResult};
use crate::quad::integrate;
use crate::sabr_correlated::CorrModel;
use crate::saddle_core::{golden_section, strike_curve_y};
use crate::special::{erfcx, norm_cdf};

/// Explicit integration box; `y` and `a` limits are intersected with the
/// payoff region and `a > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub a: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Windows around the peak, cut where the integrand has dropped by
    /// `exp(-safety^2 / 2)`.
    Auto { safety: f64 },
    Box(TruncationBox),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    /// Absolute tolerance in units of the reference level.
    pub abs_tol: f64,
    pub max_evals: usize,
    pub domain: Domain,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-6,
            abs_tol: 0.0,
            max_evals: 200_000_000,
            domain: Domain::Auto { safety: 12.0 },
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(invalid("rel_tol", format!("must lie in (0, 1e-2], got {}", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(invalid("abs_tol", "must be >= 0"));
        }
        if self.max_evals == 0 {
            return Err(invalid("max_evals", "must be positive"));
        }
        match self.domain {
            Domain::Auto { safety } => {
                require_positive("safety", safety)?;
            }
            Domain::Box(b) => {
                if !(b.x.0 < b.x.1 && b.y.0 < b.y.1 && b.a.0 < b.a.1) {
                    return Err(invalid("domain", "box limits must be increasing"));
                }
                if !(b.a.0 > 0.0) {
                    return Err(invalid("domain", format!("a_min must be positive, got {}", b.a.0)));
                }
            }
        }
        Ok(())
    }

    /// Log-drop at which windows are cut.
    fn cutoff(&self) -> f64 {
        let s = match self.domain {
            Domain::Auto { safety } => safety,
            Domain::Box(_) => 12.0,
        };
        (0.5 * s * s).max((10.0 / self.rel_tol).ln() + 10.0)
    }
}

const MAX_SEGMENTS: usize = 400;

/// Interval around `p` (clamped below at `floor`) where `f <= level`,
/// assuming `f` is unimodal with minimum at `p`.
fn level_window<F: Fn(f64) -> f64>(f: &F, p: f64, floor: f64, level: f64, step0: f64) -> (f64, f64) {
    let bisect = |mut inner: f64, mut outer: f64| {
        for _ in 0..40 {
            let mid = 0.5 * (inner + outer);
            if f(mid) < level {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        outer
    };
    let edge = |dir: f64| -> f64 {
        let mut inner = p;
        let mut step = step0;
        for _ in 0..60 {
            let mut outer = p + dir * step;
            if dir < 0.0 && outer <= floor {
                outer = floor;
                if f(floor) < level {
                    return floor;
                }
                return bisect(inner, outer);
            }
            if f(outer) >= level {
                return bisect(inner, outer);
            }
            inner = outer;
            step *= 2.0;
        }
        inner
    };
    let lo = if p <= floor { floor } else { edge(-1.0) };
    (lo, edge(1.0))
}

/// Sub-intervals of `[lo, hi]` where `profile <= min + drop`, found on a
/// grid and refined by bisection. Also returns the minimum and its location.
fn grid_windows<F: Fn(f64) -> f64>(profile: &F, lo: f64, hi: f64, drop: f64) -> (Vec<(f64, f64)>, f64, f64) {
    let n = 1201;
    let h = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| profile(x)).collect();
    let (imin, _) = vs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is not empty");
    let (xa, xb) = (xs[imin.saturating_sub(1)], xs[(imin + 1).min(n - 1)]);
    let (xmin, vmin) = golden_section(profile, xa, xb, 1e-12);
    let (xmin, vmin) = if vmin <= vs[imin] { (xmin, vmin) } else { (xs[imin], vs[imin]) };
    let level = vmin + drop;
    let inside: Vec<bool> = vs.iter().map(|&v| v <= level).collect();
    let refine = |a: f64, b: f64| -> f64 {
        // a inside, b outside
        let (mut a, mut b) = (a, b);
        for _ in 0..50 {
            let m = 0.5 * (a + b);
            if profile(m) <= level {
                a = m;
            } else {
                b = m;
            }
        }
        b
    };
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < n {
        if !inside[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && inside[i + 1] {
            i += 1;
        }
        let end = i;
        let a = if start == 0 { xs[0] } else { refine(xs[start], xs[start - 1]) };
        let b = if end == n - 1 { xs[n - 1] } else { refine(xs[end], xs[end + 1]) };
        // one grid step of slack on each side
        let a = (a - h).max(lo);
        let b = (b + h).min(hi);
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
        i += 1;
    }
    if out.is_empty() {
        out.push((xa, xb));
    }
    (out, vmin, xmin)
}

struct Budget {
    used: Cell<usize>,
    max: usize,
}

impl Budget {
    fn take(&self) -> bool {
        let u = self.used.get() + 1;
        self.used.set(u);
        u <= self.max
    }
    fn exhausted(&self) -> bool {
        self.used.get() > self.max
    }
}

/// `y` minimising the distance at fixed `x` over the whole line.
fn unconstrained_y(model: &CorrModel, x: f64) -> f64 {
    // cosh(Hbar) is convex in y; bracket and golden-section
    let f = |y: f64| model.cosh_hbar_m1(x, y);
    let mut lo = -1.0;
    let mut hi = 1.0;
    while f(lo) < f(lo + 0.5) && lo > -200.0 {
        lo *= 2.0;
    }
    while f(hi) < f(hi - 0.5) && hi < 200.0 {
        hi *= 2.0;
    }
    golden_section(&f, lo, hi, 1e-12).0
}

struct Integrator<'a> {
    model: &'a CorrModel,
    t: f64,
    spec: &'a QuadratureSpec,
    drop: f64,
    ln_ref: f64,
    budget: Budget,
}

impl<'a> Integrator<'a> {
    fn rate(&self, h: f64) -> f64 {
        let al = self.model.params.alpha;
        h * h / (2.0 * al * al)
    }

    /// Integral over `a` of the scaled density at `(x, y)`.
    fn inner(&self, x: f64, y: f64) -> (f64, f64) {
        let t = self.t;
        let (vlo, vhi) = match self.spec.domain {
            Domain::Box(b) => (b.a.0.ln(), b.a.1.ln()),
            Domain::Auto { .. } => {
                let vs = self.model.a_star(x, y).ln();
                let q = |v: f64| self.rate(self.model.d(x, y, v.exp())) / t;
                let level = q(vs) + self.drop;
                let step = 0.5 * t.sqrt() * self.model.params.alpha;
                level_window(&q, vs, f64::NEG_INFINITY, level, step)
            }
        };
        let f = |v: f64| {
            if !self.budget.take() {
                return (0.0, 0.0);
            }
            let e = self.model.ln_p_hat1(x, y, v.exp(), t) + v - self.ln_ref;
            (e.exp(), 0.0)
        };
        let r = integrate(f, vlo, vhi, self.spec.rel_tol / 20.0, 0.0, MAX_SEGMENTS);
        (r.value, r.error)
    }

    fn y_range(&self, x: f64, y_floor: f64) -> (f64, f64) {
        match self.spec.domain {
            Domain::Box(b) => (b.y.0.max(y_floor), b.y.1),
            Domain::Auto { .. } => {
                let t = self.t;
                let yu = unconstrained_y(self.model, x);
                let p = yu.max(y_floor);
                let prof = |y: f64| self.rate(self.model.hbar(x, y)) / t;
                let level = prof(p) + self.drop;
                let step = 0.5 * t.sqrt() * self.model.params.alpha;
                level_window(&prof, p, y_floor, level, step)
            }
        }
    }

    /// Integral over the payoff region in `y` at fixed `x`.
    fn middle_price(&self, x: f64, k: f64) -> (f64, f64) {
        let ex = x.exp();
        let y_floor = if ex < k { strike_curve_y(x, k) } else { f64::NEG_INFINITY };
        let (ylo, yhi) = self.y_range(x, y_floor);
        if !(ylo < yhi) {
            return (0.0, 0.0);
        }
        let f = |y: f64| {
            let payoff = ex + y.exp() - k;
            if payoff <= 0.0 {
                return (0.0, 0.0);
            }
            let (v, e) = self.inner(x, y);
            (payoff * v, payoff * e)
        };
        let r = integrate(f, ylo, yhi, self.spec.rel_tol / 5.0, 0.0, MAX_SEGMENTS);
        (r.value, r.error)
    }
}

fn finish(ln_ref: f64, value: f64, error: f64, evals: usize) -> PriceResult {
    PriceResult {
        method: Method::Oracle,
        value: ln_ref.exp() * value,
        ln_value: ln_ref + value.ln(),
        error_estimate: Some(ln_ref.exp() * error),
        evaluations: evals,
        warnings: Vec::new(),
    }
}

/// Outer `x` range whose profile rises by `drop` above its minimum at both
/// ends, starting from `[lo, hi]`.
fn expand_range<F: Fn(f64) -> f64>(profile: &F, mut lo: f64, mut hi: f64, hi_cap: f64, drop: f64) -> (f64, f64) {
    let centre = 0.5 * (lo + hi);
    let base = profile(centre).min(profile(lo)).min(profile(hi));
    let mut w = 1.0;
    while profile(lo) - base < drop && w < 64.0 {
        lo -= w;
        w *= 2.0;
    }
    let mut w = 1.0;
    while hi < hi_cap && profile(hi) - base < drop && w < 64.0 {
        hi = (hi + w).min(hi_cap);
        w *= 2.0;
    }
    (lo, hi)
}

/// Basket call price `E[(e^X + e^Y - K)^+]` by nested adaptive quadrature of
/// the leading-order density.
pub fn numint_price(model: &CorrModel, k: f64, t: f64, spec: &QuadratureSpec) -> Result<PriceResult> {
    require_positive("K", k)?;
    require_positive("t", t)?;
    spec.validate()?;
    let drop = spec.cutoff();
    let al2 = model.params.alpha * model.params.alpha;
    let lk = k.ln();
    // minimal rate over the admissible y at fixed x, scaled by 1/t
    let y_eff = |x: f64| {
        let yu = unconstrained_y(model, x);
        if x.exp() < k {
            yu.max(strike_curve_y(x, k))
        } else {
            yu
        }
    };
    let profile = |x: f64| {
        let h = model.hbar(x, y_eff(x));
        h * h / (2.0 * al2 * t)
    };
    let (windows, xmin) = match spec.domain {
        Domain::Box(b) => (vec![b.x], 0.5 * (b.x.0 + b.x.1)),
        Domain::Auto { .. } => {
            let (lo, hi) = expand_range(&profile, lk.min(0.0) - 1.0, lk.max(0.0) + 1.0, f64::INFINITY, drop);
            let (w, _, xm) = grid_windows(&profile, lo, hi, drop);
            (w, xm)
        }
    };
    let ym = y_eff(xmin);
    let ln_ref = model.ln_p_hat1(xmin, ym, model.a_star(xmin, ym), t);
    let it = Integrator {
        model,
        t,
        spec,
        drop,
        ln_ref,
        budget: Budget { used: Cell::new(0), max: spec.max_evals },
    };
    let (mut value, mut error) = (0.0, 0.0);
    for (a, b) in windows {
        let r = integrate(|x| it.middle_price(x, k), a, b, spec.rel_tol, spec.abs_tol, MAX_SEGMENTS);
        value += r.value;
        error += r.error;
    }
    let evals = it.budget.used.get();
    if it.budget.exhausted() {
        return Err(Error::BudgetExhausted {
            max_evals: spec.max_evals,
            partial: ln_ref.exp() * value,
            estimate: ln_ref.exp() * error,
        });
    }
    Ok(finish(ln_ref, value, error, evals))
}

/// Density of the basket `e^X + e^Y` at `K` by quadrature along the curve
/// `e^x + e^y = K`.
pub fn numint_density(model: &CorrModel, k: f64, t: f64, spec: &QuadratureSpec) -> Result<PriceResult> {
    require_positive("K", k)?;
    require_positive("t", t)?;
    spec.validate()?;
    let drop = spec.cutoff();
    let lk = k.ln();
    let x_cap = lk - 1e-12;
    let profile = |x: f64| model.psi(x, k) / t;
    let (windows, xmin) = match spec.domain {
        Domain::Box(b) => (vec![(b.x.0, b.x.1.min(x_cap))], 0.5 * (b.x.0 + b.x.1.min(x_cap))),
        Domain::Auto { .. } => {
            let (lo, hi) = expand_range(&profile, lk - 2.0, lk - 0.5, x_cap, drop);
            let (lo, _) = expand_range(&profile, lo, hi, x_cap, drop);
            let (w, _, xm) = grid_windows(&profile, lo, x_cap, drop);
            (w, xm)
        }
    };
    let ym = strike_curve_y(xmin, k);
    let ln_ref = model.ln_p_hat1(xmin, ym, model.a_star(xmin, ym), t);
    let it = Integrator {
        model,
        t,
        spec,
        drop,
        ln_ref,
        budget: Budget { used: Cell::new(0), max: spec.max_evals },
    };
    let (mut value, mut error) = (0.0, 0.0);
    for (a, b) in windows {
        let f = |x: f64| {
            let y = strike_curve_y(x, k);
            let (v, e) = it.inner(x, y);
            let j = (-y).exp();
            (j * v, j * e)
        };
        let r = integrate(f, a, b, spec.rel_tol, spec.abs_tol, MAX_SEGMENTS);
        value += r.value;
        error += r.error;
    }
    if it.budget.exhausted() {
        return Err(Error::BudgetExhausted {
            max_evals: spec.max_evals,
            partial: ln_ref.exp() * value,
            estimate: ln_ref.exp() * error,
        });
    }
    Ok(finish(ln_ref, value, error, it.budget.used.get()))
}

fn bs_check(s: f64, k: f64, sigma: f64, t: f64) -> Result<()> {
    require_positive("S", s)?;
    require_positive("K", k)?;
    require_positive("sigma", sigma)?;
    require_positive("t", t)?;
    Ok(())
}

/// Log of the Black–Scholes call price (zero rates).
pub fn ln_bs_call(s: f64, k: f64, sigma: f64, t: f64) -> Result<f64> {
    bs_check(s, k, sigma, t)?;
    let sd = sigma * t.sqrt();
    let d1 = (s / k).ln() / sd + 0.5 * sd;
    let d2 = d1 - sd;
    if d1 >= 0.0 {
        return Ok((s * norm_cdf(d1) - k * norm_cdf(d2)).ln());
    }
    // K phi(d2) sqrt(pi/2) [erfcx(-d1/sqrt2) - erfcx(-d2/sqrt2)]
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let diff = erfcx(-d1 * r) - erfcx(-d2 * r);
    Ok(k.ln() - 0.5 * d2 * d2 - 0.5 * (2.0 * PI).ln() + 0.5 * (PI / 2.0).ln() + diff.ln())
}

pub fn bs_call(s: f64, k: f64, sigma: f64, t: f64) -> Result<f64> {
    ln_bs_call(s, k, sigma, t).map(f64::exp)
}

/// Black–Scholes vega `S phi(d1) sqrt(t)`.
pub fn bs_vega(s: f64, k: f64, sigma: f64, t: f64) -> Result<f64> {
    bs_check(s, k, sigma, t)?;
    let sd = sigma * t.sqrt();
    let d1 = (s / k).ln() / sd + 0.5 * sd;
    Ok(s * crate::special::norm_pdf(d1) * t.sqrt())
}

/// Implied volatility by safeguarded Newton iteration on `log C`.
pub fn bs_implied_vol(price: f64, s: f64, k: f64, t: f64) -> Result<f64> {
    bs_implied_vol_from_ln(price.ln(), s, k, t)
}

/// Implied volatility from `log C`, usable when `C` underflows.
pub fn bs_implied_vol_from_ln(ln_price: f64, s: f64, k: f64, t: f64) -> Result<f64> {
    require_positive("S", s)?;
    require_positive("K", k)?;
    require_positive("t", t)?;
    let lower = (s - k).max(0.0);
    let price = ln_price.exp();
    if !(ln_price < s.ln() && (lower == 0.0 || price > lower)) || ln_price.is_nan() {
        return Err(Error::Arbitrage { price, lower, upper: s });
    }
    let target = ln_price;
    let f = |v: f64| ln_bs_call(s, k, v, t).map(|l| l - target);
    let (mut lo, mut hi) = (1e-8, 5.0);
    if f(lo)? > 0.0 || f(hi)? < 0.0 {
        return Err(Error::Arbitrage { price, lower: bs_call(s, k, lo, t)?, upper: bs_call(s, k, hi, t)? });
    }
    let mut v = {
        // Brenner–Subrahmanyam style start, clamped into the bracket
        let g = ((2.0 * (s / k).ln().abs()) / t).sqrt();
        g.clamp(1e-3, 2.0)
    };
    for _ in 0..200 {
        let fv = f(v)?;
        if fv.abs() < 1e-15 {
            return Ok(v);
        }
        if fv < 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let slope = (bs_vega(s, k, v, t)?.ln() - (fv + target)).exp();
        let mut next = v - fv / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - v).abs() <= 1e-15 * v {
            return Ok(next);
        }
        v = next;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bs_reference_value() {
        let c = bs_call(1.0, 1.0, 0.2, 1.0).unwrap();
        let want = 2.0 * norm_cdf(0.1) - 1.0;
        assert!((c - want).abs() < 1e-15);
        assert!((c - 0.079_655_674_554_057_9).abs() < 1e-12);
    }

    #[test]
    fn bs_otm_branches_agree() {
        let (s, k, t): (f64, f64, f64) = (1.0, 1.05, 0.02);
        for &v in &[0.1, 0.2, 0.4] {
            let sd = v * f64::sqrt(t);
            let d1 = (s / k).ln() / sd + 0.5 * sd;
            let direct = s * norm_cdf(d1) - k * norm_cdf(d1 - sd);
            let c = bs_call(s, k, v, t).unwrap();
            assert!((c - direct).abs() < 1e-12 * direct.max(1e-300) + 1e-17);
        }
    }

    #[test]
    fn implied_vol_roundtrip() {
        for &(k, v, t) in &[(1.0, 0.2, 1.0), (1.2, 0.23, 0.02), (1.05, 0.3, 0.003), (0.8, 0.5, 0.5)] {
            let c = bs_call(1.0, k, v, t).unwrap();
            let iv = bs_implied_vol(c, 1.0, k, t).unwrap();
            assert!((iv - v).abs() < 1e-10, "k={k} v={v} iv={iv}");
        }
    }

    #[test]
    fn implied_vol_deep_otm_tiny_price() {
        let c = bs_call(1.0, 1.2, 0.23, 0.02).unwrap();
        assert!(c < 1e-10);
        let iv = bs_implied_vol(c, 1.0, 1.2, 0.02).unwrap();
        assert!((iv - 0.23).abs() < 1e-10);
    }

    #[test]
    fn implied_vol_rejects_arbitrage() {
        assert!(matches!(bs_implied_vol(1.5, 1.0, 1.0, 1.0), Err(Error::Arbitrage { .. })));
        assert!(matches!(bs_implied_vol(0.1, 1.0, 0.8, 1.0), Err(Error::Arbitrage { .. })));
    }

    #[test]
    fn quadrature_settings_validation() {
        let s = QuadratureSpec { rel_tol: 0.5, ..QuadratureSpec::default() };
        assert!(s.validate().is_err());
        let s = QuadratureSpec {
            domain: Domain::Box(TruncationBox { x: (-1.0, 1.0), y: (-1.0, 1.0), a: (0.0, 2.0) }),
            ..QuadratureSpec::default()
        };
        assert!(s.validate().is_err());
    }
}
