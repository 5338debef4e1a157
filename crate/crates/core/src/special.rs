//! Special functions: scaled complementary error function, normal CDF and the
//! upper incomplete gamma function for real (including negative) order.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Standard normal cumulative distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `exp(x^2) * erfc(x)`, accurate for large positive `x`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < 1.25 {
        return (x * x).exp() * libm::erfc(x);
    }
    // Gamma(1/2, x^2) = exp(-x^2) x cf
    x * upper_gamma_cf(0.5, x * x) / SQRT_PI
}

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Continued fraction `h` with `Gamma(s, x) = exp(-x) x^s h`.
///
/// Modified Lentz evaluation; converges quickly for `x > max(1, s + 1)`.
fn upper_gamma_cf(s: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=1000 {
        let fi = i as f64;
        let an = -fi * (fi - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Lower incomplete gamma by its power series, `s > 0`.
fn lower_gamma_series(s: f64, x: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut n = s;
    for _ in 0..1000 {
        n += 1.0;
        term *= x / n;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (-x + s * x.ln()).exp()
}

fn upper_gamma_small(s: f64, x: f64) -> f64 {
    if s > 0.0 {
        gamma(s) - lower_gamma_series(s, x)
    } else {
        // Gamma(s, x) = (Gamma(s + 1, x) - x^s e^{-x}) / s
        (upper_gamma_small(s + 1.0, x) - (s * x.ln() - x).exp()) / s
    }
}

/// Natural log of the upper incomplete gamma function `Gamma(s, x)` for
/// `x > 0` and real `s` that is not zero or a negative integer.
pub fn ln_upper_gamma(s: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= (s + 1.0).max(1.0) {
        -x + s * x.ln() + upper_gamma_cf(s, x).ln()
    } else {
        upper_gamma_small(s, x).ln()
    }
}

/// Upper incomplete gamma function `Gamma(s, x)`.
pub fn upper_gamma(s: f64, x: f64) -> f64 {
    ln_upper_gamma(s, x).exp()
}

/// `ln(x / sinh x)` for `x >= 0`.
pub fn ln_x_over_sinh(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-3 {
        let x2 = x * x;
        // ln(1 - x^2/6 + 7x^4/360) to O(x^6)
        -x2 / 6.0 + x2 * x2 / 180.0
    } else if x < 20.0 {
        (x / x.sinh()).ln()
    } else {
        (2.0 * x).ln() - x - (-(-2.0 * x).exp()).ln_1p()
    }
}

/// `x / sinh x`, equal to 1 at the origin.
pub fn x_over_sinh(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + 7.0 * x2 * x2 / 360.0
    } else {
        ln_x_over_sinh(x).exp()
    }
}

/// `acosh(1 + delta)` without cancellation for small `delta >= 0`.
pub fn acosh1p(delta: f64) -> f64 {
    (delta + (delta * (2.0 + delta)).sqrt()).ln_1p()
}
