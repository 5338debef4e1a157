#![allow(dead_code)]

use basket_sabr::CorrParams;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const SQRT_TENTH: f64 = 0.316_227_766_016_837_94;

pub fn table1() -> CorrParams {
    CorrParams {
        sigma_x: SQRT_TENTH,
        sigma_y: SQRT_TENTH,
        alpha: SQRT_TENTH,
        rho_xy: 0.01,
        rho_xa: 0.02,
        rho_ya: -0.05,
        a0: 1.0,
    }
}

pub fn table2() -> CorrParams {
    CorrParams { rho_xa: 0.2, rho_ya: 0.05, ..table1() }
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid scan plus golden refinement; returns every interior local minimum.
pub fn grid_minima<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let h = (hi - lo) / n as f64;
    let v: Vec<f64> = (0..=n).map(|i| f(lo + h * i as f64)).collect();
    (1..n)
        .filter(|&i| v[i] <= v[i - 1] && v[i] < v[i + 1])
        .map(|i| golden(&f, lo + h * (i - 1) as f64, lo + h * (i + 1) as f64))
        .collect()
}

/// Fourth-order central first derivative.
pub fn fd1<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative.
pub fn fd2<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
}

/// Root of a sign-changing `f` on `[a, b]` by bisection.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Random positive-definite parameter set.
pub fn random_params(rng: &mut ChaCha8Rng) -> CorrParams {
    loop {
        let p = CorrParams {
            sigma_x: rng.gen_range(0.1..1.5),
            sigma_y: rng.gen_range(0.1..1.5),
            alpha: rng.gen_range(0.1..1.5),
            rho_xy: rng.gen_range(-0.9..0.9),
            rho_xa: rng.gen_range(-0.9..0.9),
            rho_ya: rng.gen_range(-0.9..0.9),
            a0: rng.gen_range(0.3..3.0),
        };
        if basket_sabr::CorrModel::new(p).is_ok() {
            return p;
        }
    }
}

/// Least-squares slope of `y` on `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Sixth-order second derivative: Richardson extrapolation of [`fd2`].
pub fn fd2_rich<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (64.0 * fd2(&f, x, 0.5 * h) - fd2(&f, x, h)) / 63.0
}

/// [`fd2_rich`] on the halving sequence `h0 / 2^j`, returning the estimate
/// closest to its predecessor.
pub fn fd2_best<F: Fn(f64) -> f64>(f: F, x: f64, h0: f64) -> f64 {
    let mut prev = fd2_rich(&f, x, h0);
    let mut best = (f64::INFINITY, prev);
    let mut h = h0;
    for _ in 0..16 {
        h *= 0.5;
        let cur = fd2_rich(&f, x, h);
        if (cur - prev).abs() < best.0 {
            best = ((cur - prev).abs(), cur);
        }
        prev = cur;
    }
    best.1
}
