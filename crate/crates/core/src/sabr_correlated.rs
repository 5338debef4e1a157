//! Correlated bivariate SABR with `beta = 1`:
//!
//! ```text
//! dX = sigma_x A dW1 - sigma_x^2 A^2 / 2 dt
//! dY = sigma_y A dW2 - sigma_y^2 A^2 / 2 dt
//! dA = alpha A dW3
//! ```
//!
//! The correlation matrix is factored as `Sigma Sigma^T` with an upper
//! triangular `Sigma`; the map `Sigma^{-1}` sends the scaled state
//! `(alpha x / sigma_x, alpha y / sigma_y, a)` to a point of the half-space
//! where the leading-order density is a hyperbolic heat kernel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_finite, require_positive, Error, Result};
use crate::hyperbolic::distance_from_parts;
use crate::price::{Mode, PriceResult};
use crate::saddle_core::{
    along_strike_curve, global_minima, half_acosh_sq_derivs, ln_upsilon_exact, strike_curve_y,
    MultiStart,
};
use crate::special::{acosh1p, ln_x_over_sinh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrParams {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub alpha: f64,
    pub rho_xy: f64,
    pub rho_xa: f64,
    pub rho_ya: f64,
    pub a0: f64,
}

impl CorrParams {
    /// Zero correlation with `sigma_x = sigma_y = alpha`.
    pub fn uncorrelated(alpha: f64, a0: f64) -> Self {
        CorrParams {
            sigma_x: alpha,
            sigma_y: alpha,
            alpha,
            rho_xy: 0.0,
            rho_xa: 0.0,
            rho_ya: 0.0,
            a0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("sigma_x", self.sigma_x)?;
        require_positive("sigma_y", self.sigma_y)?;
        require_positive("alpha", self.alpha)?;
        require_positive("a0", self.a0)?;
        for (name, r) in [("rho_xy", self.rho_xy), ("rho_xa", self.rho_xa), ("rho_ya", self.rho_ya)] {
            require_finite(name, r)?;
            if r.abs() >= 1.0 {
                return Err(invalid(name, format!("must lie in (-1, 1), got {r}")));
            }
        }
        Ok(())
    }
}

/// Cholesky-type factor of the correlation matrix and derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrGeometry {
    pub beta: f64,
    pub gamma: f64,
    pub xi: f64,
    pub rho_bar_ya: f64,
    pub rho_bar_xa: f64,
    pub sigma: [[f64; 3]; 3],
    pub sigma_inv: [[f64; 3]; 3],
    pub det_sigma: f64,
}

pub fn corr_geometry(p: &CorrParams) -> Result<CorrGeometry> {
    p.validate()?;
    let rbya = (1.0 - p.rho_ya * p.rho_ya).sqrt();
    let rbxa = (1.0 - p.rho_xa * p.rho_xa).sqrt();
    let gamma = p.rho_xy - p.rho_xa * p.rho_ya;
    let beta2 = rbxa * rbxa - gamma * gamma / (rbya * rbya);
    if !(beta2 > 0.0) {
        return Err(invalid(
            "rho",
            format!(
                "correlation matrix is not positive definite (rho_xy={}, rho_xa={}, rho_ya={})",
                p.rho_xy, p.rho_xa, p.rho_ya
            ),
        ));
    }
    let beta = beta2.sqrt();
    let xi = p.rho_xy * p.rho_ya - p.rho_xa;
    let r2 = rbya * rbya;
    Ok(CorrGeometry {
        beta,
        gamma,
        xi,
        rho_bar_ya: rbya,
        rho_bar_xa: rbxa,
        sigma: [[beta, gamma / rbya, p.rho_xa], [0.0, rbya, p.rho_ya], [0.0, 0.0, 1.0]],
        sigma_inv: [
            [1.0 / beta, -gamma / (r2 * beta), xi / (r2 * beta)],
            [0.0, 1.0 / rbya, -p.rho_ya / rbya],
            [0.0, 0.0, 1.0],
        ],
        det_sigma: beta * rbya,
    })
}

/// Weight multiplying `A^2` in the quadratic variation of the basket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TanakaWeight {
    /// `sigma_x^2 e^{2x} + sigma_y^2 e^{2y}`, the default weight without the cross term.
    #[default]
    Diagonal,
    /// `sigma_x^2 e^{2x} + 2 rho_xy sigma_x sigma_y e^{x+y} + sigma_y^2 e^{2y}`,
    /// the full quadratic variation of the basket. Removes an `O(rho_xy)`
    /// bias against the oracle.
    Full,
}

/// One global minimiser of the distance to the strike surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrMinimizer {
    pub x: f64,
    pub y: f64,
    pub a_star: f64,
    /// Distance `d` at the minimiser (equal for all global minimisers).
    pub distance: f64,
    pub psi2: f64,
    pub phi_aa: f64,
    /// `exp(A_hat)` at the minimiser.
    pub chi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrSaddle {
    pub strike: f64,
    pub minimizers: Vec<CorrMinimizer>,
    /// Minimal distance `Lambda`.
    pub lambda: f64,
    /// Rate `Lambda^2 / (2 alpha^2)`.
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpliedVolExpansion {
    pub sigma0: f64,
    pub a: f64,
    pub sigma: f64,
}

type V3 = [f64; 3];

fn dot(u: &V3, v: &V3) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn norm(u: &V3) -> f64 {
    dot(u, u).sqrt()
}

fn cross_norm2(u: &V3, v: &V3) -> f64 {
    let c = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    dot(&c, &c)
}

/// The correlated model with its precomputed geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrModel {
    pub params: CorrParams,
    pub geometry: CorrGeometry,
    pub weight: TanakaWeight,
    /// `Sigma^{-1} e_3`
    c: V3,
    c_norm: f64,
    /// Images of the scaled unit steps in `x` and `y`.
    mx: V3,
    my: V3,
    c1: f64,
    c2: f64,
}

impl CorrModel {
    pub fn new(params: CorrParams) -> Result<Self> {
        let g = corr_geometry(&params)?;
        let si = g.sigma_inv;
        let (al, sx, sy) = (params.alpha, params.sigma_x, params.sigma_y);
        let c = [si[0][2], si[1][2], 1.0];
        let r2 = g.rho_bar_ya * g.rho_bar_ya;
        Ok(CorrModel {
            params,
            geometry: g,
            weight: TanakaWeight::default(),
            c,
            c_norm: norm(&c),
            mx: [si[0][0] * al / sx, 0.0, 0.0],
            my: [si[0][1] * al / sy, si[1][1] * al / sy, 0.0],
            c1: -0.5 * (sx / (g.beta * al) - g.gamma * sy / (r2 * g.beta * al)),
            c2: -sy / (2.0 * al * g.rho_bar_ya),
        })
    }

    pub fn with_weight(mut self, weight: TanakaWeight) -> Self {
        self.weight = weight;
        self
    }

    /// `Sigma^{-1} (alpha x / sigma_x, alpha y / sigma_y, a)`.
    pub fn transform(&self, x: f64, y: f64, a: f64) -> V3 {
        [
            x * self.mx[0] + y * self.my[0] + a * self.c[0],
            x * self.mx[1] + y * self.my[1] + a * self.c[1],
            a,
        ]
    }

    /// Hyperbolic distance between the images of `(0, 0, a0)` and `(x, y, a)`.
    pub fn d(&self, x: f64, y: f64, a: f64) -> f64 {
        let da = a - self.params.a0;
        let h0 = x * self.mx[0] + y * self.my[0] + da * self.c[0];
        let h1 = x * self.mx[1] + y * self.my[1] + da * self.c[1];
        distance_from_parts(h0 * h0 + h1 * h1, a, self.params.a0)
    }

    /// `Sigma^{-1} (alpha x / sigma_x, alpha y / sigma_y, -a0)`.
    fn w(&self, x: f64, y: f64) -> V3 {
        let a0 = self.params.a0;
        [
            x * self.mx[0] + y * self.my[0] - a0 * self.c[0],
            x * self.mx[1] + y * self.my[1] - a0 * self.c[1],
            -a0,
        ]
    }

    /// Height minimising `d(x, y, .)`, in closed form.
    pub fn a_star(&self, x: f64, y: f64) -> f64 {
        let g = &self.geometry;
        let r2 = g.rho_bar_ya * g.rho_bar_ya;
        norm(&self.w(x, y)) * r2 * g.beta / (g.xi * g.xi + g.beta * g.beta * r2).sqrt()
    }

    /// `cosh(Hbar) - 1` where `Hbar(x, y) = min_a d(x, y, a)`.
    pub fn cosh_hbar_m1(&self, x: f64, y: f64) -> f64 {
        let w = self.w(x, y);
        let nw = norm(&w);
        let cw = dot(&self.c, &w);
        let s = if cw < 0.0 {
            // |c||w| + c.w = |c x w|^2 / (|c||w| - c.w), free of cancellation
            cross_norm2(&self.c, &w) / (self.c_norm * nw - cw)
        } else {
            self.c_norm * nw + cw
        };
        s / self.params.a0
    }

    pub fn hbar(&self, x: f64, y: f64) -> f64 {
        acosh1p(self.cosh_hbar_m1(x, y))
    }

    /// Gradient and Hessian of `cosh(Hbar)` in `(x, y)`.
    fn cosh_hbar_derivs(&self, x: f64, y: f64) -> ((f64, f64), (f64, f64, f64)) {
        let a0 = self.params.a0;
        let w = self.w(x, y);
        let nw = norm(&w);
        let (mwx, mwy) = (dot(&self.mx, &w), dot(&self.my, &w));
        let (mcx, mcy) = (dot(&self.mx, &self.c), dot(&self.my, &self.c));
        let s = self.c_norm / nw;
        let grad = ((s * mwx + mcx) / a0, (s * mwy + mcy) / a0);
        let inv2 = 1.0 / (nw * nw);
        let k = s / a0;
        let hess = (
            k * (dot(&self.mx, &self.mx) - mwx * mwx * inv2),
            k * (dot(&self.mx, &self.my) - mwx * mwy * inv2),
            k * (dot(&self.my, &self.my) - mwy * mwy * inv2),
        );
        (grad, hess)
    }

    /// `Psi(x) = Hbar(x, log(K - e^x))^2 / (2 alpha^2)`.
    pub fn psi(&self, x: f64, k: f64) -> f64 {
        let h = self.hbar(x, strike_curve_y(x, k));
        h * h / (2.0 * self.params.alpha * self.params.alpha)
    }

    /// Exact second derivative of [`CorrModel::psi`].
    pub fn psi_d2(&self, x: f64, k: f64) -> f64 {
        let y = strike_curve_y(x, k);
        let (grad, hess) = self.cosh_hbar_derivs(x, y);
        let (g1, g2) = along_strike_curve(x, k, grad, hess);
        let (h1, h2) = half_acosh_sq_derivs(self.hbar(x, y));
        (h2 * g1 * g1 + h1 * g2) / (self.params.alpha * self.params.alpha)
    }

    /// Second derivative in `a` of `d^2 / 2` at `a_star`.
    pub fn phi_aa(&self, x: f64, y: f64) -> f64 {
        let h = self.hbar(x, y);
        let cn2 = self.c_norm * self.c_norm;
        crate::special::x_over_sinh(h) * cn2 / (self.params.a0 * self.a_star(x, y))
    }

    /// Drift functional on transformed displacements.
    pub fn a_hat(&self, dx_hat: f64, dy_hat: f64, a: f64) -> f64 {
        self.c1 * dx_hat + self.c2 * dy_hat + 0.5 * (a / self.params.a0).ln()
    }

    fn a_hat_at(&self, x: f64, y: f64, a: f64) -> f64 {
        let da = a - self.params.a0;
        let h0 = x * self.mx[0] + y * self.my[0] + da * self.c[0];
        let h1 = x * self.mx[1] + y * self.my[1] + da * self.c[1];
        self.a_hat(h0, h1, a)
    }

    /// Log of the leading-order density of `(X, Y, A)` at time `t`.
    pub fn ln_p_hat1(&self, x: f64, y: f64, a: f64, t: f64) -> f64 {
        let p = &self.params;
        let d = self.d(x, y, a);
        let al2 = p.alpha * p.alpha;
        -3.0 * a.ln() + self.a_hat_at(x, y, a) - 1.5 * (2.0 * PI * al2 * t).ln() + ln_x_over_sinh(d)
            - d * d / (2.0 * al2 * t)
            + (al2 / (p.sigma_x * p.sigma_y * self.geometry.det_sigma)).ln()
    }

    pub fn p_hat1(&self, x: f64, y: f64, a: f64, t: f64) -> Result<f64> {
        require_finite("x", x)?;
        require_finite("y", y)?;
        require_positive("a", a)?;
        require_positive("t", t)?;
        Ok(self.ln_p_hat1(x, y, a, t).exp())
    }

    fn check_strike(&self, k: f64) -> Result<()> {
        require_finite("K", k)?;
        if k <= 2.0 {
            return Err(Error::Domain {
                what: "K",
                value: k,
                domain: "K > 2, out of the money",
            });
        }
        Ok(())
    }

    /// Newton polish of a minimiser of `cosh(Hbar)` along the strike curve.
    fn polish(&self, mut x: f64, k: f64, lo: f64, hi: f64) -> f64 {
        let f = |x: f64| self.cosh_hbar_m1(x, strike_curve_y(x, k));
        for _ in 0..30 {
            let y = strike_curve_y(x, k);
            let (grad, hess) = self.cosh_hbar_derivs(x, y);
            let (g1, g2) = along_strike_curve(x, k, grad, hess);
            if !(g2 > 0.0) {
                break;
            }
            let step = g1 / g2;
            let xn = x - step;
            if !(xn > lo && xn < hi) || f(xn) > f(x) * (1.0 + 1e-14) {
                break;
            }
            x = xn;
            if step.abs() < 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        x
    }

    /// Global minimisers of the distance along `e^x + e^y = K`.
    pub fn find_saddles(&self, k: f64) -> Result<CorrSaddle> {
        self.check_strike(k)?;
        let (lo, hi) = (k.ln() - 15.0, k.ln() - 1e-6);
        let f = |x: f64| self.cosh_hbar_m1(x, strike_curve_y(x, k));
        let opts = MultiStart {
            starts: 400,
            cluster_radius: 1e-6,
            value_tol: 1e-9,
        };
        let mins = global_minima(&f, lo, hi, &opts);
        if mins.is_empty() {
            return Err(Error::NoInteriorMinimum { lo, hi });
        }
        let mut out = Vec::with_capacity(mins.len());
        for (x0, _) in mins {
            let x = self.polish(x0, k, lo, hi);
            let y = strike_curve_y(x, k);
            let psi2 = self.psi_d2(x, k);
            let scale = 1.0 / (self.params.alpha * self.params.alpha);
            if !(psi2 > 1e-10 * scale) {
                return Err(Error::DegenerateSaddle { x, second_derivative: psi2 });
            }
            let a_star = self.a_star(x, y);
            out.push(CorrMinimizer {
                x,
                y,
                a_star,
                distance: self.hbar(x, y),
                psi2,
                phi_aa: self.phi_aa(x, y),
                chi: self.a_hat_at(x, y, a_star).exp(),
            });
        }
        let lambda = out.iter().map(|m| m.distance).fold(f64::INFINITY, f64::min);
        Ok(CorrSaddle {
            strike: k,
            minimizers: out,
            lambda,
            rate: lambda * lambda / (2.0 * self.params.alpha * self.params.alpha),
        })
    }

    fn weight_at(&self, x: f64, y: f64) -> f64 {
        let p = &self.params;
        let diag = p.sigma_x * p.sigma_x * (2.0 * x).exp() + p.sigma_y * p.sigma_y * (2.0 * y).exp();
        match self.weight {
            TanakaWeight::Diagonal => diag,
            TanakaWeight::Full => diag + 2.0 * p.rho_xy * p.sigma_x * p.sigma_y * (x + y).exp(),
        }
    }

    /// Log of `C` in `E[sigma_S^2 delta(S - K)] ~ C u^{-1/2} exp(-rate/u)`.
    fn ln_time_density_constant(&self, s: &CorrSaddle) -> f64 {
        let p = &self.params;
        let lam = s.lambda;
        let sum: f64 = s
            .minimizers
            .iter()
            .map(|m| {
                self.weight_at(m.x, m.y) * (-m.y).exp() * m.chi
                    / (m.a_star * (m.phi_aa * m.psi2).sqrt())
            })
            .sum();
        sum.ln() + ln_x_over_sinh(lam)
            - 0.5 * (2.0 * PI).ln()
            - (p.sigma_x * p.sigma_y * self.geometry.det_sigma).ln()
    }

    /// `psi(k)` in the leading-order price `psi t^{3/2} exp(-rate / t)`.
    pub fn psi_prefactor(&self, k: f64) -> Result<f64> {
        let s = self.find_saddles(k)?;
        let al = self.params.alpha;
        Ok((self.ln_time_density_constant(&s) + 2.0 * (al / s.lambda).ln()).exp())
    }

    /// Small-time price of the basket call `E[(e^X + e^Y - K)^+]`.
    pub fn price(&self, k: f64, t: f64, mode: Mode) -> Result<PriceResult> {
        require_positive("t", t)?;
        let s = self.find_saddles(k)?;
        self.price_from_saddle(&s, t, mode)
    }

    pub fn price_from_saddle(&self, s: &CorrSaddle, t: f64, mode: Mode) -> Result<PriceResult> {
        let al = self.params.alpha;
        let ln_c = self.ln_time_density_constant(s);
        let ln_p = match mode {
            Mode::Asymptotic => ln_c + 2.0 * (al / s.lambda).ln() + 1.5 * t.ln() - s.rate / t,
            Mode::UpsilonExact => ln_c - 2f64.ln() + ln_upsilon_exact(s.lambda / al, t)?,
        };
        Ok(PriceResult::from_ln(mode.into(), ln_p))
    }

    /// Leading-order density of the basket `e^X + e^Y` at `K`.
    pub fn density(&self, k: f64, t: f64) -> Result<f64> {
        require_positive("t", t)?;
        let s = self.find_saddles(k)?;
        let p = &self.params;
        let sum: f64 = s
            .minimizers
            .iter()
            .map(|m| (-m.y).exp() * m.chi / (m.a_star.powi(3) * (m.phi_aa * m.psi2).sqrt()))
            .sum();
        let ln_f = sum.ln() + ln_x_over_sinh(s.lambda)
            - 0.5 * (2.0 * PI * t).ln()
            - (p.sigma_x * p.sigma_y * self.geometry.det_sigma).ln()
            - s.rate / t;
        Ok(ln_f.exp())
    }

    /// Small-time implied volatility `sqrt(sigma0^2 + a t)` of the basket
    /// call, quoted on the half-basket `(e^X + e^Y)/2` with spot 1.
    pub fn implied_vol_expansion(&self, k: f64, t: f64) -> Result<ImpliedVolExpansion> {
        require_positive("t", t)?;
        let s = self.find_saddles(k)?;
        let x1 = (k / 2.0).ln();
        let sigma0 = x1.abs() / (2.0 * s.rate).sqrt();
        let psi_bar = (2.0 * PI).sqrt() * self.psi_prefactor(k)?;
        let a_bs = sigma0.powi(3) * (x1 / 2.0).exp() / (x1 * x1);
        let a = 2.0 * sigma0.powi(4) / (x1 * x1) * (0.5 * psi_bar / a_bs).ln();
        let v = sigma0 * sigma0 + a * t;
        if !(v > 0.0) {
            return Err(Error::Domain {
                what: "t",
                value: t,
                domain: "sigma0^2 + a t > 0",
            });
        }
        Ok(ImpliedVolExpansion { sigma0, a, sigma: v.sqrt() })
    }
}
