//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. The
//! process fails when the set of failing criteria differs from
//! `KNOWN_FAILURES`, whose entries are analysed in the decisions ledger.

mod common;

use std::f64::consts::{E, PI};
use std::time::Instant;

use basket_sabr::hyperbolic::heat_kernel_h3;
use basket_sabr::oracle::{bs_implied_vol_from_ln, numint_price};
use basket_sabr::quad::integrate_scalar;
use basket_sabr::sabr_uncorrelated::{self as unc, phi_rate, price_uncorr, price_uncorr_degenerate};
use basket_sabr::saddle_core::{
    classify_minimizers, hbar, upsilon_asymptotic, upsilon_exact, upsilon_quartic_asymptotic,
    upsilon_quartic_exact, DEGENERATE_TOL,
};
use basket_sabr::{CorrModel, CorrParams, HPoint, Mode, QuadratureSpec, UncorrParams};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_FAILURES: &[u32] = &[2];

type Outcome = (bool, String);
type Criterion = (u32, &'static str, fn() -> Outcome);

fn spec(rel_tol: f64) -> QuadratureSpec {
    QuadratureSpec { rel_tol, ..QuadratureSpec::default() }
}

fn half_basket_iv(ln_p: f64, k: f64, t: f64) -> f64 {
    bs_implied_vol_from_ln(ln_p - 2f64.ln(), 1.0, k / 2.0, t).unwrap_or(f64::NAN)
}

fn table1_ratios() -> Outcome {
    let reference = [1.008826, 1.009752, 1.006666, 1.002281, 1.002183, 1.011362];
    let m = CorrModel::new(table1()).unwrap();
    let t = 0.003;
    let mut ok = true;
    let mut got = Vec::new();
    for (i, k) in [2.3, 2.5, 2.7, 2.9, 3.1, 3.3].into_iter().enumerate() {
        let n = numint_price(&m, k, t, &spec(1e-7)).unwrap();
        let s = m.price(k, t, Mode::UpsilonExact).unwrap();
        let r = (n.ln_value - s.ln_value).exp();
        ok &= (1.0..=1.015).contains(&r) && (r - reference[i]).abs() <= 0.01;
        got.push(format!("{k}:{r:.6}"));
    }
    (ok, format!("numint/saddleUpsilon {}", got.join(" ")))
}

fn table2_ratios() -> Outcome {
    let reference_iv = [0.23862, 0.23308, 0.23122, 0.23076, 0.23094, 0.23145, 0.23216, 0.23300];
    let m = CorrModel::new(table2()).unwrap();
    let t = 0.02;
    let mut ok = true;
    let (mut got, mut ivs) = (Vec::new(), Vec::new());
    for (i, k) in [2.05, 2.1, 2.15, 2.2, 2.25, 2.3, 2.35, 2.4].into_iter().enumerate() {
        let n = numint_price(&m, k, t, &spec(1e-7)).unwrap();
        let s = m.price(k, t, Mode::UpsilonExact).unwrap();
        let r = (s.ln_value - n.ln_value).exp();
        ok &= (1.005..=1.015).contains(&r);
        got.push(format!("{k}:{r:.6}"));
        ivs.push(format!("{:+.4}", half_basket_iv(n.ln_value, k, t) - reference_iv[i]));
    }
    (
        ok,
        format!("saddleUpsilon/numint {}; iv_numint minus reference (diagnostic) {}", got.join(" "), ivs.join(" ")),
    )
}

fn rate_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    for a0 in [0.5, 1.0, 2.0] {
        let p = UncorrParams::new(a0).unwrap();
        for i in 1..=200 {
            let k = 2.01 + (2.0 * E - 2.01) * i as f64 / 201.0;
            let closed = phi_rate(k, &p).unwrap().phi;
            let f = |x: f64| unc::psi(x, k, a0);
            let m = grid_minima(f, k.ln() - 12.0, k.ln() - 1e-9, 4000);
            let numeric = m.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
            worst = worst.max((closed - numeric).abs());
        }
    }
    (worst <= 1e-10, format!("max |phi - min Psi| = {worst:.2e} over 600 strikes"))
}

fn classification_oracle() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let k = 0.5 + 19.5 * (i as f64 + 0.5) / 50.0;
        let c = classify_minimizers(k, DEGENERATE_TOL).unwrap();
        let n = (1.0 / 1e-5) as usize;
        let brute = grid_minima(|z| hbar(z, k), 0.0, k, n);
        let best = brute.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
        let global: Vec<f64> = brute.iter().filter(|m| m.1 <= best + 1e-12).map(|m| m.0).collect();
        if global.len() != c.locations.len() {
            ok = false;
            println!("  K = {k}: brute force {global:?}, classified {:?}", c.locations);
        }
        for (a, b) in global.iter().zip(&c.locations) {
            worst = worst.max(rel(*a, *b));
        }
    }
    // convexity of hbar_K at the centre changes sign at the transition strike
    let centre = |k: f64| fd2_rich(|z| hbar(z, k), k / 2.0, 2e-2);
    let k_star = bisect(centre, 5.0, 6.0);
    let gap = (k_star - 2.0 * E).abs();
    ok &= worst <= 1e-6 && gap <= 1e-8;
    (ok, format!("50 strikes, max location error {worst:.2e}, transition at 2e{:+.1e}", k_star - 2.0 * E))
}

fn a_star_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let m = CorrModel::new(random_params(&mut rng)).unwrap();
        let (x, y) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let f = |s: f64| m.d(x, y, s.exp());
        let (s0, _) = golden(f, -12.0, 12.0);
        // polish on the stationarity condition of d in log a
        let g = |s: f64| fd1(f, s, 1e-3);
        let s = bisect(g, s0 - 1e-2, s0 + 1e-2);
        worst = worst.max(rel(s.exp(), m.a_star(x, y)));
    }
    (worst <= 1e-8, format!("500 draws, max relative gap {worst:.2e}"))
}

fn derivative_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut w_phi, mut w_unc, mut w_psi): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..200 {
        let p = random_params(&mut rng);
        let m = CorrModel::new(p).unwrap();
        let (x, y) = (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let a = m.a_star(x, y);
        let half_sq = |a: f64| 0.5 * m.d(x, y, a).powi(2);
        w_phi = w_phi.max(rel(fd2_best(half_sq, a, 0.2 * a), m.phi_aa(x, y)));

        let a0 = p.a0;
        let start = HPoint::new(0.0, 0.0, a0).unwrap();
        let au = unc::a_star(x, y, a0);
        let half_sq_u = |a: f64| {
            let q = HPoint::new(x, y, a).unwrap();
            0.5 * basket_sabr::hyperbolic::geodesic_distance(&start, &q).powi(2)
        };
        w_unc = w_unc.max(rel(fd2_best(half_sq_u, au, 0.2 * au), unc::phi_aa(x, y, a0)));

        let k: f64 = rng.gen_range(2.05..10.0);
        let gap = rng.gen_range(0.05..3.0);
        let xs = k.ln() - gap;
        w_psi = w_psi.max(rel(fd2_best(|x| m.psi(x, k), xs, 0.2 * gap), m.psi_d2(xs, k)));
    }
    let ok = w_phi <= 1e-6 && w_unc <= 1e-6 && w_psi <= 1e-6;
    (ok, format!("max relative gap: Phi_aa corr {w_phi:.2e}, Phi_aa uncorr {w_unc:.2e}, Psi'' {w_psi:.2e}"))
}

fn degenerate_scaling() -> Outcome {
    let a0 = 1.0;
    let p = UncorrParams::new(a0).unwrap();
    let m = CorrModel::new(CorrParams::uncorrelated(1.0, a0)).unwrap();
    let k = 2.0 * E;
    let hb = (2f64.sqrt() / a0).asinh();
    let ts: [f64; 4] = [1e-3, 2e-3, 4e-3, 8e-3];
    let lt: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let scaled = |ln_p: f64, t: f64| ln_p + hb * hb / (2.0 * t);
    let formula: Vec<f64> = ts
        .iter()
        .map(|&t| scaled(price_uncorr_degenerate(t, &p, Mode::UpsilonExact).unwrap().ln_value, t))
        .collect();
    let oracle: Vec<f64> =
        ts.iter().map(|&t| scaled(numint_price(&m, k, t, &spec(1e-7)).unwrap().ln_value, t)).collect();
    let (sf, so) = (slope(&lt, &formula), slope(&lt, &oracle));
    let ok = (sf - 1.25).abs() <= 0.05 && (so - 1.25).abs() <= 0.05;
    (ok, format!("slope: upsilon-exact formula {sf:.4}, quadrature oracle {so:.4}"))
}

fn heat_kernel_mass() -> Outcome {
    let mut ok = true;
    let mut got = Vec::new();
    for t in [0.25f64, 0.5, 1.0] {
        // half-space volume a^{-3} dx dy da in polar (r, s = log a) around
        // (0, 0, 1); at fixed s, r dr = a sinh(rho) drho
        let rmax = 40.0 * t.sqrt() + 2.0;
        let inner = |s: f64| {
            let lo = s.abs();
            let v = integrate_scalar(|r| heat_kernel_h3(r, t).unwrap() * r.sinh(), lo, lo + rmax, 1e-12, 0.0, 2000);
            2.0 * PI * (-s).exp() * v.value
        };
        let mass = integrate_scalar(inner, -rmax, rmax, 1e-11, 0.0, 2000).value;
        ok &= (mass - 1.0).abs() <= 1e-4;
        got.push(format!("t={t}: {mass:.10}"));
    }
    (ok, got.join(", "))
}

fn zero_correlation() -> Outcome {
    let strikes = [2.2, 2.6, 3.0, 3.5, 4.0, 4.5, 5.0, 6.0, 8.0, 12.0];
    let a0 = 1.0;
    let up = UncorrParams::new(a0).unwrap();
    let unit = CorrModel::new(CorrParams::uncorrelated(1.0, a0)).unwrap();
    let al = SQRT_TENTH;
    let scaled = CorrModel::new(CorrParams::uncorrelated(al, a0)).unwrap();
    let (mut w_sad, mut w_price): (f64, f64) = (0.0, 0.0);
    let mut ok = true;
    for k in strikes {
        let u = phi_rate(k, &up).unwrap();
        let c = unit.find_saddles(k).unwrap();
        ok &= c.minimizers.len() == u.n_minima;
        let m = &c.minimizers[0];
        for (a, b) in [
            (m.x, u.x_star),
            (m.y, u.y_star),
            (m.a_star, u.a_star),
            (c.lambda, u.hbar),
            (c.rate, u.phi),
            (m.phi_aa, u.phi_aa),
            (m.psi2, u.psi2),
        ] {
            w_sad = w_sad.max((a - b).abs() / b.abs().max(1.0));
        }
        for t in [0.003, 0.02] {
            for mode in [Mode::Asymptotic, Mode::UpsilonExact] {
                let pc = scaled.price(k, t, mode).unwrap();
                let pu = price_uncorr(k, al * al * t, &up, mode).unwrap();
                w_price = w_price.max((pc.ln_value - pu.ln_value).abs());
            }
        }
    }
    ok &= w_sad <= 1e-10 && w_price <= QuadratureSpec::default().rel_tol;
    (ok, format!("10 strikes, saddle quantities {w_sad:.2e}, log-price gap {w_price:.2e}"))
}

fn upsilon_family() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in [0.5, 1.0, 2.0] {
        for t in [0.01, 0.1, 1.0] {
            let q = |p: f64| {
                integrate_scalar(|u| u.powf(-p) * (-k * k / (2.0 * u)).exp(), 0.0, t, 1e-13, 0.0, 5000).value
            };
            worst = worst.max(rel(upsilon_exact(k, t).unwrap(), q(0.5)));
            worst = worst.max(rel(upsilon_quartic_exact(k, t).unwrap(), q(0.75)));
        }
    }
    // relative error of the asymptotic forms should halve with t
    let k = 1.0;
    let err = |t: f64| {
        (
            rel(upsilon_asymptotic(k, t), upsilon_exact(k, t).unwrap()),
            rel(upsilon_quartic_asymptotic(k, t), upsilon_quartic_exact(k, t).unwrap()),
        )
    };
    let mut ratios = Vec::new();
    let mut ok = worst <= 1e-8;
    for t in [0.02, 0.01, 0.005] {
        let (a, b) = (err(t), err(t / 2.0));
        let r = (b.0 / a.0, b.1 / a.1);
        ok &= (0.45..=0.55).contains(&r.0) && (0.45..=0.55).contains(&r.1);
        ok &= a.0 / (t / (k * k)) < 10.0 && a.1 / (t / (k * k)) < 10.0;
        ratios.push(format!("{:.3}/{:.3}", r.0, r.1));
    }
    (ok, format!("quadrature gap {worst:.2e}; asymptotic error ratios {}", ratios.join(" ")))
}

fn implied_vol_order() -> Outcome {
    let m = CorrModel::new(table2()).unwrap();
    let k = 2.2;
    let defect = |t: f64| {
        let n = numint_price(&m, k, t, &spec(1e-8)).unwrap();
        let iv = half_basket_iv(n.ln_value, k, t);
        let e = m.implied_vol_expansion(k, t).unwrap();
        (iv * iv - (e.sigma0 * e.sigma0 + e.a * t)).abs()
    };
    let d: Vec<f64> = [0.02, 0.01, 0.005, 0.0025].into_iter().map(defect).collect();
    let r: Vec<f64> = d.windows(2).map(|w| w[1] / w[0]).collect();
    let ok = r.iter().all(|r| *r < 0.7);
    (ok, format!("defect ratios {:.3} {:.3} {:.3}", r[0], r[1], r[2]))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "table1 ratio reproduction", table1_ratios),
        (2, "table2 ratio reproduction", table2_ratios),
        (3, "closed-form vs numeric rate", rate_closed_form),
        (4, "minimiser classification vs brute force", classification_oracle),
        (5, "correlated a* closed form", a_star_closed_form),
        (6, "derivative checks", derivative_checks),
        (7, "degenerate-strike t^(5/4) scaling", degenerate_scaling),
        (8, "heat-kernel normalisation", heat_kernel_mass),
        (9, "zero-correlation reduction", zero_correlation),
        (10, "upsilon family", upsilon_family),
        (11, "implied-vol expansion order", implied_vol_order),
    ];
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let (pass, detail) = run();
        let secs = start.elapsed().as_secs_f64();
        println!("{} [{id:>2}] {name}: {detail} ({secs:.1}s)", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(id);
        }
    }
    if failed != KNOWN_FAILURES {
        println!("acceptance: failing set {failed:?} differs from known failures {KNOWN_FAILURES:?}");
        std::process::exit(1);
    }
    println!("acceptance: {} passed, known failures {KNOWN_FAILURES:?}", 11 - failed.len());
}
