use std::f64::consts::E;

use basket_sabr::oracle::{bs_implied_vol_from_ln, numint_density, numint_price};
use basket_sabr::sabr_uncorrelated::{density_sum_uncorr, phi_rate, price_uncorr};
use basket_sabr::saddle_core::{classify_minimizers, DEGENERATE_TOL};
use basket_sabr::{CorrModel, CorrParams, Mode, PriceResult, Result, UncorrParams};
use rayon::prelude::*;

use crate::config::{ModelConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::table::{Cell, Row, Table};

pub const PRICE_HEADER: [&str; 10] = [
    "K",
    "t",
    "p_numint",
    "p_saddle",
    "p_saddle_upsilon",
    "ratio_numint_saddle",
    "ratio_numint_saddle_upsilon",
    "iv_numint",
    "iv_saddle",
    "iv_leading",
];
pub const SMILE_HEADER: [&str; 6] = ["K", "t", "iv_numint", "iv_saddle", "sigma0", "iv_expansion"];
pub const RATE_HEADER: [&str; 5] = ["K", "k", "rate", "lambda", "n_minima"];
pub const CLASSIFY_HEADER: [&str; 6] = ["K", "kind", "n_minima", "z1", "z2", "hbar_min"];
pub const DENSITY_HEADER: [&str; 5] = ["K", "t", "f_numint", "f_saddle", "ratio_numint_saddle"];

/// Saddle formulas of the configured model plus the correlated model used by
/// the oracle and the implied-vol expansion.
struct Engine {
    uncorr: Option<UncorrParams>,
    model: CorrModel,
}

impl Engine {
    fn new(cfg: &RunConfig) -> CliResult<Self> {
        let (uncorr, params) = match cfg.model {
            ModelConfig::Correlated(p) => (None, p),
            // unit volatilities reproduce the uncorrelated model
            ModelConfig::Uncorrelated(u) => (Some(u), CorrParams::uncorrelated(1.0, u.a0)),
        };
        let model = CorrModel::new(params)
            .map_err(|e| CliError::config("model", e.to_string()))?
            .with_weight(cfg.weight);
        Ok(Engine { uncorr, model })
    }

    fn saddle_price(&self, k: f64, t: f64, mode: Mode) -> Result<PriceResult> {
        match self.uncorr {
            Some(u) => price_uncorr(k, t, &u, mode),
            None => self.model.price(k, t, mode),
        }
    }

    fn saddle_density(&self, k: f64, t: f64) -> Result<f64> {
        match self.uncorr {
            Some(u) if k < 2.0 * E => density_sum_uncorr(k, t, &u),
            _ => self.model.density(k, t),
        }
    }

    /// Rate and minimal distance at `K`, with the number of global minimisers.
    fn rate(&self, k: f64) -> Result<(f64, f64, usize)> {
        match self.uncorr {
            Some(u) => phi_rate(k, &u).map(|s| (s.phi, s.hbar, s.n_minima)),
            None => self.model.find_saddles(k).map(|s| (s.rate, s.lambda, s.minimizers.len())),
        }
    }
}

/// Implied vol of a basket price, quoted on the half-basket with spot 1.
pub fn basket_implied_vol(ln_price: f64, k: f64, t: f64) -> Result<f64> {
    bs_implied_vol_from_ln(ln_price - 2f64.ln(), 1.0, k / 2.0, t)
}

fn threads() -> usize {
    std::env::var("BASKET_SABR_THREADS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0)
}

/// Map `f` over `items` in parallel, keeping input order.
fn par_rows<T: Sync, F: Fn(&T) -> Row + Sync + Send>(items: &[T], f: F) -> Vec<Row> {
    match rayon::ThreadPoolBuilder::new().num_threads(threads()).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

fn keep<T>(row: &mut Row, name: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            row.errors.push(format!("{name}: {e}"));
            None
        }
    }
}

fn price_row(eng: &Engine, cfg: &RunConfig, k: f64, t: f64) -> Row {
    let mut row = Row::default();
    let m = cfg.mode;
    let numint = m.oracle().then(|| keep(&mut row, "p_numint", numint_price(&eng.model, k, t, &cfg.quadrature))).flatten();
    let asym = m.asymptotic().then(|| keep(&mut row, "p_saddle", eng.saddle_price(k, t, Mode::Asymptotic))).flatten();
    let ups = m.upsilon().then(|| keep(&mut row, "p_saddle_upsilon", eng.saddle_price(k, t, Mode::UpsilonExact))).flatten();
    let ratio = |a: &Option<PriceResult>, b: &Option<PriceResult>| match (a, b) {
        (Some(a), Some(b)) => Some((a.ln_value - b.ln_value).exp()),
        _ => None,
    };
    let iv = |row: &mut Row, name: &str, p: &Option<PriceResult>| {
        p.as_ref().and_then(|p| keep(row, name, basket_implied_vol(p.ln_value, k, t)))
    };
    let iv_numint = iv(&mut row, "iv_numint", &numint);
    let iv_saddle = iv(&mut row, "iv_saddle", if ups.is_some() { &ups } else { &asym });
    let iv_leading = (m.asymptotic() || m.upsilon())
        .then(|| keep(&mut row, "iv_leading", eng.model.implied_vol_expansion(k, t)).map(|e| e.sigma))
        .flatten();
    for p in [&numint, &asym, &ups].into_iter().flatten() {
        row.warnings.extend(p.warnings.iter().cloned());
    }
    row.cells = vec![
        Cell::Num(Some(k)),
        Cell::Num(Some(t)),
        Cell::Num(numint.as_ref().map(|p| p.value)),
        Cell::Num(asym.as_ref().map(|p| p.value)),
        Cell::Num(ups.as_ref().map(|p| p.value)),
        Cell::Num(ratio(&numint, &asym)),
        Cell::Num(ratio(&numint, &ups)),
        Cell::Num(iv_numint),
        Cell::Num(iv_saddle),
        Cell::Num(iv_leading),
    ];
    row
}

/// One row per `(K, t)` with every requested method and the ratios of the
/// oracle to each saddle price.
pub fn cmd_price(cfg: &RunConfig) -> CliResult<Table> {
    let eng = Engine::new(cfg)?;
    let rows = par_rows(&cfg.grid(), |&(k, t)| price_row(&eng, cfg, k, t));
    Ok(Table { header: PRICE_HEADER.to_vec(), rows })
}

/// Implied-vol smile: oracle, saddle, `sigma0` and `sqrt(sigma0^2 + a t)`.
pub fn cmd_smile(cfg: &RunConfig) -> CliResult<Table> {
    let eng = Engine::new(cfg)?;
    let rows = par_rows(&cfg.grid(), |&(k, t)| {
        let mut row = Row::default();
        let iv_numint = cfg
            .mode
            .oracle()
            .then(|| {
                keep(&mut row, "iv_numint", numint_price(&eng.model, k, t, &cfg.quadrature))
                    .and_then(|p| keep(&mut row, "iv_numint", basket_implied_vol(p.ln_value, k, t)))
            })
            .flatten();
        let mode = if cfg.mode == crate::config::ModeSel::Asymptotic { Mode::Asymptotic } else { Mode::UpsilonExact };
        let iv_saddle = keep(&mut row, "iv_saddle", eng.saddle_price(k, t, mode))
            .and_then(|p| keep(&mut row, "iv_saddle", basket_implied_vol(p.ln_value, k, t)));
        let exp = keep(&mut row, "iv_expansion", eng.model.implied_vol_expansion(k, t));
        row.cells = vec![
            Cell::Num(Some(k)),
            Cell::Num(Some(t)),
            Cell::Num(iv_numint),
            Cell::Num(iv_saddle),
            Cell::Num(exp.map(|e| e.sigma0)),
            Cell::Num(exp.map(|e| e.sigma)),
        ];
        row
    });
    Ok(Table { header: SMILE_HEADER.to_vec(), rows })
}

/// Rate-function curve over the strikes; maturities are ignored.
pub fn cmd_rate(cfg: &RunConfig) -> CliResult<Table> {
    let eng = Engine::new(cfg)?;
    let rows = par_rows(&cfg.strikes, |&k| {
        let mut row = Row::default();
        let r = keep(&mut row, "rate", eng.rate(k));
        row.cells = vec![
            Cell::Num(Some(k)),
            Cell::Num(Some(k.ln())),
            Cell::Num(r.map(|r| r.0)),
            Cell::Num(r.map(|r| r.1)),
            Cell::Int(r.map_or(0, |r| r.2)),
        ];
        row
    });
    Ok(Table { header: RATE_HEADER.to_vec(), rows })
}

/// Minimiser classification of `hbar_K` for each strike.
pub fn cmd_classify(strikes: &[f64]) -> Table {
    let rows = par_rows(strikes, |&k| {
        let mut row = Row::default();
        let c = keep(&mut row, "classify", classify_minimizers(k, DEGENERATE_TOL));
        let kind = c.as_ref().map_or(String::new(), |c| {
            serde_json::to_value(c.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
        });
        let loc = |i: usize| c.as_ref().and_then(|c| c.locations.get(i).copied());
        row.cells = vec![
            Cell::Num(Some(k)),
            Cell::Text(kind),
            Cell::Int(c.as_ref().map_or(0, |c| c.locations.len())),
            Cell::Num(loc(0)),
            Cell::Num(loc(1)),
            Cell::Num(c.as_ref().map(|c| c.min_value)),
        ];
        row
    });
    Table { header: CLASSIFY_HEADER.to_vec(), rows }
}

/// Density of the basket at `K`: oracle against the saddle formula.
pub fn cmd_density(cfg: &RunConfig) -> CliResult<Table> {
    let eng = Engine::new(cfg)?;
    let rows = par_rows(&cfg.grid(), |&(k, t)| {
        let mut row = Row::default();
        let numint = cfg
            .mode
            .oracle()
            .then(|| keep(&mut row, "f_numint", numint_density(&eng.model, k, t, &cfg.quadrature)))
            .flatten();
        let saddle = (cfg.mode != crate::config::ModeSel::Oracle)
            .then(|| keep(&mut row, "f_saddle", eng.saddle_density(k, t)))
            .flatten();
        let ratio = match (&numint, saddle) {
            (Some(n), Some(s)) => Some((n.ln_value - s.ln()).exp()),
            _ => None,
        };
        row.cells = vec![
            Cell::Num(Some(k)),
            Cell::Num(Some(t)),
            Cell::Num(numint.map(|p| p.value)),
            Cell::Num(saddle),
            Cell::Num(ratio),
        ];
        row
    });
    Ok(Table { header: DENSITY_HEADER.to_vec(), rows })
}
