use std::path::Path;

use basket_sabr::{CorrParams, QuadratureSpec, TanakaWeight, UncorrParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Model section of a config file: the correlated fields, or `a0` alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, try_from = "RawModel")]
pub enum ModelConfig {
    Correlated(CorrParams),
    Uncorrelated(UncorrParams),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    sigma_x: Option<f64>,
    sigma_y: Option<f64>,
    alpha: Option<f64>,
    rho_xy: Option<f64>,
    rho_xa: Option<f64>,
    rho_ya: Option<f64>,
    a0: Option<f64>,
}

impl TryFrom<RawModel> for ModelConfig {
    type Error = String;

    fn try_from(r: RawModel) -> Result<Self, String> {
        let a0 = r.a0.ok_or("model.a0 is required")?;
        let fields = [
            ("sigma_x", r.sigma_x),
            ("sigma_y", r.sigma_y),
            ("alpha", r.alpha),
            ("rho_xy", r.rho_xy),
            ("rho_xa", r.rho_xa),
            ("rho_ya", r.rho_ya),
        ];
        let missing: Vec<&str> = fields.iter().filter(|f| f.1.is_none()).map(|f| f.0).collect();
        if missing.len() == fields.len() {
            return Ok(ModelConfig::Uncorrelated(UncorrParams { a0 }));
        }
        if !missing.is_empty() {
            return Err(format!("correlated model is missing {}", missing.join(", ")));
        }
        let v = |i: usize| fields[i].1.unwrap_or_default();
        Ok(ModelConfig::Correlated(CorrParams {
            sigma_x: v(0),
            sigma_y: v(1),
            alpha: v(2),
            rho_xy: v(3),
            rho_xa: v(4),
            rho_ya: v(5),
            a0,
        }))
    }
}

/// Strikes as an explicit list or an inclusive `start:stop:step` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StrikeSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl StrikeSpec {
    pub fn parse(s: &str) -> CliResult<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(StrikeSpec::List(Vec::new()));
        }
        if s.contains(':') {
            let p = parse_floats("strikes", s, ':')?;
            if p.len() != 3 {
                return Err(CliError::config("strikes", "range must be start:stop:step"));
            }
            return Ok(StrikeSpec::Range { start: p[0], stop: p[1], step: p[2] });
        }
        Ok(StrikeSpec::List(parse_floats("strikes", s, ',')?))
    }

    pub fn expand(&self) -> CliResult<Vec<f64>> {
        match *self {
            StrikeSpec::List(ref v) => Ok(v.clone()),
            StrikeSpec::Range { start, stop, step } => {
                if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
                    return Err(CliError::config("strikes", "range needs finite bounds and step > 0"));
                }
                // index-based so that the end point survives rounding
                let n = ((stop - start) / step + 1e-9).floor();
                if n < 0.0 {
                    return Ok(Vec::new());
                }
                // snap to 12 decimals so that 2.05 + 1 * 0.025 prints as 2.075
                Ok((0..=n as usize).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
            }
        }
    }
}

pub fn parse_floats(field: &'static str, s: &str, sep: char) -> CliResult<Vec<f64>> {
    s.split(sep)
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(field, format!("cannot parse {p:?} as a number")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModeSel {
    Asymptotic,
    UpsilonExact,
    Oracle,
    All,
}

impl ModeSel {
    pub fn asymptotic(self) -> bool {
        matches!(self, ModeSel::Asymptotic | ModeSel::All)
    }

    pub fn upsilon(self) -> bool {
        matches!(self, ModeSel::UpsilonExact | ModeSel::All)
    }

    pub fn oracle(self) -> bool {
        matches!(self, ModeSel::Oracle | ModeSel::All)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Text,
}

/// Config file layout. Every field except `model` may be omitted.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub description: Option<String>,
    pub model: Option<ModelConfig>,
    pub strikes: Option<StrikeSpec>,
    pub maturities: Option<Vec<f64>>,
    pub mode: Option<ModeSel>,
    pub format: Option<Format>,
    pub rel_tol: Option<f64>,
    pub max_evals: Option<usize>,
    pub tanaka_weight: Option<TanakaWeight>,
}

impl FileConfig {
    pub fn from_json(src: &str) -> CliResult<Self> {
        serde_json::from_str(src).map_err(|e| CliError::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::from_json(&src)
    }

    pub fn preset(name: &str) -> CliResult<Self> {
        let src = match name {
            "table1" => include_str!("../presets/table1.json"),
            "table2" => include_str!("../presets/table2.json"),
            "fig3a" => include_str!("../presets/fig3a.json"),
            "fig3b" => include_str!("../presets/fig3b.json"),
            "fig3c" => include_str!("../presets/fig3c.json"),
            _ => {
                return Err(CliError::config(
                    "preset",
                    format!("unknown preset {name:?}; expected one of table1, table2, fig3a, fig3b, fig3c"),
                ))
            }
        };
        Self::from_json(src)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: FileConfig) -> FileConfig {
        FileConfig {
            description: over.description.or(self.description),
            model: over.model.or(self.model),
            strikes: over.strikes.or(self.strikes),
            maturities: over.maturities.or(self.maturities),
            mode: over.mode.or(self.mode),
            format: over.format.or(self.format),
            rel_tol: over.rel_tol.or(self.rel_tol),
            max_evals: over.max_evals.or(self.max_evals),
            tanaka_weight: over.tanaka_weight.or(self.tanaka_weight),
        }
    }
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub strikes: Vec<f64>,
    pub maturities: Vec<f64>,
    pub mode: ModeSel,
    pub format: Format,
    pub quadrature: QuadratureSpec,
    pub weight: TanakaWeight,
}

impl RunConfig {
    pub fn from_file_config(f: FileConfig) -> CliResult<Self> {
        let model = f.model.ok_or_else(|| CliError::config("model", "missing; use --config, --preset or --a0"))?;
        match model {
            ModelConfig::Correlated(p) => p.validate(),
            ModelConfig::Uncorrelated(p) => UncorrParams::new(p.a0).map(|_| ()),
        }
        .map_err(|e| CliError::config("model", e.to_string()))?;
        let strikes = f.strikes.unwrap_or(StrikeSpec::List(Vec::new())).expand()?;
        if let Some(&k) = strikes.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(CliError::config("strikes", format!("strikes must be positive, got {k}")));
        }
        let maturities = f.maturities.unwrap_or_default();
        if let Some(&t) = maturities.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(CliError::config("maturities", format!("maturities must be positive, got {t}")));
        }
        let mut quadrature = QuadratureSpec::default();
        if let Some(r) = f.rel_tol {
            quadrature.rel_tol = r;
        }
        if let Some(m) = f.max_evals {
            quadrature.max_evals = m;
        }
        quadrature.validate().map_err(|e| CliError::config("quadrature", e.to_string()))?;
        Ok(RunConfig {
            model,
            strikes,
            maturities,
            mode: f.mode.unwrap_or(ModeSel::All),
            format: f.format.unwrap_or(Format::Csv),
            quadrature,
            weight: f.tanaka_weight.unwrap_or_default(),
        })
    }

    /// `(K, t)` pairs in row order: strikes outer, maturities inner.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        self.strikes
            .iter()
            .flat_map(|&k| self.maturities.iter().map(move |&t| (k, t)))
            .collect()
    }
}
