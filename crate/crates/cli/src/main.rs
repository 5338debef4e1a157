use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use basket_sabr::TanakaWeight;
use basket_sabr_cli::config::parse_floats;
use basket_sabr_cli::{
    cmd_classify, cmd_density, cmd_price, cmd_rate, cmd_smile, CliError, CliResult, FileConfig, Format, ModeSel,
    ModelConfig, RunConfig, StrikeSpec, Table,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "basket-sabr", version, about = "Small-time basket call asymptotics under bivariate SABR")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prices, oracle ratios and implied vols per (K, t)
    Price(RunArgs),
    /// Implied-vol smile per (K, t)
    Smile(RunArgs),
    /// Rate function and number of minimisers per strike
    Rate(RunArgs),
    /// Classify the minimisers of hbar_K
    Classify(ClassifyArgs),
    /// Basket density per (K, t)
    Density(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightArg {
    Diagonal,
    Full,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in config: table1, table2, fig3a, fig3b, fig3c
    #[arg(long)]
    preset: Option<String>,
    /// Comma list or start:stop:step
    #[arg(long, allow_hyphen_values = true)]
    strikes: Option<String>,
    /// Comma list
    #[arg(long)]
    maturities: Option<String>,
    /// Methods to compute (default all)
    #[arg(long, value_enum)]
    mode: Option<ModeSel>,
    /// Uncorrelated model with this a0 (replaces the configured model)
    #[arg(long)]
    a0: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
    /// Quadrature relative tolerance (default 1e-6)
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Quadrature evaluation budget per price (default 2e8)
    #[arg(long)]
    max_evals: Option<usize>,
    /// Weight of the basket variance: diagonal (default) or full
    #[arg(long, value_enum)]
    tanaka_weight: Option<WeightArg>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Comma list or start:stop:step
    #[arg(long)]
    strikes: String,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct OutArgs {
    /// Output file (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (default csv, text for classify)
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn run_config(a: &RunArgs) -> CliResult<RunConfig> {
    let mut base = FileConfig::default();
    if let Some(p) = &a.preset {
        base = base.merge(FileConfig::preset(p)?);
    }
    if let Some(p) = &a.config {
        base = base.merge(FileConfig::load(p)?);
    }
    let flags = FileConfig {
        model: a.a0.map(|a0| ModelConfig::Uncorrelated(basket_sabr::UncorrParams { a0 })),
        strikes: a.strikes.as_deref().map(StrikeSpec::parse).transpose()?,
        maturities: a.maturities.as_deref().map(|s| parse_floats("maturities", s, ',')).transpose()?,
        mode: a.mode,
        format: a.out.format,
        rel_tol: a.rel_tol,
        max_evals: a.max_evals,
        tanaka_weight: a.tanaka_weight.map(|w| match w {
            WeightArg::Diagonal => TanakaWeight::Diagonal,
            WeightArg::Full => TanakaWeight::Full,
        }),
        ..FileConfig::default()
    };
    RunConfig::from_file_config(base.merge(flags))
}

fn emit(table: &Table, format: Format, out: &Option<PathBuf>) -> CliResult<()> {
    match out {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Io(p.display().to_string(), e))?;
            table.write(format, BufWriter::new(f))
        }
        None => table.write(format, io::stdout().lock()),
    }
}

fn run(cli: Cli) -> CliResult<Table> {
    let (table, format, out) = match &cli.cmd {
        Command::Classify(a) => {
            let strikes = StrikeSpec::parse(&a.strikes)?.expand()?;
            (cmd_classify(&strikes), a.out.format.unwrap_or(Format::Text), &a.out.out)
        }
        Command::Price(a) | Command::Smile(a) | Command::Rate(a) | Command::Density(a) => {
            let cfg = run_config(a)?;
            let table = match cli.cmd {
                Command::Price(_) => cmd_price(&cfg)?,
                Command::Smile(_) => cmd_smile(&cfg)?,
                Command::Rate(_) => cmd_rate(&cfg)?,
                _ => cmd_density(&cfg)?,
            };
            (table, cfg.format, &a.out.out)
        }
    };
    emit(&table, format, out)?;
    Ok(table)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(table) => {
            let mut err = io::stderr().lock();
            for (i, r) in table.rows.iter().enumerate() {
                for w in &r.warnings {
                    let _ = writeln!(err, "warning: row {i}: {w}");
                }
            }
            if table.failed() > 0 {
                let _ = writeln!(err, "{}", table.error_summary());
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = writeln!(io::stderr(), "{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::from(2)
        }
    }
}
