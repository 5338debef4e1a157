//! Command-line front end for the basket call asymptotics: configuration,
//! row computation and CSV/JSON/text output.

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use commands::{cmd_classify, cmd_density, cmd_price, cmd_rate, cmd_smile};
pub use config::{FileConfig, Format, ModeSel, ModelConfig, RunConfig, StrikeSpec};
pub use error::{CliError, CliResult};
pub use table::{Cell, Row, Table};
