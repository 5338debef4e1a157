//! Small-time asymptotics for basket call options under a bivariate SABR
//! model with `beta = 1`.
//!
//! The joint law of the two log-prices and the common volatility is mapped
//! to a heat kernel on three-dimensional hyperbolic space. Prices follow
//! from Laplace's method around the points of the strike surface closest to
//! the start point, and are checked against direct quadrature of the
//! leading-order density in [`oracle`].

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hyperbolic;
pub mod oracle;
pub mod price;
pub mod quad;
pub mod sabr_correlated;
pub mod sabr_uncorrelated;
pub mod saddle_core;
pub mod special;

pub use error::{Error, Result};
pub use hyperbolic::HPoint;
pub use oracle::{Domain, QuadratureSpec, TruncationBox};
pub use price::{Method, Mode, PriceResult};
pub use sabr_correlated::{CorrGeometry, CorrModel, CorrParams, CorrSaddle, TanakaWeight};
pub use sabr_uncorrelated::{UncorrParams, UncorrSaddle};
pub use saddle_core::{LaplacePoint, MinimizerClass, MinimizerKind};
