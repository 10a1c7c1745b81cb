//! Baskakov–Durrmeyer–Stancu operators with a real shape parameter `γ`.
//!
//! Exact rational paths cover basis derivatives, moments and their
//! recurrences; floating paths evaluate the operator and its derivatives by
//! truncated series and adaptive quadrature.

pub mod analysis;
pub mod basis;
pub mod error;
pub mod exact;
pub mod functions;
pub mod moments;
pub mod operator;
pub mod params;
pub mod poly;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use exact::Rational;
pub use functions::FunctionSpec;
pub use moments::MomentTable;
pub use operator::OperatorResult;
pub use params::ShapeParams;
pub use poly::{RationalPoly, TrivariatePoly};
pub use quadrature::QuadratureConfig;

/// Library version, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
