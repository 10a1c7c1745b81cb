//! Convergence suites, moduli of continuity and rate fitting.

mod convergence;
mod fit;
mod modulus;

pub use convergence::{
    error_bound_ratio, exact_voronovskaja_term, is_exactly_reproduced, pointwise_convergence_check,
    polynomial_image, voronovskaja_check, voronovskaja_limit, voronovskaja_rhs, ConvergenceReport,
    ErrorBoundReport, ErrorBoundRow, Intervals,
};
pub use fit::{log_log_slope, moment_order_fit, richardson, Extrapolation, MomentKind, SlopeFit, UNDERFLOW};
pub use modulus::{forward_difference, modulus_of_continuity, ModulusQuery};
