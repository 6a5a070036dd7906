//! Symbolic-numeric toolkit for traveling-wave solutions of space-time
//! fractional nonlinear evolution equations via the exp(-Phi)-expansion
//! method: exact expression algebra, modified Riemann-Liouville fractional
//! derivatives, ansatz balancing and solving, a catalog of closed-form
//! solution families, and residual-based verification.

pub mod catalog;
pub mod expansion;
pub mod fracderiv;
pub mod symexpr;
pub mod verify;

/// Scalar used by every numeric routine. The numeric lane is generic over
/// `num_traits::Float`; this is the concrete instantiation the CLI and the
/// verification layer work in.
pub type Real = f64;

pub use symexpr::{Expr, Func, Rational, Symbol};
