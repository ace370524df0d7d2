//! Symbolic-numeric verification of the simple harmonic oscillator pipeline:
//! Lie symmetries, Jacobi last multipliers, alternative Lagrangians and
//! Hamiltonians, operator-ordering quantization and Schrodinger ladders.

pub mod error;
pub mod lagrange;
pub mod legendre;
pub mod mechsys;
pub mod multiplier;
pub mod pdesolve;
pub mod quantize;
pub mod report;
pub mod symkernel;

pub use error::{Error, Result};
pub use symkernel::{Bindings, Expr, Rational, Sampler};
