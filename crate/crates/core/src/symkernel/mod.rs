//! Symbolic expressions over a fixed function basis, with exact
//! differentiation and randomized numeric equivalence.

mod calculus;
mod eval;
mod expr;
mod integrate;
pub mod ops;
mod rational;
mod sample;
mod serial;

pub use eval::{evaluate, Bindings};
pub use expr::{Expr, Func, Node, Symbol, MAX_EXPANDED_POWER, MAX_EXPANSION_TERMS};
pub use integrate::antiderivative;
pub use rational::Rational;
pub use sample::{equiv, equiv_up_to_constant, Guard, Sampler, DEFAULT_SAMPLES, DEFAULT_SEED};
pub use serial::{parse_prefix, to_prefix};
