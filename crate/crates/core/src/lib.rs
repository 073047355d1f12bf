//! Exact-arithmetic engine for a three-player Bayesian game played on the
//! binary shift space `{0,1}^{G+}`, where `G+` is the free semigroup on two
//! generators `T1`, `T2`.
//!
//! The crate is organised bottom-up:
//!
//! - [`semigroup`]: words, depth-`n` cylinders, the two shifts, twin
//!   composition and the product measure.
//! - [`payoffs`]: the fixed payoff tables of the red players `R1`, `R2` and
//!   the green player `G0`, with expected payoffs and best responses.
//! - [`profiles`]: cylinder-measurable strategy profiles, exact and Monte
//!   Carlo regret, parity-rule bookkeeping and the per-cylinder minority
//!   statistics.
//! - [`analysis`]: exact checks of the quantitative bounds behind the
//!   non-existence argument, and a minimum-regret search over shallow
//!   measurable profiles.
//! - [`colouring`]: parity colourings of finite point graphs, GF(2)
//!   infeasibility certificates and a small finite-game equilibrium solver.
//!
//! All reported numbers are exact rationals ([`Rational`]); floating point is
//! only used inside search loops and Monte Carlo estimators.

pub mod analysis;
pub mod colouring;
pub mod error;
pub mod exec;
pub mod payoffs;
pub mod profiles;
pub mod rational;
pub mod report;
pub mod semigroup;

pub use error::{Error, Result};
pub use exec::Execution;
pub use rational::Rational;

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
