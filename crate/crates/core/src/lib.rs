//! Overlapping-generations growth model with wariness-augmented preferences.
//!
//! Households live two periods and put extra weight on the worse period of
//! life (wariness, parameter `gamma`). Optimal saving is then piecewise in
//! the gross return `R = f'(k')`, which makes the equilibrium recursion
//! `n k_{t+1} = s(omega(k_t), f'(k_{t+1}))` implicit and possibly
//! multivalued. This crate
//!
//! * evaluates the CES technology stably across many decades of capital
//!   ([`model`]),
//! * solves the household saving problem on all three regimes
//!   ([`household`]),
//! * enumerates every admissible next-period capital, simulates and
//!   classifies trajectories ([`dynamics`]),
//! * and runs steady-state, poverty-trap, collapse and comparative-statics
//!   diagnostics ([`analysis`]).
//!
//! The crate is `no_std` (with `alloc`); all transcendentals come from
//! `libm`, so results are bit-identical across targets.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod dynamics;
pub mod household;
mod math;
pub mod model;
pub mod solve;

pub use analysis::{RegimeLock, SteadyStateReport, TrapReport};
pub use dynamics::{BranchPolicy, LimitClass, StepSolution, Trajectory};
pub use household::{LogUtility, MarginalUtility, SavingResult};
pub use model::{Economy, Preferences, Production, Regime, SolverSettings, UtilityKind, Wariness};

/// Errors surfaced by constructors, solvers and inversions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A constructor received a parameter outside its admissible set.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// An operation received an argument outside its domain.
    #[error("domain error in {op}: argument {value} is not admissible")]
    Domain { op: &'static str, value: f64 },
    /// An inversion target lies outside the attainable range.
    #[error("{what}: target {value} outside attainable range ({lo}, {hi})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    /// A root solver was started without a sign change on its bracket.
    #[error("no sign change while bracketing {what} on [{lo}, {hi}]")]
    Bracket { what: &'static str, lo: f64, hi: f64 },
    /// The requested quantity is not defined for this parameter case.
    #[error("{op} is not defined here: {reason}")]
    Unsupported { op: &'static str, reason: &'static str },
    /// A unique transition was asserted but several candidates exist.
    #[error("expected a unique transition but found {count} candidates")]
    MultipleSolutions { count: usize },
    /// No admissible transition exists from the given state.
    #[error("no admissible transition from k = {k}")]
    NoStep { k: f64 },
    /// A finite-difference target vanished under perturbation.
    #[error("{what}: the quantity crosses a case boundary near the evaluation point")]
    CaseBoundary { what: &'static str },
}

pub type Result<T> = core::result::Result<T, Error>;
