//! Model primitives: preferences with wariness, CES production (optionally
//! plus a linear term), and the economy container.
//!
//! All production-side quantities are evaluated by factoring
//! `a k^rho + 1 - a` in log space, so strongly negative `rho` and capital
//! spanning `1e-12..1e12` never produce overflow where the true value is
//! representable. `k = 0` returns the analytic limit instead of an error;
//! negative `k` propagates NaN.

use crate::math;
use crate::{Error, Result};

/// Wariness level. The infinite case (only the worst period of life
/// matters) is a distinct state, never a large-float sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wariness {
    Finite(f64),
    Infinite,
}

impl Wariness {
    /// Numeric value; `+inf` for the infinite state.
    pub fn value(self) -> f64 {
        match self {
            Wariness::Finite(g) => g,
            Wariness::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Wariness::Infinite)
    }
}

/// Branches of the piecewise saving rule, selected by the gross return
/// `R = f'(k_{t+1})` against the thresholds `1/beta1 <= 1/beta2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    /// Regime 1: `R < 1/beta1`; households save with discount factor beta1.
    LowReturn,
    /// Regime 2: `R > 1/beta2`; households save with discount factor beta2.
    HighReturn,
    /// Regime 3: returns inside the band (boundaries inclusive); saving
    /// equalizes consumption across both periods of life.
    Band,
}

impl Regime {
    /// Conventional numeric label 1/2/3.
    pub fn index(self) -> u8 {
        match self {
            Regime::LowReturn => 1,
            Regime::HighReturn => 2,
            Regime::Band => 3,
        }
    }
}

impl core::fmt::Display for Regime {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Time preference plus wariness; derives the effective discount factors
/// `beta1 = beta + gamma` and `beta2 = beta/(1+gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preferences {
    beta: f64,
    wariness: Wariness,
}

impl Preferences {
    pub fn new(beta: f64, wariness: Wariness) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "must be finite and > 0",
            });
        }
        if let Wariness::Finite(g) = wariness {
            if !(g >= 0.0) || !g.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "gamma",
                    value: g,
                    reason: "must be finite and >= 0, or the explicit infinite state",
                });
            }
        }
        Ok(Self { beta, wariness })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn wariness(&self) -> Wariness {
        self.wariness
    }

    /// Equivalent weight on the worst period, `lambda = gamma/(1+gamma)`.
    pub fn lambda(&self) -> f64 {
        match self.wariness {
            Wariness::Finite(g) => g / (1.0 + g),
            Wariness::Infinite => 1.0,
        }
    }

    /// `beta1 = beta + gamma` (`+inf` under infinite wariness).
    pub fn beta1(&self) -> f64 {
        match self.wariness {
            Wariness::Finite(g) => self.beta + g,
            Wariness::Infinite => f64::INFINITY,
        }
    }

    /// `beta2 = beta / (1 + gamma)` (`0` under infinite wariness).
    pub fn beta2(&self) -> f64 {
        match self.wariness {
            Wariness::Finite(g) => self.beta / (1.0 + g),
            Wariness::Infinite => 0.0,
        }
    }

    /// Regime thresholds `(1/beta1, 1/beta2)`; `(0, +inf)` under infinite
    /// wariness, a degenerate equal pair when `gamma = 0`.
    pub fn thresholds(&self) -> (f64, f64) {
        match self.wariness {
            Wariness::Finite(g) => (1.0 / (self.beta + g), (1.0 + g) / self.beta),
            Wariness::Infinite => (0.0, f64::INFINITY),
        }
    }

    /// Classifies a gross return; boundary ties go to the band (weak
    /// inequalities on both sides).
    pub fn regime_of(&self, r: f64) -> Regime {
        let (lo, hi) = self.thresholds();
        if r < lo {
            Regime::LowReturn
        } else if r > hi {
            Regime::HighReturn
        } else {
            Regime::Band
        }
    }
}

/// Analytic limits of the technology at the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub f_zero: f64,
    pub f_inf: f64,
    pub fp_zero: f64,
    pub fp_inf: f64,
}

/// CES technology `f(k) = A (a k^rho + 1 - a)^{1/rho} + B k` in intensive
/// form. `B = 0` is the pure CES case; a positive `B` adds a linear term
/// (equivalently, `1 - B` is the depreciation rate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Production {
    tfp: f64,
    intensity: f64,
    rho: f64,
    linear: f64,
    // cached logs for the hot path
    ln_tfp: f64,
    ln_int: f64,
    ln_1m_int: f64,
    inv_rho: f64,
}

impl Production {
    pub fn new(tfp: f64, intensity: f64, rho: f64, linear: f64) -> Result<Self> {
        if !(tfp > 0.0) || !tfp.is_finite() {
            return Err(Error::InvalidParameter {
                name: "A",
                value: tfp,
                reason: "must be finite and > 0",
            });
        }
        if !(intensity > 0.0 && intensity < 1.0) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: intensity,
                reason: "must lie in (0, 1)",
            });
        }
        if !(rho < 1.0) || rho == 0.0 || !rho.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rho",
                value: rho,
                reason: "must be finite, < 1 and != 0",
            });
        }
        if !(linear >= 0.0) || !linear.is_finite() {
            return Err(Error::InvalidParameter {
                name: "B",
                value: linear,
                reason: "must be finite and >= 0",
            });
        }
        Ok(Self {
            tfp,
            intensity,
            rho,
            linear,
            ln_tfp: math::ln(tfp),
            ln_int: math::ln(intensity),
            ln_1m_int: math::ln_1p(-intensity),
            inv_rho: 1.0 / rho,
        })
    }

    pub fn tfp(&self) -> f64 {
        self.tfp
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn linear(&self) -> f64 {
        self.linear
    }

    /// `ln(a k^rho + 1 - a)`, the shared inner term, for `k > 0`.
    fn ln_inner(&self, k: f64) -> f64 {
        math::log_add_exp(self.rho * math::ln(k) + self.ln_int, self.ln_1m_int)
    }

    /// Output per worker `f(k)`; `f(0)` is the analytic limit.
    pub fn f(&self, k: f64) -> f64 {
        if k == 0.0 {
            return self.limits().f_zero;
        }
        if k < 0.0 {
            return f64::NAN;
        }
        math::exp(self.ln_tfp + self.inv_rho * self.ln_inner(k)) + self.linear * k
    }

    /// Marginal product `f'(k) = A a k^{rho-1} (a k^rho + 1-a)^{1/rho - 1} + B`.
    pub fn f_prime(&self, k: f64) -> f64 {
        if k == 0.0 {
            return self.limits().fp_zero;
        }
        if k < 0.0 {
            return f64::NAN;
        }
        let ln_k = math::ln(k);
        let ln_x = math::log_add_exp(self.rho * ln_k + self.ln_int, self.ln_1m_int);
        math::exp(self.ln_tfp + self.ln_int + (self.rho - 1.0) * ln_k + (self.inv_rho - 1.0) * ln_x)
            + self.linear
    }

    /// Wage per worker `omega(k) = f(k) - k f'(k) = A (1-a)(a k^rho + 1-a)^{1/rho - 1}`.
    /// Independent of the linear term.
    pub fn omega(&self, k: f64) -> f64 {
        if k == 0.0 {
            return if self.rho < 0.0 { 0.0 } else { self.limits().f_zero };
        }
        if k < 0.0 {
            return f64::NAN;
        }
        math::exp(self.ln_tfp + self.ln_1m_int + (self.inv_rho - 1.0) * self.ln_inner(k))
    }

    /// `h(k) = k (1 + f'(k))`, the band-equation denominator times k.
    pub fn h(&self, k: f64) -> f64 {
        if k == 0.0 {
            return 0.0;
        }
        k * (1.0 + self.f_prime(k))
    }

    /// `h'(k)` in closed form: `1 + B + f'_ces(k) (1 - (1-rho)(1-a)/(a k^rho + 1-a))`.
    pub fn h_prime(&self, k: f64) -> f64 {
        if k <= 0.0 {
            return f64::NAN;
        }
        let ln_k = math::ln(k);
        let ln_x = math::log_add_exp(self.rho * ln_k + self.ln_int, self.ln_1m_int);
        let fp_ces = math::exp(
            self.ln_tfp + self.ln_int + (self.rho - 1.0) * ln_k + (self.inv_rho - 1.0) * ln_x,
        );
        1.0 + self.linear + fp_ces * (1.0 - (1.0 - self.rho) * math::exp(self.ln_1m_int - ln_x))
    }

    /// `H(k) = omega(k) / h(k)`, the fixed-point function of the
    /// equal-consumption regime. For `rho < 0`, `B = 0`: vanishes at both
    /// ends of the domain with a single interior maximum.
    pub fn big_h(&self, k: f64) -> f64 {
        if k == 0.0 {
            return if self.rho < 0.0 { 0.0 } else { f64::INFINITY };
        }
        if k < 0.0 {
            return f64::NAN;
        }
        self.omega(k) / self.h(k)
    }

    /// `W(k) = omega(k)/k`: unimodal with an interior maximum for `rho < 0`,
    /// strictly decreasing for `rho > 0`.
    pub fn cap_w(&self, k: f64) -> f64 {
        if k == 0.0 {
            return if self.rho < 0.0 { 0.0 } else { f64::INFINITY };
        }
        if k < 0.0 {
            return f64::NAN;
        }
        self.omega(k) / k
    }

    /// Location and value of the interior maximum of `W`:
    /// `x0 = ((1-a)/(-a rho))^{1/rho}`, `max W = -A rho a^{1/rho} (1-rho)^{1/rho-1}`.
    /// Defined for `rho < 0` only (for `rho > 0`, `W` has no interior max).
    pub fn x0_and_max_w(&self) -> Result<(f64, f64)> {
        if self.rho > 0.0 {
            return Err(Error::Unsupported {
                op: "x0_and_max_w",
                reason: "W = omega/k has no interior maximum for rho in (0,1)",
            });
        }
        let ln_neg_rho = math::ln(-self.rho);
        let x0 = math::exp(self.inv_rho * (self.ln_1m_int - self.ln_int - ln_neg_rho));
        let max_w = math::exp(
            self.ln_tfp
                + ln_neg_rho
                + self.inv_rho * self.ln_int
                + (self.inv_rho - 1.0) * math::ln_1p(-self.rho),
        );
        Ok((x0, max_w))
    }

    /// Analytic boundary limits of `f` and `f'`.
    pub fn limits(&self) -> Limits {
        let corner = math::exp(self.ln_tfp + self.inv_rho * self.ln_int) + self.linear;
        let plateau = math::exp(self.ln_tfp + self.inv_rho * self.ln_1m_int);
        if self.rho < 0.0 {
            Limits {
                f_zero: 0.0,
                f_inf: if self.linear > 0.0 { f64::INFINITY } else { plateau },
                fp_zero: corner,
                fp_inf: self.linear,
            }
        } else {
            Limits {
                f_zero: plateau,
                f_inf: f64::INFINITY,
                fp_zero: f64::INFINITY,
                fp_inf: corner,
            }
        }
    }
}

/// Felicity kinds the solver understands. Logarithmic is fully supported;
/// the variant list is open for future strictly concave kinds with
/// `u'(0) = inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[non_exhaustive]
pub enum UtilityKind {
    #[default]
    Log,
}

/// Solver knobs; defaults reproduce every documented number in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SolverSettings {
    /// Absolute residual tolerance for root equations.
    pub tol_root: f64,
    /// Fixed-point equality / deduplication tolerance.
    pub tol_fixed: f64,
    /// Lower end of the working capital range.
    pub k_min: f64,
    /// Upper end of the working capital range.
    pub k_max: f64,
    /// Bracket-scan resolution over `[k_min, k_max]`.
    pub grid_points: usize,
    /// Simulation horizon cap.
    pub max_iter: usize,
    /// A path is collapsed once k falls below this.
    pub collapse_eps: f64,
    /// Consecutive near-equal steps required to declare convergence.
    pub window: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol_root: 1e-12,
            tol_fixed: 1e-10,
            k_min: 1e-12,
            k_max: 1e12,
            grid_points: 4096,
            max_iter: 10_000,
            collapse_eps: 1e-8,
            window: 10,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_min > 0.0 && self.k_min < self.k_max) || !self.k_max.is_finite() {
            return Err(Error::InvalidParameter {
                name: "k_min/k_max",
                value: self.k_min,
                reason: "require 0 < k_min < k_max < inf",
            });
        }
        if self.grid_points < 64 {
            return Err(Error::InvalidParameter {
                name: "grid_points",
                value: self.grid_points as f64,
                reason: "require at least 64 scan points",
            });
        }
        for (name, v) in [
            ("tol_root", self.tol_root),
            ("tol_fixed", self.tol_fixed),
            ("collapse_eps", self.collapse_eps),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "tolerances must be finite and > 0",
                });
            }
        }
        if self.max_iter == 0 || self.window == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter/window",
                value: 0.0,
                reason: "must be >= 1",
            });
        }
        Ok(())
    }
}

/// A complete parameterized economy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Economy {
    pub prefs: Preferences,
    pub prod: Production,
    /// Population growth factor (cohort size ratio), > 0.
    pub n: f64,
    pub utility: UtilityKind,
    pub solver: SolverSettings,
}

impl Economy {
    pub fn new(prefs: Preferences, prod: Production, n: f64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter {
                name: "n",
                value: n,
                reason: "must be finite and > 0",
            });
        }
        Ok(Self {
            prefs,
            prod,
            n,
            utility: UtilityKind::Log,
            solver: SolverSettings::default(),
        })
    }

    pub fn with_solver(mut self, solver: SolverSettings) -> Result<Self> {
        solver.validate()?;
        self.solver = solver;
        Ok(self)
    }
}
