//! The household saving problem.
//!
//! A young worker with wage `w` facing gross return `R` picks saving `s`.
//! Away from the equal-consumption band the first-order condition is the
//! Euler equation `u'(w - s) = b R u'(R s)` with an effective discount
//! factor `b` (beta1 below the band, beta2 above). Inside the band the
//! household equalizes consumption across periods: `s = w / (1 + R)`.

use core::cmp::Ordering;

use crate::math;
use crate::model::{Preferences, Regime};
use crate::solve;
use crate::{Error, Result};

/// Marginal utility of a strictly concave felicity with `u'(0+) = inf`.
/// `u` itself is never needed.
pub trait MarginalUtility {
    fn u_prime(&self, c: f64) -> f64;

    /// Closed-form Euler saving, if the kind admits one.
    fn euler_closed_form(&self, _b: f64, _w: f64, _r: f64) -> Option<f64> {
        None
    }
}

/// Logarithmic felicity: `u'(c) = 1/c`; Euler saving is `b w / (1 + b)`,
/// independent of the return.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogUtility;

impl MarginalUtility for LogUtility {
    fn u_prime(&self, c: f64) -> f64 {
        1.0 / c
    }

    fn euler_closed_form(&self, b: f64, w: f64, _r: f64) -> Option<f64> {
        Some(b * w / (1.0 + b))
    }
}

/// Optimal saving together with its regime label and defining residual.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SavingResult {
    pub s: f64,
    pub regime: Regime,
    /// `|u'(w-s) - b R u'(R s)|` off the band, `|s (1+R) - w|` on it.
    pub euler_residual: f64,
}

fn check_positive(op: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::Domain { op, value });
    }
    Ok(())
}

/// Solves `u'(w - s) = b R u'(R s)` for `s` in `(0, w)`.
///
/// The closed form is used when the utility provides one; otherwise the
/// residual is strictly increasing in `s` (strict concavity) and crosses
/// zero inside `(0, w)` because `u'(0+) = inf`, so a bracketed bisection
/// always succeeds.
pub fn euler_saving<U: MarginalUtility>(u: &U, b: f64, w: f64, r: f64, tol: f64) -> Result<f64> {
    check_positive("euler_saving.b", b)?;
    check_positive("euler_saving.w", w)?;
    check_positive("euler_saving.r", r)?;
    if let Some(s) = u.euler_closed_form(b, w, r) {
        return Ok(s);
    }
    let eps = 1e-14 * w;
    let phi = |s: f64| u.u_prime(w - s) - b * r * u.u_prime(r * s);
    let s = solve::bisect_log(phi, eps, w - eps, 1e-15, 300, "euler saving")?;
    let residual = math::abs(phi(s));
    if residual > tol.max(1e-9 * u.u_prime(w)) {
        return Err(Error::Bracket {
            what: "euler saving residual",
            lo: s,
            hi: residual,
        });
    }
    Ok(s)
}

/// The three-regime optimal saving rule.
///
/// The branch is selected by the regime of `R`; each branch's result also
/// satisfies the branch's defining inequality, which is what makes the rule
/// globally continuous in `R`.
pub fn piecewise_saving<U: MarginalUtility>(
    prefs: &Preferences,
    u: &U,
    w: f64,
    r: f64,
    tol: f64,
) -> Result<SavingResult> {
    check_positive("piecewise_saving.w", w)?;
    check_positive("piecewise_saving.r", r)?;
    let regime = prefs.regime_of(r);
    match regime {
        Regime::LowReturn => {
            let b = prefs.beta1();
            let s = euler_saving(u, b, w, r, tol)?;
            let residual = math::abs(u.u_prime(w - s) - b * r * u.u_prime(r * s));
            Ok(SavingResult { s, regime, euler_residual: residual })
        }
        Regime::HighReturn => {
            let b = prefs.beta2();
            let s = euler_saving(u, b, w, r, tol)?;
            let residual = math::abs(u.u_prime(w - s) - b * r * u.u_prime(r * s));
            Ok(SavingResult { s, regime, euler_residual: residual })
        }
        Regime::Band => {
            let s = w / (1.0 + r);
            Ok(SavingResult {
                s,
                regime,
                euler_residual: math::abs(s * (1.0 + r) - w),
            })
        }
    }
}

/// Compares optimal saving at two wariness levels sharing the same `beta`.
/// Returns the ordering of `s(gamma_1)` versus `s(gamma_2)` with
/// `gamma_1 <= gamma_2`; differences below `1e-12 * w` count as equal.
pub fn saving_vs_wariness<U: MarginalUtility>(
    lo: &Preferences,
    hi: &Preferences,
    u: &U,
    w: f64,
    r: f64,
    tol: f64,
) -> Result<Ordering> {
    if lo.beta() != hi.beta() {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: hi.beta(),
            reason: "wariness comparison requires identical beta",
        });
    }
    if lo.wariness().value() > hi.wariness().value() {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: hi.wariness().value(),
            reason: "pass the lower wariness first",
        });
    }
    let s1 = piecewise_saving(lo, u, w, r, tol)?.s;
    let s2 = piecewise_saving(hi, u, w, r, tol)?.s;
    if math::abs(s1 - s2) <= 1e-12 * w {
        Ok(Ordering::Equal)
    } else if s1 < s2 {
        Ok(Ordering::Less)
    } else {
        Ok(Ordering::Greater)
    }
}
