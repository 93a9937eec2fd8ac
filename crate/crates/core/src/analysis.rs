//! Steady states, poverty-trap thresholds, collapse / uniqueness / regime-lock
//! checks, and comparative statics with analytic sign cross-validation.
//!
//! Everything here is built on two scalar shapes. The per-capita wage ratio
//! `W(k) = omega(k)/k` is hump-shaped for `rho < 0` (zero at both ends, peak
//! at a closed-form `x0`), so explicit-branch fixed points `g_b(k) = k`
//! reduce to `W(k) = n(1+b)/b` with zero, one, or two roots. The band ratio
//! `H(k) = omega(k)/h(k)` has the same hump shape with its peak `x*` solving
//! a one-dimensional equation, so band steady states `H(k) = n` bracket
//! around `x*`. Poverty-trap thresholds, collapse bounds (the `M` values),
//! and comparative statics all derive from these two pictures.

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{self, BranchPolicy, LimitClass};
use crate::math;
use crate::model::{Economy, Production, Regime, UtilityKind, Wariness};
use crate::solve;
use crate::{Error, Result};

/// Local stability of a steady state under the one-step map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Stability {
    Stable,
    Unstable,
    /// |slope| within 1e-3 of one, or the slope could not be estimated.
    Boundary,
}

/// A steady state of the equilibrium recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SteadyState {
    pub k: f64,
    pub regime: Regime,
    pub stability: Stability,
    /// Finite-difference derivative of the local branch map at `k`.
    pub slope: f64,
}

/// The boundedness constants controlling collapse: `M1`/`M2` scale the wage
/// peak by each branch's saving factor, `M3` is the supremum of `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MValues {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

/// All steady states plus the collapse constants.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SteadyStateReport {
    pub steady_states: Vec<SteadyState>,
    pub m_values: MValues,
}

/// Root structure of the explicit-branch fixed-point equation `g_b(k) = k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GbCase {
    /// `rho < 0` with the wage peak below the threshold: no positive root.
    NoRoots,
    /// Peak exactly at the threshold: the double root `x0`.
    Tangent,
    /// Peak above the threshold: roots on both sides of `x0`.
    TwoRoots,
    /// `rho > 0`: `W` falls monotonically, one root.
    SingleCrossing,
}

/// Fixed points of `g_b(k) = b omega(k) / (n (1+b))`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GbFixedPoints {
    pub case: GbCase,
    /// Ascending; empty, one, or two entries.
    pub roots: Vec<f64>,
    /// Argmax of `W` (`rho < 0` only).
    pub x0: Option<f64>,
    /// Peak of `W` (`rho < 0` only).
    pub max_w: Option<f64>,
    /// `n (1+b) / b`, the level `W` must reach for a fixed point.
    pub threshold: f64,
}

/// Peak and level-crossings of `H(k) = omega(k) / h(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HFixedPoints {
    /// Argmax of `H`.
    pub x_star: f64,
    /// `H(x_star)`.
    pub peak: f64,
    /// Roots of `H(k) = n` straddling `x_star`; equal entries mark a
    /// tangency; `None` when the peak sits below `n`.
    pub pair: Option<(f64, f64)>,
}

/// Monotonicity of `h(k) = k (1 + f'(k))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HIncreasingReport {
    pub increasing: bool,
    /// Closed-form minimum of `h'` for `rho < 0`; grid minimum for `rho > 0`.
    pub criterion: f64,
    /// `h'` evaluated directly at the minimizing point (must agree with
    /// `criterion`).
    pub min_slope: f64,
    /// The interior minimizer of `h'` (`rho < 0` only).
    pub x_c: Option<f64>,
}

/// Grid verdicts for the two premises that make one-step equilibria unique.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UniquenessReport {
    pub unique: bool,
    /// `f'(k) u'(n k f'(k))` strictly decreasing across the grid.
    pub returns_decreasing: bool,
    /// `h` strictly increasing across the grid.
    pub h_increasing: bool,
    /// First grid interval violating a premise.
    pub witness: Option<(f64, f64)>,
}

/// Whether attainable returns confine the economy to one saving regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RegimeLock {
    Locked(Regime),
    Mixed,
}

/// Outcome of the four sufficient conditions for global collapse.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CollapseCheck {
    /// True when the uniqueness premise holds and some case fires.
    pub collapses: bool,
    /// 1-based index of the first case that fires.
    pub case: Option<usize>,
    pub cases: [bool; 4],
    pub m: MValues,
    /// The shared premise (one-step uniqueness).
    pub uniqueness: bool,
}

/// The three numeric conditions behind the trap construction: the branch map
/// has fixed points, is ordered in its discount parameter, and lies below
/// the diagonal near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PovertyAssumption {
    pub holds: bool,
    pub fixed_points_nonempty: bool,
    pub ordered_in_b: bool,
    pub small_x_vanishing: bool,
}

/// Which structural situation the trap analysis dispatched to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TrapCase {
    NoWariness,
    LockedLowReturn,
    LockedHighReturn,
    LockedBand,
    Mixed,
    /// No positive steady state on the operative branch.
    Collapse,
}

/// A named threshold; `maximal` marks the proven maximum trap boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NamedThreshold {
    pub name: &'static str,
    pub value: f64,
    pub maximal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TrapVerdict {
    /// Capital starting in `(0, threshold)` shrinks to zero. When `maximal`
    /// also holds, starts above the threshold converge to the upper steady
    /// state.
    TrapBelow { threshold: f64, maximal: bool },
    CollapseForAll,
    NoTrap,
}

/// Poverty-trap analysis: the dispatched case, every named threshold the
/// case defines, and the dynamic verdict.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TrapReport {
    pub case: TrapCase,
    pub thresholds: Vec<NamedThreshold>,
    pub verdict: TrapVerdict,
}

/// Simulation-based audit of a trap verdict from 0.9x and 1.1x the
/// threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SemanticsCheck {
    pub below_start: f64,
    pub below: LimitClass,
    pub above_start: f64,
    pub above: LimitClass,
    /// Below must collapse; for a maximal trap the upper start must also
    /// converge to the largest stable steady state.
    pub consistent: bool,
}

/// Thresholds available to comparative statics and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Threshold {
    /// Lower (or unique) fixed point of the baseline branch map `g_beta`.
    X1,
    /// Upper fixed point of `g_beta`.
    X2,
    /// Argmax of `W`.
    X0,
    /// Lower fixed point of the patient-branch map `g_beta1`.
    XBeta1,
    /// Lower fixed point of the impatient-branch map `g_beta2`.
    XBeta2,
    /// Lower root of `H = n`.
    KBar1,
    /// Upper root of `H = n`.
    KBar2,
    /// Argmax of `H`.
    XStar,
    /// Mixed-regime trap bound, wage-of-product reading.
    XPovertyA,
    /// Mixed-regime trap bound, product-of-wage reading.
    XPovertyB,
}

impl Threshold {
    pub fn name(self) -> &'static str {
        match self {
            Threshold::X1 => "x1",
            Threshold::X2 => "x2",
            Threshold::X0 => "x0",
            Threshold::XBeta1 => "x_beta1",
            Threshold::XBeta2 => "x_beta2",
            Threshold::KBar1 => "kbar1",
            Threshold::KBar2 => "kbar2",
            Threshold::XStar => "x_star",
            Threshold::XPovertyA => "x_poverty_a",
            Threshold::XPovertyB => "x_poverty_b",
        }
    }
}

/// Parameters a sweep or derivative may perturb.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Param {
    Tfp,
    Intensity,
    Rho,
    Linear,
    Beta,
    Gamma,
    N,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Tfp => "A",
            Param::Intensity => "a",
            Param::Rho => "rho",
            Param::Linear => "B",
            Param::Beta => "beta",
            Param::Gamma => "gamma",
            Param::N => "n",
        }
    }

    pub fn get(self, econ: &Economy) -> f64 {
        match self {
            Param::Tfp => econ.prod.tfp(),
            Param::Intensity => econ.prod.intensity(),
            Param::Rho => econ.prod.rho(),
            Param::Linear => econ.prod.linear(),
            Param::Beta => econ.prefs.beta(),
            Param::Gamma => econ.prefs.wariness().value(),
            Param::N => econ.n,
        }
    }

    /// Rebuilds the economy with this parameter set to `v`, revalidating
    /// through the constructors.
    pub fn with_value(self, econ: &Economy, v: f64) -> Result<Economy> {
        let prod = &econ.prod;
        let prefs = &econ.prefs;
        let (new_prefs, new_prod, new_n) = match self {
            Param::Tfp => (
                prefs.clone(),
                Production::new(v, prod.intensity(), prod.rho(), prod.linear())?,
                econ.n,
            ),
            Param::Intensity => (
                prefs.clone(),
                Production::new(prod.tfp(), v, prod.rho(), prod.linear())?,
                econ.n,
            ),
            Param::Rho => (
                prefs.clone(),
                Production::new(prod.tfp(), prod.intensity(), v, prod.linear())?,
                econ.n,
            ),
            Param::Linear => (
                prefs.clone(),
                Production::new(prod.tfp(), prod.intensity(), prod.rho(), v)?,
                econ.n,
            ),
            Param::Beta => (
                crate::model::Preferences::new(v, prefs.wariness())?,
                prod.clone(),
                econ.n,
            ),
            Param::Gamma => (
                crate::model::Preferences::new(prefs.beta(), Wariness::Finite(v))?,
                prod.clone(),
                econ.n,
            ),
            Param::N => (prefs.clone(), prod.clone(), v),
        };
        let mut out = Economy::new(new_prefs, new_prod, new_n)?;
        out.utility = econ.utility;
        out.solver = econ.solver.clone();
        Ok(out)
    }
}

/// A central finite-difference derivative with its own convergence record.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FdEstimate {
    pub derivative: f64,
    /// Step of the final estimate.
    pub step: f64,
    /// Gap between the last two estimates (the noise proxy).
    pub err: f64,
    /// Whether the gap closed to 1% before the step floor.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SignClass {
    Negative,
    Positive,
    /// The membership value sits on a region boundary.
    Indeterminate,
}

/// Predicted sign of `d x1 / d rho` with its finite-difference audit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SignPrediction {
    /// Interior zero of the boundary function on (0, 1).
    pub y_s: f64,
    pub sign: SignClass,
    pub fd: FdEstimate,
    /// `None` when |fd| is within 10x its noise proxy, otherwise whether the
    /// fd sign matches the prediction.
    pub agrees: Option<bool>,
    /// The membership test gives the same answer phrased on `x1^rho` and on
    /// `x1` itself.
    pub equivalent_forms_agree: bool,
}

fn ensure_log(econ: &Economy, _op: &'static str) -> Result<()> {
    match econ.utility {
        UtilityKind::Log => Ok(()),
    }
}

/// `b/(1+b)`, extended continuously to `b = inf`.
fn euler_factor(b: f64) -> f64 {
    if b.is_infinite() {
        1.0
    } else {
        b / (1.0 + b)
    }
}

/// `n(1+b)/b`, the `W` level a fixed point of `g_b` must attain.
fn gb_threshold(n: f64, b: f64) -> f64 {
    if b.is_infinite() {
        n
    } else {
        n * (1.0 + b) / b
    }
}

/// The one-branch capital map `g_b(k) = b omega(k) / (n (1+b))`.
pub fn g_beta_map(econ: &Economy, b: f64, k: f64) -> Result<f64> {
    ensure_log(econ, "g_beta_map")?;
    if !(b > 0.0) {
        return Err(Error::InvalidParameter {
            name: "b",
            value: b,
            reason: "discount weight must be positive",
        });
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain {
            op: "g_beta_map.k",
            value: k,
        });
    }
    Ok(euler_factor(b) * econ.prod.omega(k) / econ.n)
}

/// Walks from the peak at `x0` in one direction until `W - d` turns
/// negative, then bisects back. `W` vanishes at both ends of (0, inf), so
/// the walk always terminates.
fn w_root_beside_peak(prod: &Production, d: f64, x0: f64, upper: bool) -> Result<f64> {
    let f = |k: f64| prod.cap_w(k) - d;
    let mut bound = if upper { x0 * 1e3 } else { x0 * 1e-3 };
    let mut tries = 0;
    while f(bound) >= 0.0 && tries < 600 {
        bound = if upper { bound * 2.0 } else { bound * 0.5 };
        tries += 1;
    }
    let (lo, hi) = if upper { (x0, bound) } else { (bound, x0) };
    solve::bisect_log(f, lo, hi, 1e-14, 400, "wage-ratio crossing")
}

/// Fixed points of `g_b`, classified by where the wage-ratio peak sits
/// relative to `n(1+b)/b`.
pub fn fixed_points_gb(econ: &Economy, b: f64) -> Result<GbFixedPoints> {
    ensure_log(econ, "fixed_points_gb")?;
    if !(b > 0.0) {
        return Err(Error::InvalidParameter {
            name: "b",
            value: b,
            reason: "discount weight must be positive",
        });
    }
    let s = &econ.solver;
    let d = gb_threshold(econ.n, b);
    if econ.prod.rho() > 0.0 {
        // W falls strictly from +inf to 0; exactly one crossing.
        let root = solve::bisect_log(
            |k| econ.prod.cap_w(k) - d,
            s.k_min,
            s.k_max,
            1e-14,
            400,
            "branch fixed point",
        )?;
        return Ok(GbFixedPoints {
            case: GbCase::SingleCrossing,
            roots: vec![root],
            x0: None,
            max_w: None,
            threshold: d,
        });
    }
    let (x0, max_w) = econ.prod.x0_and_max_w()?;
    let report = |case: GbCase, roots: Vec<f64>| GbFixedPoints {
        case,
        roots,
        x0: Some(x0),
        max_w: Some(max_w),
        threshold: d,
    };
    if math::abs(max_w - d) < 1e-9 * max_w {
        Ok(report(GbCase::Tangent, vec![x0]))
    } else if max_w < d {
        Ok(report(GbCase::NoRoots, vec![]))
    } else {
        let lo = w_root_beside_peak(&econ.prod, d, x0, false)?;
        let hi = w_root_beside_peak(&econ.prod, d, x0, true)?;
        Ok(report(GbCase::TwoRoots, vec![lo, hi]))
    }
}

/// Sign-definite form of `dH/dk = 0`: negative left of the peak of `H`,
/// positive right of it.
fn h_peak_equation(prod: &Production, x: f64) -> f64 {
    let a = prod.intensity();
    let rho = prod.rho();
    let xr = math::powf(x, rho);
    let inner = a * xr + (1.0 - a);
    1.0 - a
        + rho * a * xr
        + rho * prod.tfp() * a * math::powf(x, rho - 1.0) * math::powf(inner, 1.0 / rho)
}

/// Peak of `H` and the roots of `H(k) = n` around it. Needs the pure CES
/// shape (`rho < 0`, no linear term), where `H` is hump-shaped.
pub fn h_fixed_points(econ: &Economy) -> Result<HFixedPoints> {
    let prod = &econ.prod;
    if !(prod.rho() < 0.0) || prod.linear() != 0.0 {
        return Err(Error::Unsupported {
            op: "h_fixed_points",
            reason: "peak analysis needs rho < 0 and no linear term",
        });
    }
    let s = &econ.solver;
    let x_star = solve::bisect_log(
        |x| h_peak_equation(prod, x),
        s.k_min,
        s.k_max,
        1e-14,
        400,
        "H peak",
    )?;
    let peak = prod.big_h(x_star);
    debug_assert!(prod.big_h(x_star * (1.0 - 1e-4)) <= peak);
    debug_assert!(prod.big_h(x_star * (1.0 + 1e-4)) <= peak);
    let pair = if math::abs(peak - econ.n) < 1e-9 * peak.max(1.0) {
        Some((x_star, x_star))
    } else if peak > econ.n {
        let f = |k: f64| prod.big_h(k) - econ.n;
        // walk outward until H drops below n, then bisect back toward x*
        let mut lo = x_star * 1e-3;
        let mut hi = x_star * 1e3;
        let mut tries = 0;
        while f(lo) >= 0.0 && tries < 600 {
            lo *= 0.5;
            tries += 1;
        }
        while f(hi) >= 0.0 && tries < 1200 {
            hi *= 2.0;
            tries += 1;
        }
        Some((
            solve::bisect_log(f, lo, x_star, 1e-14, 400, "lower H crossing")?,
            solve::bisect_log(f, x_star, hi, 1e-14, 400, "upper H crossing")?,
        ))
    } else {
        None
    };
    Ok(HFixedPoints { x_star, peak, pair })
}

/// The collapse constants. Suprema that are genuinely unbounded (`rho > 0`)
/// come back as `+inf`.
pub fn m_values(econ: &Economy) -> Result<MValues> {
    let s = &econ.solver;
    let f1 = euler_factor(econ.prefs.beta1());
    let f2 = euler_factor(econ.prefs.beta2());
    let (sup_w, sup_h);
    if econ.prod.rho() > 0.0 {
        sup_w = f64::INFINITY;
        sup_h = f64::INFINITY;
    } else {
        sup_w = econ.prod.x0_and_max_w()?.1;
        sup_h = solve::max_on_log_grid(
            |k| econ.prod.big_h(k),
            s.k_min,
            s.k_max,
            s.grid_points,
            1e-12,
        )
        .1;
    }
    let scaled = |factor: f64, sup: f64| if factor == 0.0 { 0.0 } else { factor * sup };
    Ok(MValues {
        m1: scaled(f1, sup_w),
        m2: scaled(f2, sup_w),
        m3: sup_h,
    })
}

/// Is `h(k) = k(1 + f'(k))` increasing on (0, inf)? For `rho < 0` the
/// minimum of `h'` has a closed form, evaluated both ways as a self-check.
pub fn check_h_increasing(prod: &Production) -> HIncreasingReport {
    let a = prod.intensity();
    let rho = prod.rho();
    if rho > 0.0 {
        // h' = 1 + B + f'(k) (1 - (1-rho)(1-a)/(a k^rho + 1-a)); the last
        // factor stays above rho > 0, so h' is positive outright.
        let mut min_slope = f64::INFINITY;
        for &k in &solve::log_grid(1e-9, 1e9, 513) {
            min_slope = min_slope.min(prod.h_prime(k));
        }
        return HIncreasingReport {
            increasing: true,
            criterion: min_slope,
            min_slope,
            x_c: None,
        };
    }
    let x_c = math::powf(-rho * (1.0 - a) / (a * (1.0 - rho)), 1.0 / rho);
    let criterion = 1.0 + prod.linear()
        - prod.tfp()
            * math::powf(a, 1.0 / rho)
            * math::powf(-rho, 3.0 - 1.0 / rho)
            * math::powf(1.0 - 2.0 * rho, 1.0 / rho - 2.0);
    let min_slope = prod.h_prime(x_c);
    HIncreasingReport {
        increasing: criterion >= 0.0,
        criterion,
        min_slope,
        x_c: Some(x_c),
    }
}

/// Grid test of the two premises behind one-step uniqueness: the composite
/// return-saving term falls and `h` rises, strictly, across the working
/// range.
pub fn check_uniqueness(econ: &Economy) -> UniquenessReport {
    let s = &econ.solver;
    let grid = solve::log_grid(s.k_min, s.k_max, s.grid_points);
    let u_prime = |x: f64| match econ.utility {
        UtilityKind::Log => 1.0 / x,
    };
    let mut returns_decreasing = true;
    let mut h_increasing = true;
    let mut witness: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64, f64)> = None; // (k, composite, h)
    for &k in &grid {
        let fp = econ.prod.f_prime(k);
        if !fp.is_finite() || fp <= 0.0 {
            // f' under/overflowed; the composite is undefined here
            continue;
        }
        let composite = fp * u_prime(econ.n * k * fp);
        let h = econ.prod.h(k);
        if let Some((pk, pc, ph)) = prev {
            let bad_c = composite >= pc;
            let bad_h = h <= ph;
            if bad_c {
                returns_decreasing = false;
            }
            if bad_h {
                h_increasing = false;
            }
            if (bad_c || bad_h) && witness.is_none() {
                witness = Some((pk, k));
            }
        }
        prev = Some((k, composite, h));
    }
    UniquenessReport {
        unique: returns_decreasing && h_increasing,
        returns_decreasing,
        h_increasing,
        witness,
    }
}

/// Compares attainable returns to the band edges.
pub fn check_regime_lock(econ: &Economy) -> RegimeLock {
    let lim = econ.prod.limits();
    let (r_low, r_high) = econ.prefs.thresholds();
    if lim.fp_zero < r_low {
        RegimeLock::Locked(Regime::LowReturn)
    } else if lim.fp_inf > r_high {
        RegimeLock::Locked(Regime::HighReturn)
    } else if lim.fp_inf >= r_low && lim.fp_zero <= r_high {
        RegimeLock::Locked(Regime::Band)
    } else {
        RegimeLock::Mixed
    }
}

/// The four sufficient conditions for global collapse, each a comparison of
/// return limits against the band edges plus an `M < n` bound.
pub fn check_collapse(econ: &Economy) -> Result<CollapseCheck> {
    let m = m_values(econ)?;
    let lim = econ.prod.limits();
    let (r_low, r_high) = econ.prefs.thresholds();
    let n = econ.n;
    let cases = [
        lim.fp_inf <= r_low && r_low < r_high && r_high <= lim.fp_zero && m.m1 < n && m.m3 < n,
        lim.fp_inf >= r_high && m.m2 < n,
        lim.fp_zero <= r_low && m.m1 < n,
        r_low <= lim.fp_inf && lim.fp_zero <= r_high && m.m3 < n,
    ];
    let uniqueness = check_uniqueness(econ).unique;
    let case = cases.iter().position(|&c| c).map(|i| i + 1);
    Ok(CollapseCheck {
        collapses: uniqueness && case.is_some(),
        case,
        cases,
        m,
        uniqueness,
    })
}

/// Numeric audit of the assumptions behind the branch-map trap analysis for
/// the weight `b`.
pub fn check_assum_poverty(econ: &Economy, b: f64) -> Result<PovertyAssumption> {
    ensure_log(econ, "check_assum_poverty")?;
    if !(econ.prod.rho() < 0.0) {
        return Err(Error::Unsupported {
            op: "check_assum_poverty",
            reason: "small-capital analysis needs rho < 0",
        });
    }
    if !(b > 0.0) {
        return Err(Error::InvalidParameter {
            name: "b",
            value: b,
            reason: "discount weight must be positive",
        });
    }
    let s = &econ.solver;
    let fixed_points_nonempty = !fixed_points_gb(econ, b)?.roots.is_empty();
    let b_hi = if b.is_infinite() { b } else { 1.01 * b };
    let ordered_in_b = solve::log_grid(1e-6, 1e6, 129).iter().all(|&k| {
        let w = econ.prod.omega(k) / econ.n;
        euler_factor(b_hi) * w >= euler_factor(b) * w
    });
    // g_b(k)/k ~ const * k^(-rho) -> 0 near the origin; test at the floor
    let ratio = euler_factor(b) * econ.prod.omega(s.k_min) / (econ.n * s.k_min);
    let small_x_vanishing = ratio < 1.0;
    Ok(PovertyAssumption {
        holds: fixed_points_nonempty && ordered_in_b && small_x_vanishing,
        fixed_points_nonempty,
        ordered_in_b,
        small_x_vanishing,
    })
}

fn explicit_branch_trap(
    econ: &Economy,
    b: f64,
    trap_name: &'static str,
    case: TrapCase,
) -> Result<TrapReport> {
    let fpts = fixed_points_gb(econ, b)?;
    let mut thresholds = Vec::new();
    if let Some(x0) = fpts.x0 {
        thresholds.push(NamedThreshold {
            name: "x0",
            value: x0,
            maximal: false,
        });
    }
    match fpts.case {
        GbCase::TwoRoots => {
            thresholds.insert(
                0,
                NamedThreshold {
                    name: trap_name,
                    value: fpts.roots[0],
                    maximal: true,
                },
            );
            thresholds.push(NamedThreshold {
                name: "x2",
                value: fpts.roots[1],
                maximal: false,
            });
            Ok(TrapReport {
                case,
                thresholds,
                verdict: TrapVerdict::TrapBelow {
                    threshold: fpts.roots[0],
                    maximal: true,
                },
            })
        }
        GbCase::Tangent => {
            thresholds.insert(
                0,
                NamedThreshold {
                    name: trap_name,
                    value: fpts.roots[0],
                    maximal: false,
                },
            );
            Ok(TrapReport {
                case,
                thresholds,
                verdict: TrapVerdict::TrapBelow {
                    threshold: fpts.roots[0],
                    maximal: false,
                },
            })
        }
        // the single branch map lies strictly below the diagonal
        GbCase::NoRoots => Ok(TrapReport {
            case: TrapCase::Collapse,
            thresholds,
            verdict: TrapVerdict::CollapseForAll,
        }),
        // rho > 0: capital is bounded away from zero, no trap
        GbCase::SingleCrossing => Ok(TrapReport {
            case,
            thresholds,
            verdict: TrapVerdict::NoTrap,
        }),
    }
}

fn band_trap(econ: &Economy) -> Result<TrapReport> {
    if !(econ.prod.rho() < 0.0) || econ.prod.linear() != 0.0 {
        // outside the hump-shaped-H analysis; no threshold construction
        return Ok(TrapReport {
            case: TrapCase::LockedBand,
            thresholds: vec![],
            verdict: TrapVerdict::NoTrap,
        });
    }
    let hf = h_fixed_points(econ)?;
    let mut thresholds = vec![NamedThreshold {
        name: "x_star",
        value: hf.x_star,
        maximal: false,
    }];
    match hf.pair {
        Some((k1, k2)) if k1 < k2 => {
            // the lower crossing is the proven maximum trap only when h is
            // monotone (otherwise the step is multivalued around it)
            let maximal = check_h_increasing(&econ.prod).increasing;
            thresholds.insert(
                0,
                NamedThreshold {
                    name: "kbar1",
                    value: k1,
                    maximal,
                },
            );
            thresholds.push(NamedThreshold {
                name: "kbar2",
                value: k2,
                maximal: false,
            });
            Ok(TrapReport {
                case: TrapCase::LockedBand,
                thresholds,
                verdict: TrapVerdict::TrapBelow {
                    threshold: k1,
                    maximal,
                },
            })
        }
        Some((k1, _)) => {
            thresholds.insert(
                0,
                NamedThreshold {
                    name: "kbar1",
                    value: k1,
                    maximal: false,
                },
            );
            Ok(TrapReport {
                case: TrapCase::LockedBand,
                thresholds,
                verdict: TrapVerdict::TrapBelow {
                    threshold: k1,
                    maximal: false,
                },
            })
        }
        None => {
            let collapse = check_collapse(econ)?;
            if collapse.collapses {
                Ok(TrapReport {
                    case: TrapCase::Collapse,
                    thresholds,
                    verdict: TrapVerdict::CollapseForAll,
                })
            } else {
                Ok(TrapReport {
                    case: TrapCase::LockedBand,
                    thresholds,
                    verdict: TrapVerdict::NoTrap,
                })
            }
        }
    }
}

fn mixed_trap(econ: &Economy) -> Result<TrapReport> {
    let mut thresholds = Vec::new();
    let fpts = fixed_points_gb(econ, econ.prefs.beta1())?;
    let x_b1 = match fpts.case {
        GbCase::TwoRoots | GbCase::Tangent => fpts.roots[0],
        _ => {
            return Ok(TrapReport {
                case: TrapCase::Mixed,
                thresholds,
                verdict: TrapVerdict::NoTrap,
            })
        }
    };
    thresholds.push(NamedThreshold {
        name: "x_beta1",
        value: x_b1,
        maximal: false,
    });
    if let Some(x0) = fpts.x0 {
        thresholds.push(NamedThreshold {
            name: "x0",
            value: x0,
            maximal: false,
        });
    }
    if fpts.case == GbCase::TwoRoots {
        thresholds.push(NamedThreshold {
            name: "x2",
            value: fpts.roots[1],
            maximal: false,
        });
    }
    let (_, r_high) = econ.prefs.thresholds();
    // wage bound and the capital where returns cross the upper band edge
    let l_bound = gb_threshold(econ.n, econ.prefs.beta1());
    let q = match invert_fprime(econ, r_high) {
        Ok(q) => q,
        Err(Error::OutOfRange { .. }) => {
            // upper band edge unattainable; only the branch bound survives
            return Ok(TrapReport {
                case: TrapCase::Mixed,
                thresholds,
                verdict: TrapVerdict::TrapBelow {
                    threshold: x_b1,
                    maximal: false,
                },
            });
        }
        Err(e) => return Err(e),
    };
    // two parenthesization readings of the wage-side bound; values above the
    // wage supremum bind nothing and come back as +inf
    let sup_w = econ.prod.omega(econ.solver.k_max);
    let raw_a = if l_bound * q >= sup_w {
        f64::INFINITY
    } else {
        invert_omega(econ, l_bound * q)?
    };
    let raw_b = if l_bound >= sup_w {
        f64::INFINITY
    } else {
        invert_omega(econ, l_bound)? * q
    };
    let reading_a = x_b1.min(raw_a);
    let reading_b = x_b1.min(raw_b);
    thresholds.push(NamedThreshold {
        name: "x_poverty_a_raw",
        value: raw_a,
        maximal: false,
    });
    thresholds.push(NamedThreshold {
        name: "x_poverty_b_raw",
        value: raw_b,
        maximal: false,
    });
    thresholds.push(NamedThreshold {
        name: "x_poverty_a",
        value: reading_a,
        maximal: false,
    });
    thresholds.push(NamedThreshold {
        name: "x_poverty_b",
        value: reading_b,
        maximal: false,
    });
    Ok(TrapReport {
        case: TrapCase::Mixed,
        thresholds,
        verdict: TrapVerdict::TrapBelow {
            threshold: reading_a.min(reading_b),
            maximal: false,
        },
    })
}

/// Poverty-trap thresholds, dispatched on wariness and the regime lock.
pub fn poverty_thresholds(econ: &Economy) -> Result<TrapReport> {
    ensure_log(econ, "poverty_thresholds")?;
    if let Wariness::Finite(g) = econ.prefs.wariness() {
        if g == 0.0 {
            return explicit_branch_trap(econ, econ.prefs.beta(), "x_beta", TrapCase::NoWariness);
        }
    }
    match check_regime_lock(econ) {
        RegimeLock::Locked(Regime::LowReturn) => {
            explicit_branch_trap(econ, econ.prefs.beta1(), "x_beta1", TrapCase::LockedLowReturn)
        }
        RegimeLock::Locked(Regime::HighReturn) => {
            explicit_branch_trap(econ, econ.prefs.beta2(), "x_beta2", TrapCase::LockedHighReturn)
        }
        RegimeLock::Locked(Regime::Band) => band_trap(econ),
        RegimeLock::Mixed => mixed_trap(econ),
    }
}

/// Simulates from 0.9x and 1.1x the reported trap threshold and checks the
/// claimed behaviour. `Ok(None)` when the report makes no simulable claim
/// (no trap, or a band threshold without monotone `h`, where the step map is
/// multivalued and no branch rule is implied).
pub fn verify_trap_semantics(
    econ: &Economy,
    report: &TrapReport,
    horizon: usize,
) -> Result<Option<SemanticsCheck>> {
    let TrapVerdict::TrapBelow { threshold, maximal } = report.verdict else {
        return Ok(None);
    };
    if report.case == TrapCase::LockedBand && !maximal {
        return Ok(None);
    }
    let below_start = 0.9 * threshold;
    let above_start = 1.1 * threshold;
    let below = dynamics::simulate(econ, below_start, BranchPolicy::NearestToCurrent, horizon)?.limit;
    let above = dynamics::simulate(econ, above_start, BranchPolicy::NearestToCurrent, horizon)?.limit;
    let consistent = if maximal {
        let upper = steady_states(econ)?
            .steady_states
            .iter()
            .rev()
            .find(|s| s.stability == Stability::Stable)
            .map(|s| s.k);
        match (below, above, upper) {
            (LimitClass::Collapse, LimitClass::ConvergesTo(k), Some(u)) => {
                math::abs(k - u) <= 1e-3 * u
            }
            _ => false,
        }
    } else {
        below == LimitClass::Collapse
    };
    Ok(Some(SemanticsCheck {
        below_start,
        below,
        above_start,
        above,
        consistent,
    }))
}

/// Derivative of the branch map the steady state lives on, by central
/// differences through the step enumeration (selecting the solution nearest
/// the steady state on each side).
fn local_slope(econ: &Economy, k_star: f64) -> Result<f64> {
    let d = 1e-5 * k_star;
    let branch = |k: f64| -> Result<f64> {
        dynamics::step_solutions(econ, k)?
            .iter()
            .map(|s| s.k_next)
            .min_by(|p, q| {
                math::abs(p - k_star)
                    .partial_cmp(&math::abs(q - k_star))
                    .unwrap()
            })
            .ok_or(Error::NoStep { k })
    };
    Ok((branch(k_star + d)? - branch(k_star - d)?) / (2.0 * d))
}

fn classify_stability(slope: f64) -> Stability {
    let mag = math::abs(slope);
    if mag < 1.0 - 1e-3 {
        Stability::Stable
    } else if mag > 1.0 + 1e-3 {
        Stability::Unstable
    } else {
        Stability::Boundary
    }
}

/// Solutions of the band steady-state equation `H(k) = n`, unfiltered by the
/// regime window.
fn band_steady_points(econ: &Economy) -> Result<Vec<f64>> {
    if econ.prod.rho() < 0.0 && econ.prod.linear() == 0.0 {
        return Ok(match h_fixed_points(econ)?.pair {
            Some((k1, k2)) if k1 < k2 => vec![k1, k2],
            Some((k1, _)) => vec![k1],
            None => vec![],
        });
    }
    let s = &econ.solver;
    let f = |k: f64| econ.prod.big_h(k) - econ.n;
    let grid = solve::log_grid(s.k_min, s.k_max, s.grid_points);
    let mut out = Vec::new();
    for (lo, hi) in solve::sign_change_brackets(f, &grid) {
        out.push(if lo == hi {
            lo
        } else {
            solve::bisect_log(f, lo, hi, 1e-14, 400, "band steady state")?
        });
    }
    Ok(out)
}

/// All steady states of the piecewise recursion: branch fixed points kept
/// when their regime inequality holds at the root, plus band crossings kept
/// when returns stay inside the band.
pub fn steady_states(econ: &Economy) -> Result<SteadyStateReport> {
    let (r_low, r_high) = econ.prefs.thresholds();
    let mut found: Vec<(f64, Regime)> = Vec::new();
    if let Wariness::Finite(_) = econ.prefs.wariness() {
        for &k in &fixed_points_gb(econ, econ.prefs.beta1())?.roots {
            if econ.prod.f_prime(k) < r_low {
                found.push((k, Regime::LowReturn));
            }
        }
        let b2 = econ.prefs.beta2();
        if b2 > 0.0 {
            for &k in &fixed_points_gb(econ, b2)?.roots {
                if econ.prod.f_prime(k) > r_high {
                    found.push((k, Regime::HighReturn));
                }
            }
        }
    }
    for k in band_steady_points(econ)? {
        let fp = econ.prod.f_prime(k);
        if fp >= r_low && fp <= r_high {
            found.push((k, Regime::Band));
        }
    }
    found.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    // merge boundary duplicates; the band label wins
    let mut i = 1;
    while i < found.len() {
        if math::abs(found[i].0 - found[i - 1].0)
            <= econ.solver.tol_fixed * found[i].0.max(1.0)
        {
            if found[i].1 == Regime::Band {
                found[i - 1] = found[i];
            }
            found.remove(i);
        } else {
            i += 1;
        }
    }
    let mut steady = Vec::with_capacity(found.len());
    for (k, regime) in found {
        let (slope, stability) = match local_slope(econ, k) {
            Ok(s) => (s, classify_stability(s)),
            Err(_) => (f64::NAN, Stability::Boundary),
        };
        steady.push(SteadyState {
            k,
            regime,
            stability,
            slope,
        });
    }
    Ok(SteadyStateReport {
        steady_states: steady,
        m_values: m_values(econ)?,
    })
}

/// Evaluates one named threshold; a threshold whose defining root structure
/// is absent (or degenerate) reports a case-boundary error.
pub fn evaluate_threshold(econ: &Economy, t: Threshold) -> Result<f64> {
    let boundary = || Error::CaseBoundary { what: t.name() };
    match t {
        Threshold::X1 | Threshold::X2 | Threshold::X0 => {
            let f = fixed_points_gb(econ, econ.prefs.beta())?;
            match t {
                Threshold::X0 => f.x0.ok_or_else(boundary),
                Threshold::X1 => match f.case {
                    GbCase::TwoRoots | GbCase::SingleCrossing => Ok(f.roots[0]),
                    _ => Err(boundary()),
                },
                _ => match f.case {
                    GbCase::TwoRoots => Ok(f.roots[1]),
                    _ => Err(boundary()),
                },
            }
        }
        Threshold::XBeta1 | Threshold::XBeta2 => {
            let b = if t == Threshold::XBeta1 {
                econ.prefs.beta1()
            } else {
                econ.prefs.beta2()
            };
            if !(b > 0.0) {
                return Err(boundary());
            }
            let f = fixed_points_gb(econ, b)?;
            match f.case {
                GbCase::TwoRoots | GbCase::SingleCrossing => Ok(f.roots[0]),
                _ => Err(boundary()),
            }
        }
        Threshold::KBar1 | Threshold::KBar2 | Threshold::XStar => {
            let hf = h_fixed_points(econ)?;
            match t {
                Threshold::XStar => Ok(hf.x_star),
                Threshold::KBar1 => match hf.pair {
                    Some((k1, k2)) if k1 < k2 => Ok(k1),
                    _ => Err(boundary()),
                },
                _ => match hf.pair {
                    Some((k1, k2)) if k1 < k2 => Ok(k2),
                    _ => Err(boundary()),
                },
            }
        }
        Threshold::XPovertyA | Threshold::XPovertyB => {
            let report = poverty_thresholds(econ)?;
            report
                .thresholds
                .iter()
                .find(|nt| nt.name == t.name())
                .map(|nt| nt.value)
                .ok_or_else(boundary)
        }
    }
}

/// Central finite difference of a threshold with respect to a parameter.
/// The step halves until two successive estimates agree to 1% or the floor
/// 1e-6 is reached; a perturbation that destroys the threshold on both
/// shrinking attempts is a case boundary.
pub fn comparative_fd(
    econ: &Economy,
    threshold: Threshold,
    param: Param,
    h0: f64,
) -> Result<FdEstimate> {
    if !(h0 > 0.0) || !h0.is_finite() {
        return Err(Error::InvalidParameter {
            name: "h0",
            value: h0,
            reason: "finite positive step required",
        });
    }
    let p0 = param.get(econ);
    if !p0.is_finite() {
        return Err(Error::Unsupported {
            op: "comparative_fd",
            reason: "base parameter is not finite",
        });
    }
    let eval = |p: f64| -> Result<f64> {
        evaluate_threshold(&param.with_value(econ, p)?, threshold)
    };
    let mut h = h0;
    let mut prev: Option<(f64, f64)> = None; // (estimate, its step)
    let mut best: Option<FdEstimate> = None;
    while h >= 1e-6 {
        match (eval(p0 + h), eval(p0 - h)) {
            (Ok(up), Ok(dn)) => {
                let d = (up - dn) / (2.0 * h);
                if let Some((pd, _)) = prev {
                    let gap = math::abs(d - pd);
                    let est = FdEstimate {
                        derivative: d,
                        step: h,
                        err: gap,
                        converged: gap <= 0.01 * math::abs(d),
                    };
                    best = Some(est);
                    if est.converged {
                        return Ok(est);
                    }
                }
                prev = Some((d, h));
            }
            _ => {
                prev = None;
            }
        }
        h *= 0.5;
    }
    if let Some(est) = best {
        return Ok(est);
    }
    if let Some((d, step)) = prev {
        return Ok(FdEstimate {
            derivative: d,
            step,
            err: f64::INFINITY,
            converged: false,
        });
    }
    Err(Error::CaseBoundary {
        what: threshold.name(),
    })
}

/// The boundary function whose interior zero `y_s` separates the two sign
/// regions of `d x1 / d rho`. Written so that the zero at `y = 1` is exact
/// in floating point.
pub fn b_function(a: f64, rho: f64, y: f64) -> f64 {
    let t = a * (y - 1.0);
    (1.0 + t) * math::ln_1p(t) - (1.0 - rho) * a * y * math::ln(y)
}

/// `(y_star, y_s)`: the unique critical point of the boundary function on
/// (0, 1) and its zero below that point.
pub fn b_roots(a: f64, rho: f64) -> Result<(f64, f64)> {
    // B'(y)/a = rho + ln(a y + 1 - a) - (1 - rho) ln y: +inf at 0+, rho < 0 at 1
    let y_star = solve::bisect(
        |y| rho + math::ln_1p(a * (y - 1.0)) - (1.0 - rho) * math::ln(y),
        1e-15,
        1.0,
        1e-15,
        200,
        "boundary critical point",
    )?;
    // B is negative at 0+, positive at its maximum y_star
    let y_s = solve::bisect(
        |y| b_function(a, rho, y),
        1e-15,
        y_star,
        1e-15,
        200,
        "boundary zero",
    )?;
    Ok((y_star, y_s))
}

/// Predicts the sign of `d x1 / d rho` from where `x1^rho` falls relative to
/// `(0, y_s) u (1, inf)`, and audits the prediction against a finite
/// difference.
pub fn sign_predict_x1_rho(econ: &Economy, x1: f64) -> Result<SignPrediction> {
    let rho = econ.prod.rho();
    if !(rho < 0.0) {
        return Err(Error::Unsupported {
            op: "sign_predict_x1_rho",
            reason: "sign regions are defined for rho < 0",
        });
    }
    if !(x1 > 0.0) || !x1.is_finite() {
        return Err(Error::Domain {
            op: "sign_predict_x1_rho.x1",
            value: x1,
        });
    }
    let a = econ.prod.intensity();
    let (_, y_s) = b_roots(a, rho)?;
    let v = math::powf(x1, rho);
    let on_boundary = math::abs(v - y_s) < 1e-12 || math::abs(v - 1.0) < 1e-12;
    let member = (v > 0.0 && v < y_s) || v > 1.0;
    // the same region expressed on x1 itself: y = x^rho reverses order
    let member_alt = x1 < 1.0 || x1 > math::powf(y_s, 1.0 / rho);
    let sign = if on_boundary {
        SignClass::Indeterminate
    } else if member {
        SignClass::Negative
    } else {
        SignClass::Positive
    };
    let fd = comparative_fd(
        econ,
        Threshold::X1,
        Param::Rho,
        (0.05 * math::abs(rho)).max(1e-3),
    )?;
    let noise = 10.0 * (fd.err + 1e-12);
    let agrees = if math::abs(fd.derivative) <= noise {
        None
    } else {
        Some(match sign {
            SignClass::Negative => fd.derivative < 0.0,
            SignClass::Positive => fd.derivative > 0.0,
            SignClass::Indeterminate => true,
        })
    };
    Ok(SignPrediction {
        y_s,
        sign,
        fd,
        agrees,
        equivalent_forms_agree: member == member_alt,
    })
}

/// `k` with `omega(k) = v`; `omega` rises across the working range.
pub fn invert_omega(econ: &Economy, v: f64) -> Result<f64> {
    let s = &econ.solver;
    if !v.is_finite() {
        return Err(Error::Domain {
            op: "invert_omega",
            value: v,
        });
    }
    let lo = econ.prod.omega(s.k_min);
    let hi = econ.prod.omega(s.k_max);
    if !(v >= lo && v <= hi) {
        return Err(Error::OutOfRange {
            what: "omega",
            value: v,
            lo,
            hi,
        });
    }
    solve::bisect_log(
        |k| econ.prod.omega(k) - v,
        s.k_min,
        s.k_max,
        1e-14,
        400,
        "omega inverse",
    )
}

/// `k` with `f'(k) = v`; `f'` falls across the working range.
pub fn invert_fprime(econ: &Economy, v: f64) -> Result<f64> {
    let s = &econ.solver;
    if !v.is_finite() || !(v > 0.0) {
        return Err(Error::Domain {
            op: "invert_fprime",
            value: v,
        });
    }
    let hi = econ.prod.f_prime(s.k_min);
    let lo = econ.prod.f_prime(s.k_max);
    if !(v >= lo && v <= hi) {
        return Err(Error::OutOfRange {
            what: "f'",
            value: v,
            lo,
            hi,
        });
    }
    solve::bisect_log(
        |k| econ.prod.f_prime(k) - v,
        s.k_min,
        s.k_max,
        1e-14,
        400,
        "return inverse",
    )
}
