//! Equilibrium dynamics: all admissible solutions of the implicit recursion
//! `n k_{t+1} = s(omega(k_t), f'(k_{t+1}))`, trajectory simulation, and
//! limit classification.
//!
//! Because the saving rule is piecewise in `f'(k_{t+1})`, a single `k_t` can
//! admit several next-period capitals, one per regime branch. The two
//! explicit branches have closed forms under log utility; the
//! equal-consumption band reduces to `n h(k) = omega(k_t)` with
//! `h(k) = k (1 + f'(k))`, which is enumerated by a log-grid sign scan plus
//! bisection (the band residual is smooth but not globally monotone for
//! `rho < 0`, so global scanning is the only safe enumeration).

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::math;
use crate::model::{Economy, Regime, Wariness};
use crate::solve;
use crate::{Error, Result};

/// One admissible next-period capital for a given `k_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StepSolution {
    pub k_next: f64,
    pub regime: Regime,
    /// `|n k_next - s(omega(k_t), f'(k_next))|`; bounded by
    /// `tol_root * max(1, n h(k_next))` (absolute near the origin, relative
    /// for large capital where f64 spacing dominates).
    pub residual: f64,
}

/// Selection rule applied when a step is multivalued. The underlying
/// equilibrium notion never selects, so the policy is explicit metadata on
/// every trajectory.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BranchPolicy {
    Lowest,
    Highest,
    NearestToCurrent,
    /// Prefer solutions whose regime matches the current state's label;
    /// apply the fallback within that subset, or to all solutions when the
    /// subset is empty.
    StayInRegime(Box<BranchPolicy>),
}

/// Limit behaviour of a simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LimitClass {
    /// Capital fell below `collapse_eps`.
    Collapse,
    /// Steps stayed within `tol_fixed` for `window` consecutive periods;
    /// the payload is the terminal mean.
    ConvergesTo(f64),
    /// The horizon ended first, or a step had no admissible solution for a
    /// wage that could still support one.
    Undetermined,
}

/// A point on a simulated path. `regime` labels the transition that reached
/// this state, i.e. the regime of `f'(k_t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PathPoint {
    pub t: usize,
    pub k: f64,
    pub regime: Regime,
}

/// A simulated equilibrium path with its classification and the selection
/// policy that produced it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Trajectory {
    pub path: Vec<PathPoint>,
    pub limit: LimitClass,
    pub policy: BranchPolicy,
}

/// Enumerates every admissible `k_{t+1}` for the given `k_t`, sorted
/// ascending and deduplicated within `tol_fixed`. Roots sitting exactly on a
/// regime boundary satisfy two branch equations at once and are reported
/// once, labeled with the band regime.
pub fn step_solutions(econ: &Economy, k_t: f64) -> Result<Vec<StepSolution>> {
    let settings = &econ.solver;
    if !(k_t > 0.0) || !k_t.is_finite() {
        return Err(Error::Domain {
            op: "step_solutions.k_t",
            value: k_t,
        });
    }
    let w = econ.prod.omega(k_t);
    if !w.is_finite() {
        return Err(Error::Domain {
            op: "step_solutions.omega",
            value: w,
        });
    }
    let (r_low, r_high) = econ.prefs.thresholds();
    let mut out: Vec<StepSolution> = Vec::new();

    // Explicit Euler branches. Under log utility the saving is independent
    // of the return, so each branch has a single closed-form candidate that
    // only needs its regime inequality checked. Under infinite wariness the
    // band is all of (0, inf) and both explicit branches are empty.
    if let Wariness::Finite(_) = econ.prefs.wariness() {
        let mut push_euler = |b: f64, regime: Regime| {
            let k_next = b * w / (econ.n * (1.0 + b));
            if !(k_next > 0.0) || !k_next.is_finite() {
                return;
            }
            let fp = econ.prod.f_prime(k_next);
            let admissible = match regime {
                Regime::LowReturn => fp < r_low,
                Regime::HighReturn => fp > r_high,
                Regime::Band => unreachable!(),
            };
            if admissible {
                let s = b * w / (1.0 + b);
                out.push(StepSolution {
                    k_next,
                    regime,
                    residual: math::abs(econ.n * k_next - s),
                });
            }
        };
        push_euler(econ.prefs.beta1(), Regime::LowReturn);
        push_euler(econ.prefs.beta2(), Regime::HighReturn);
    }

    // Band branch: n h(k) = omega(k_t), enumerated globally.
    let resid = |x: f64| econ.n * econ.prod.h(x) - w;
    let grid = solve::log_grid(settings.k_min, settings.k_max, settings.grid_points);
    for (lo, hi) in solve::sign_change_brackets(resid, &grid) {
        let root = if lo == hi {
            lo
        } else {
            solve::bisect_log(resid, lo, hi, 1e-15, 300, "band step")?
        };
        let fp = econ.prod.f_prime(root);
        if fp >= r_low && fp <= r_high {
            let s = w / (1.0 + fp);
            out.push(StepSolution {
                k_next: root,
                regime: Regime::Band,
                residual: math::abs(econ.n * root - s),
            });
        }
    }

    out.sort_by(|x, y| x.k_next.partial_cmp(&y.k_next).unwrap());
    dedup_solutions(&mut out, settings.tol_fixed);
    Ok(out)
}

/// Merges solutions closer than `tol * max(1, k)`. A cross-regime pair is a
/// boundary root satisfying two branch equations; the merged entry carries
/// the band label.
fn dedup_solutions(sols: &mut Vec<StepSolution>, tol: f64) {
    let mut i = 1;
    while i < sols.len() {
        let (a, b) = (sols[i - 1], sols[i]);
        if math::abs(b.k_next - a.k_next) <= tol * b.k_next.max(1.0) {
            let merged = if a.regime == b.regime {
                if a.residual <= b.residual {
                    a
                } else {
                    b
                }
            } else if a.regime == Regime::Band {
                a
            } else if b.regime == Regime::Band {
                b
            } else {
                // Low and High cannot coincide (their inequalities are
                // strict on opposite sides of a nonempty band).
                a
            };
            sols[i - 1] = merged;
            sols.remove(i);
        } else {
            i += 1;
        }
    }
}

/// The single-valued forward map `G`. Errors when the step is empty or
/// multivalued; use [`step_solutions`] plus a [`BranchPolicy`] in that case.
pub fn forward_map(econ: &Economy, k_t: f64) -> Result<f64> {
    let sols = step_solutions(econ, k_t)?;
    match sols.len() {
        0 => Err(Error::NoStep { k: k_t }),
        1 => Ok(sols[0].k_next),
        count => Err(Error::MultipleSolutions { count }),
    }
}

fn choose<'a>(
    econ: &Economy,
    sols: &'a [StepSolution],
    current: f64,
    policy: &BranchPolicy,
) -> &'a StepSolution {
    match policy {
        BranchPolicy::Lowest => &sols[0],
        BranchPolicy::Highest => &sols[sols.len() - 1],
        BranchPolicy::NearestToCurrent => {
            // ties break toward the lowest because the list is sorted
            let mut best = &sols[0];
            for s in &sols[1..] {
                if math::abs(s.k_next - current) < math::abs(best.k_next - current) {
                    best = s;
                }
            }
            best
        }
        BranchPolicy::StayInRegime(fallback) => {
            let here = econ.prefs.regime_of(econ.prod.f_prime(current));
            let same: Vec<StepSolution> =
                sols.iter().copied().filter(|s| s.regime == here).collect();
            if same.is_empty() {
                choose(econ, sols, current, fallback)
            } else {
                let picked = *choose(econ, &same, current, fallback);
                sols.iter().find(|s| **s == picked).unwrap()
            }
        }
    }
}

/// Iterates the step map from `k0` for at most `t_max` periods, classifying
/// the limit en route. When a step has no solution because the wage can no
/// longer support a balanced capital inside the working range (the next
/// capital would sit below `k_min`), the path falls through the floor: a
/// terminal zero state is appended and the run classifies as collapse.
pub fn simulate(econ: &Economy, k0: f64, policy: BranchPolicy, t_max: usize) -> Result<Trajectory> {
    let settings = &econ.solver;
    if !(k0 > 0.0) || !k0.is_finite() {
        return Err(Error::Domain {
            op: "simulate.k0",
            value: k0,
        });
    }
    if t_max > settings.max_iter {
        return Err(Error::InvalidParameter {
            name: "T",
            value: t_max as f64,
            reason: "horizon exceeds solver max_iter",
        });
    }
    let mut path: Vec<PathPoint> = Vec::new();
    let mut limit = LimitClass::Undetermined;
    let mut k = k0;
    let mut streak = 0usize;
    for t in 0..=t_max {
        path.push(PathPoint {
            t,
            k,
            regime: econ.prefs.regime_of(econ.prod.f_prime(k)),
        });
        if k < settings.collapse_eps {
            limit = LimitClass::Collapse;
            break;
        }
        if streak >= settings.window {
            limit = LimitClass::ConvergesTo(terminal_mean(&path, settings.window));
            break;
        }
        if t == t_max {
            break;
        }
        let sols = step_solutions(econ, k)?;
        if sols.is_empty() {
            // every band solution satisfies n h(k') = omega(k); a wage below
            // n h(k_min) pushes k' under the scan floor, which is collapse
            if econ.prod.omega(k) <= econ.n * econ.prod.h(settings.k_min) {
                path.push(PathPoint {
                    t: t + 1,
                    k: 0.0,
                    regime: econ.prefs.regime_of(econ.prod.f_prime(0.0)),
                });
                limit = LimitClass::Collapse;
            }
            break;
        }
        let next = choose(econ, &sols, k, &policy).k_next;
        streak = if math::abs(next - k) < settings.tol_fixed {
            streak + 1
        } else {
            0
        };
        k = next;
    }
    Ok(Trajectory { path, limit, policy })
}

fn terminal_mean(path: &[PathPoint], window: usize) -> f64 {
    let take = (window + 1).min(path.len());
    let tail = &path[path.len() - take..];
    tail.iter().map(|p| p.k).sum::<f64>() / take as f64
}

/// Replays the classification rule on a bare capital path: collapse once the
/// final value sits below `collapse_eps`; convergence when the last `window`
/// consecutive steps each moved less than `tol_fixed` (the reported point is
/// the mean of the terminal window); otherwise undetermined.
pub fn classify_limit(ks: &[f64], settings: &crate::model::SolverSettings) -> LimitClass {
    let Some(&last) = ks.last() else {
        return LimitClass::Undetermined;
    };
    if last < settings.collapse_eps {
        return LimitClass::Collapse;
    }
    let mut streak = 0usize;
    for w in ks.windows(2).rev() {
        if math::abs(w[1] - w[0]) < settings.tol_fixed {
            streak += 1;
            if streak >= settings.window {
                break;
            }
        } else {
            break;
        }
    }
    if streak >= settings.window {
        let take = (settings.window + 1).min(ks.len());
        let tail = &ks[ks.len() - take..];
        LimitClass::ConvergesTo(tail.iter().sum::<f64>() / take as f64)
    } else {
        LimitClass::Undetermined
    }
}
