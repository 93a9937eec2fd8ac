//! Scalar root finding and unimodal maximization on positive domains.
//!
//! Brackets are produced by the caller, typically by scanning a log-spaced
//! grid, and refined here. Roots and maxima of the model's functions live on
//! (0, inf) and their locations span many decades, so refinement happens in
//! log space: tolerances are relative in the argument.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Golden ratio conjugate, the interval reduction factor per step.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Bisection on `[lo, hi]`; requires a sign change (or an exact zero at an
/// endpoint). `tol` bounds the final interval width.
pub fn bisect<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
    what: &'static str,
) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !opposite_signs(flo, fhi) {
        return Err(Error::Bracket { what, lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    let neg_low = flo < 0.0;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        // second clause: interval has collapsed to adjacent floats
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == neg_low {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection in log space on `(0, inf)`: the returned root carries relative
/// accuracy `rel_tol` regardless of its magnitude.
pub fn bisect_log<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    max_iter: usize,
    what: &'static str,
) -> Result<f64> {
    debug_assert!(lo > 0.0 && hi > lo);
    let t = bisect(
        |t| f(math::exp(t)),
        math::ln(lo),
        math::ln(hi),
        rel_tol,
        max_iter,
        what,
    )?;
    Ok(math::exp(t))
}

fn opposite_signs(x: f64, y: f64) -> bool {
    (x < 0.0 && y > 0.0) || (x > 0.0 && y < 0.0)
}

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)`; `tol` bounds the final interval width.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let (mut lo, mut hi) = (lo, hi);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let xm = 0.5 * (lo + hi);
    (xm, f(xm))
}

/// Golden-section maximization in log space; `rel_tol` is relative in x.
pub fn golden_max_log<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> (f64, f64) {
    debug_assert!(lo > 0.0 && hi > lo);
    let (t, fx) = golden_max(
        |t| f(math::exp(t)),
        math::ln(lo),
        math::ln(hi),
        rel_tol,
        max_iter,
    );
    (math::exp(t), fx)
}

/// `n` log-spaced points on `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(lo > 0.0 && hi > lo && n >= 2);
    let (llo, lhi) = (math::ln(lo), math::ln(hi));
    let step = (lhi - llo) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            // pin both endpoints: exp(ln x) need not round-trip exactly
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                math::exp(llo + step * i as f64)
            }
        })
        .collect()
}

/// Brackets `(x_i, x_{i+1})` over which `f` changes sign on the given grid.
/// An exact zero at a grid point yields a degenerate bracket. Non-finite
/// values participate through their sign only when infinite; NaN intervals
/// are skipped.
pub fn sign_change_brackets<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in grid {
        let fx = f(x);
        if fx.is_nan() {
            prev = None;
            continue;
        }
        if fx == 0.0 {
            out.push((x, x));
            prev = Some((x, fx));
            continue;
        }
        if let Some((px, pfx)) = prev {
            if opposite_signs(pfx, fx) {
                out.push((px, x));
            }
        }
        prev = Some((x, fx));
    }
    out
}

/// Argmax of `f` over a log grid on `[lo, hi]`, refined by golden section on
/// the two neighbouring cells. Returns `(argmax, max)`.
pub fn max_on_log_grid<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize, rel_tol: f64) -> (f64, f64) {
    let grid = log_grid(lo, hi, n);
    let mut best = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    let glo = grid[best.saturating_sub(1)];
    let ghi = grid[(best + 1).min(grid.len() - 1)];
    if glo >= ghi {
        return (grid[best], best_val);
    }
    golden_max_log(f, glo, ghi, rel_tol, 200)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::abs;

    #[test]
    fn bisect_finds_cubic_root() {
        let r = bisect(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, 200, "cubic").unwrap();
        assert!(abs(r - 1.259_921_049_894_873_2) < 1e-12);
    }

    #[test]
    fn bisect_rejects_unbracketed_interval() {
        let e = bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100, "no-root").unwrap_err();
        assert!(matches!(e, Error::Bracket { .. }));
    }

    #[test]
    fn bisect_log_keeps_relative_accuracy_for_tiny_roots() {
        // Root at 1e-9, far below any absolute tolerance a linear method
        // would reach from a wide bracket.
        let target = 1e-9;
        let r = bisect_log(|x| x - target, 1e-12, 1e3, 1e-14, 400, "tiny").unwrap();
        assert!(abs(r - target) / target < 1e-12);
    }

    #[test]
    fn golden_max_locates_parabola_peak() {
        let (x, v) = golden_max(|x| -(x - 0.7) * (x - 0.7) + 3.0, 0.0, 2.0, 1e-12, 300);
        // argmax of a smooth maximum is sqrt(eps)-limited; the value is not
        assert!(abs(x - 0.7) < 1e-6);
        assert!(abs(v - 3.0) < 1e-15);
    }

    #[test]
    fn log_grid_is_monotone_with_exact_endpoints() {
        let g = log_grid(1e-6, 1e6, 257);
        assert_eq!(g[0], 1e-6);
        assert_eq!(*g.last().unwrap(), 1e6);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sign_change_brackets_finds_all_three_sine_roots() {
        let grid: Vec<f64> = (0..1000).map(|i| 0.5 + 10.0 * i as f64 / 999.0).collect();
        let br = sign_change_brackets(|x| libm::sin(x), &grid);
        // roots pi, 2pi, 3pi inside (0.5, 10.5)
        assert_eq!(br.len(), 3);
    }

    #[test]
    fn max_on_log_grid_refines_across_decades() {
        // Peak of x * exp(-x) at x = 1 inside a 24-decade window.
        let (x, v) = max_on_log_grid(|x| x * libm::exp(-x), 1e-12, 1e12, 4096, 1e-12);
        assert!(abs(x - 1.0) < 1e-6);
        assert!(abs(v - libm::exp(-1.0)) < 1e-14);
    }
}
