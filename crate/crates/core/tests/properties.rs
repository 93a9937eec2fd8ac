//! Randomized invariants over the whole model surface: Euler residuals,
//! continuity of the saving rule at the band edges, wariness monotonicity,
//! closed forms against dense grids, step enumeration against an exhaustive
//! rescan, ordering chains among named thresholds, and replay of the limit
//! classifier. Every test draws from a fixed seed, so failures reproduce.

use core::cmp::Ordering;

use olg_core::analysis::{self, GbCase, Threshold, TrapCase, TrapVerdict};
use olg_core::dynamics::{self, BranchPolicy, LimitClass};
use olg_core::household::{self, LogUtility, MarginalUtility};
use olg_core::model::{Economy, Preferences, Production, Regime, Wariness};
use olg_core::solve;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn econ(n: f64, tfp: f64, a: f64, rho: f64, beta: f64, wariness: Wariness) -> Economy {
    let prefs = Preferences::new(beta, wariness).unwrap();
    let prod = Production::new(tfp, a, rho, 0.0).unwrap();
    Economy::new(prefs, prod, n).unwrap()
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1e-300)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.gen();
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}

/// Log marginal utility with the closed form hidden, forcing the solver.
struct OpaqueLog;

impl MarginalUtility for OpaqueLog {
    fn u_prime(&self, c: f64) -> f64 {
        1.0 / c
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn euler_saving_zeroes_its_equation(
        b in 0.05f64..20.0,
        w in 1e-3f64..1e3,
        r in 1e-3f64..1e3,
    ) {
        let s = household::euler_saving(&LogUtility, b, w, r, 1e-12).unwrap();
        prop_assert!(s > 0.0 && s < w);
        let lhs = 1.0 / (w - s);
        let rhs = b * r * (1.0 / (r * s));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs);
        // the generic bisection path must land on the same saving
        let s2 = household::euler_saving(&OpaqueLog, b, w, r, 1e-9).unwrap();
        prop_assert!(rel(s2, s) < 1e-9);
    }

    #[test]
    fn saving_is_continuous_at_the_band_edges(
        beta in 0.1f64..0.99,
        gamma in 0.01f64..10.0,
        w in 1e-2f64..1e2,
    ) {
        let p = Preferences::new(beta, Wariness::Finite(gamma)).unwrap();
        for edge in [p.thresholds().0, p.thresholds().1] {
            let inside = household::piecewise_saving(&p, &LogUtility, w, edge, 1e-12).unwrap();
            prop_assert_eq!(inside.regime, Regime::Band);
            let below = household::piecewise_saving(&p, &LogUtility, w, edge * (1.0 - 1e-9), 1e-12).unwrap();
            let above = household::piecewise_saving(&p, &LogUtility, w, edge * (1.0 + 1e-9), 1e-12).unwrap();
            prop_assert!((below.s - inside.s).abs() <= 1e-9 * w);
            prop_assert!((above.s - inside.s).abs() <= 1e-9 * w);
        }
    }

    // for returns below 1/beta more wariness raises saving (the patient
    // branch), above 1/beta it lowers saving (the impatient branch); the
    // band itself is gamma-independent
    #[test]
    fn wariness_moves_saving_toward_equal_consumption(
        beta in 0.1f64..0.99,
        g1 in 0.0f64..5.0,
        dg in 0.0f64..5.0,
        w in 1e-2f64..1e2,
        r in 1e-2f64..1e2,
        hi_inf in proptest::bool::ANY,
    ) {
        let lo = Preferences::new(beta, Wariness::Finite(g1)).unwrap();
        let hi = if hi_inf {
            Preferences::new(beta, Wariness::Infinite).unwrap()
        } else {
            Preferences::new(beta, Wariness::Finite(g1 + dg)).unwrap()
        };
        let ord = household::saving_vs_wariness(&lo, &hi, &LogUtility, w, r, 1e-12).unwrap();
        if r < 1.0 / beta {
            prop_assert!(ord != Ordering::Greater);
        } else if r > 1.0 / beta {
            prop_assert!(ord != Ordering::Less);
        }
    }
}

#[test]
fn wage_ratio_peak_matches_a_dense_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let tfp = log_uniform(&mut rng, 0.1, 10.0);
        let a = rng.gen_range(0.05..0.95);
        let rho = -log_uniform(&mut rng, 0.1, 8.0);
        let p = Production::new(tfp, a, rho, 0.0).unwrap();
        let (x0, max_w) = p.x0_and_max_w().unwrap();
        let (xg, vg) = solve::max_on_log_grid(|k| p.cap_w(k), x0 * 1e-3, x0 * 1e3, 4001, 1e-12);
        assert!(
            rel(vg, max_w) < 1e-9,
            "peak value a={a} rho={rho}: grid {vg} vs closed {max_w}"
        );
        assert!(
            rel(xg, x0) < 1e-6,
            "peak location a={a} rho={rho}: grid {xg} vs closed {x0}"
        );
        assert!(vg <= max_w * (1.0 + 1e-12));
    }
}

/// Independent re-derivation of every admissible next capital: closed forms
/// for the two explicit branches, a 100k-cell sign scan for the band.
fn rescan_step(e: &Economy, k_t: f64) -> Vec<f64> {
    let w = e.prod.omega(k_t);
    let (r_low, r_high) = e.prefs.thresholds();
    let mut out: Vec<f64> = Vec::new();
    let b1 = e.prefs.beta1();
    if b1.is_finite() {
        let k = b1 / (1.0 + b1) * w / e.n;
        if k > 0.0 && e.prod.f_prime(k) < r_low {
            out.push(k);
        }
    }
    let b2 = e.prefs.beta2();
    if b2 > 0.0 {
        let k = b2 / (1.0 + b2) * w / e.n;
        if k > 0.0 && e.prod.f_prime(k) > r_high {
            out.push(k);
        }
    }
    let resid = |x: f64| e.n * e.prod.h(x) - w;
    for (lo, hi) in solve::sign_change_brackets(&resid, &solve::log_grid(1e-12, 1e12, 100_001)) {
        let root = if lo == hi {
            lo
        } else {
            solve::bisect_log(&resid, lo, hi, 1e-14, 200, "band rescan").unwrap()
        };
        let fp = e.prod.f_prime(root);
        if fp >= r_low && fp <= r_high {
            out.push(root);
        }
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-8 * y.abs().max(1.0));
    out
}

#[test]
fn step_enumeration_matches_an_exhaustive_rescan() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut nonempty = 0;
    for _ in 0..50 {
        let tfp = log_uniform(&mut rng, 0.5, 8.0);
        let a = rng.gen_range(0.1..0.9);
        let rho = -log_uniform(&mut rng, 0.2, 4.0);
        let beta = rng.gen_range(0.3..0.95);
        let n = rng.gen_range(0.8..1.5);
        let wariness = match rng.gen_range(0..3) {
            0 => Wariness::Finite(0.0),
            1 => Wariness::Finite(log_uniform(&mut rng, 0.05, 3.0)),
            _ => Wariness::Infinite,
        };
        let e = econ(n, tfp, a, rho, beta, wariness);
        for _ in 0..4 {
            let k_t = log_uniform(&mut rng, 1e-4, 1e4);
            let got = dynamics::step_solutions(&e, k_t).unwrap();
            let expect = rescan_step(&e, k_t);
            assert_eq!(
                got.len(),
                expect.len(),
                "count mismatch at k_t={k_t} (a={a} rho={rho} beta={beta} n={n}): {got:?} vs {expect:?}"
            );
            for (g, x) in got.iter().zip(&expect) {
                assert!(
                    rel(g.k_next, *x) < 1e-6,
                    "root mismatch at k_t={k_t}: {} vs {x}",
                    g.k_next
                );
            }
            nonempty += usize::from(!got.is_empty());
        }
    }
    assert!(nonempty >= 100, "only {nonempty} non-empty steps drawn");
}

#[test]
fn threshold_orderings_hold_across_random_economies() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let mut two_roots = 0;
    let mut pairs = 0;
    for _ in 0..200 {
        let tfp = log_uniform(&mut rng, 0.5, 12.0);
        let a = rng.gen_range(0.1..0.9);
        let rho = -log_uniform(&mut rng, 0.2, 5.0);
        let beta = rng.gen_range(0.3..0.95);
        let n = rng.gen_range(0.8..1.4);
        let e = econ(n, tfp, a, rho, beta, Wariness::Finite(0.0));
        let gb = analysis::fixed_points_gb(&e, beta).unwrap();
        if gb.case == GbCase::TwoRoots {
            two_roots += 1;
            let x0 = gb.x0.unwrap();
            assert!(gb.roots[0] < x0 && x0 < gb.roots[1]);
            for &root in &gb.roots {
                assert!(rel(e.prod.cap_w(root), gb.threshold) < 1e-9);
            }
        }
        let hf = analysis::h_fixed_points(&e).unwrap();
        if let Some((k1, k2)) = hf.pair {
            pairs += 1;
            assert!(k1 <= hf.x_star && hf.x_star <= k2);
            assert!(rel(e.prod.big_h(k1), e.n) < 1e-8);
            assert!(rel(e.prod.big_h(k2), e.n) < 1e-8);
            assert!(hf.peak >= e.n);
        }
    }
    assert!(two_roots >= 30, "only {two_roots} two-root draws");
    assert!(pairs >= 30, "only {pairs} crossing pairs drawn");
}

#[test]
fn branch_fixed_points_are_monotone_in_the_discount_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut chains = 0;
    for _ in 0..40 {
        let tfp = log_uniform(&mut rng, 2.0, 12.0);
        let a = rng.gen_range(0.1..0.9);
        let rho = -log_uniform(&mut rng, 0.2, 4.0);
        let n = rng.gen_range(0.8..1.4);
        let e = econ(n, tfp, a, rho, 0.7, Wariness::Finite(0.0));
        let mut prev: Option<(f64, f64)> = None;
        let mut seen = 0;
        for b in [0.4, 0.7, 1.0, 1.5, 2.5, 4.0, 8.0] {
            let gb = analysis::fixed_points_gb(&e, b).unwrap();
            if gb.roots.len() == 2 {
                let (x1, x2) = (gb.roots[0], gb.roots[1]);
                if let Some((p1, p2)) = prev {
                    assert!(x1 <= p1 * (1.0 + 1e-12), "lower root rose with b");
                    assert!(x2 >= p2 * (1.0 - 1e-12), "upper root fell with b");
                }
                prev = Some((x1, x2));
                seen += 1;
            } else {
                // the crossing level n(1+b)/b falls in b, so roots persist
                // once they appear
                assert!(prev.is_none() || gb.case == GbCase::Tangent);
            }
        }
        if seen >= 2 {
            chains += 1;
        }
    }
    assert!(chains >= 15, "only {chains} usable chains");
}

#[test]
fn mixed_trap_bound_falls_as_wariness_rises() {
    let mut prev = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for g in [0.3, 0.45, 0.54, 0.7, 0.9, 1.2] {
        let e = econ(1.32, 3.3, 0.3, -0.9, 0.7, Wariness::Finite(g));
        let report = analysis::poverty_thresholds(&e).unwrap();
        assert_eq!(report.case, TrapCase::Mixed);
        let a = analysis::evaluate_threshold(&e, Threshold::XPovertyA).unwrap();
        let b = analysis::evaluate_threshold(&e, Threshold::XPovertyB).unwrap();
        let x_b1 = analysis::evaluate_threshold(&e, Threshold::XBeta1).unwrap();
        assert!(a <= prev.0 * (1.0 + 1e-12), "reading a rose at gamma={g}");
        assert!(b <= prev.1 * (1.0 + 1e-12), "reading b rose at gamma={g}");
        assert!(a <= x_b1 && b <= x_b1);
        let TrapVerdict::TrapBelow { threshold, maximal } = report.verdict else {
            panic!("expected a trap verdict at gamma={g}");
        };
        assert!(!maximal);
        assert!(rel(threshold, a.min(b)) < 1e-12);
        assert!(threshold <= prev.2 * (1.0 + 1e-12));
        prev = (a, b, threshold);
    }
}

#[test]
fn boundary_function_has_the_two_sign_regions() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..60 {
        let a = rng.gen_range(0.05..0.95);
        let rho = -log_uniform(&mut rng, 0.05, 6.0);
        assert_eq!(analysis::b_function(a, rho, 1.0), 0.0);
        let (y_star, y_s) = analysis::b_roots(a, rho).unwrap();
        assert!(0.0 < y_s && y_s < y_star && y_star < 1.0);
        assert!(analysis::b_function(a, rho, y_s).abs() < 1e-12);
        // negative below y_s, positive between y_s and 1, negative above 1
        for i in 1..=50 {
            let y = y_s * i as f64 / 51.0;
            assert!(analysis::b_function(a, rho, y) < 0.0, "a={a} rho={rho} y={y}");
        }
        for i in 1..=49 {
            let y = y_s + (1.0 - y_s) * i as f64 / 50.0;
            assert!(analysis::b_function(a, rho, y) > 0.0, "a={a} rho={rho} y={y}");
        }
        for y in [1.0 + 1e-6, 1.5, 3.0, 10.0, 1e3] {
            assert!(analysis::b_function(a, rho, y) < 0.0, "a={a} rho={rho} y={y}");
        }
    }
}

#[test]
fn h_prime_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    for _ in 0..100 {
        let tfp = log_uniform(&mut rng, 0.2, 10.0);
        let a = rng.gen_range(0.05..0.95);
        let rho = if rng.gen::<bool>() {
            rng.gen_range(0.05..0.95)
        } else {
            -log_uniform(&mut rng, 0.1, 5.0)
        };
        let lin = if rng.gen::<bool>() { rng.gen_range(0.0..0.5) } else { 0.0 };
        let p = Production::new(tfp, a, rho, lin).unwrap();
        let k = log_uniform(&mut rng, 1e-2, 1e2);
        let dk = 1e-5 * k;
        let fd = (p.h(k + dk) - p.h(k - dk)) / (2.0 * dk);
        let hp = p.h_prime(k);
        assert!(
            (fd - hp).abs() <= 1e-5 * hp.abs().max(1.0),
            "a={a} rho={rho} lin={lin} k={k}: fd {fd} vs closed {hp}"
        );
    }
}

#[test]
fn unique_step_map_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    let mut passed = 0;
    for _ in 0..60 {
        let tfp = log_uniform(&mut rng, 0.5, 8.0);
        let a = rng.gen_range(0.1..0.9);
        let rho = if rng.gen::<bool>() {
            rng.gen_range(0.1..0.9)
        } else {
            -log_uniform(&mut rng, 0.1, 2.0)
        };
        let beta = rng.gen_range(0.3..0.95);
        let gamma = rng.gen_range(0.0..2.0);
        let n = rng.gen_range(0.8..1.4);
        let e = econ(n, tfp, a, rho, beta, Wariness::Finite(gamma));
        if !analysis::check_uniqueness(&e).unique {
            continue;
        }
        passed += 1;
        let mut prev = 0.0f64;
        for i in 0..24 {
            let k = 1e-2 * (1e4f64).powf(i as f64 / 23.0);
            let next = dynamics::forward_map(&e, k).unwrap();
            assert!(
                next > prev * (1.0 - 1e-10),
                "step map fell at k={k} (a={a} rho={rho} beta={beta} gamma={gamma} n={n})"
            );
            prev = next;
        }
    }
    assert!(passed >= 20, "only {passed} unique economies drawn");
}

#[test]
fn infinite_wariness_is_the_equal_consumption_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(83);
    let beta = 0.7;
    let inf = Preferences::new(beta, Wariness::Infinite).unwrap();
    let big = Preferences::new(beta, Wariness::Finite(1e9)).unwrap();
    let (r_low, r_high) = inf.thresholds();
    assert_eq!(r_low, 0.0);
    assert!(r_high.is_infinite());
    for _ in 0..200 {
        let w = log_uniform(&mut rng, 1e-3, 1e3);
        let r = log_uniform(&mut rng, 1e-3, 1e3);
        let s = household::piecewise_saving(&inf, &LogUtility, w, r, 1e-12).unwrap();
        assert_eq!(s.regime, Regime::Band);
        assert_eq!(s.s, w / (1.0 + r));
        let s2 = household::piecewise_saving(&big, &LogUtility, w, r, 1e-12).unwrap();
        assert_eq!(s2.regime, Regime::Band);
        assert_eq!(s2.s, s.s);
    }
    // the branch map degenerates to omega/n and every step stays on the band
    let e = econ(1.1, 3.0, 0.3, -3.0, beta, Wariness::Infinite);
    for _ in 0..50 {
        let k = log_uniform(&mut rng, 1e-3, 1e3);
        let g = analysis::g_beta_map(&e, f64::INFINITY, k).unwrap();
        assert_eq!(g, e.prod.omega(k) / e.n);
        for s in dynamics::step_solutions(&e, k).unwrap() {
            assert_eq!(s.regime, Regime::Band);
        }
    }
}

#[test]
fn trajectory_classification_replays_from_the_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    for _ in 0..40 {
        let tfp = log_uniform(&mut rng, 0.5, 8.0);
        let a = rng.gen_range(0.1..0.9);
        let rho = -log_uniform(&mut rng, 0.2, 3.0);
        let beta = rng.gen_range(0.3..0.95);
        let gamma = rng.gen_range(0.0..2.0);
        let n = rng.gen_range(0.8..1.4);
        let e = econ(n, tfp, a, rho, beta, Wariness::Finite(gamma));
        let k0 = log_uniform(&mut rng, 1e-3, 1e3);
        let policy = match rng.gen_range(0..3) {
            0 => BranchPolicy::Lowest,
            1 => BranchPolicy::Highest,
            _ => BranchPolicy::NearestToCurrent,
        };
        let t = dynamics::simulate(&e, k0, policy, 300).unwrap();
        let ks: Vec<f64> = t.path.iter().map(|p| p.k).collect();
        let replay = dynamics::classify_limit(&ks, &e.solver);
        match (t.limit, replay) {
            (LimitClass::ConvergesTo(x), LimitClass::ConvergesTo(y)) => {
                assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
            (got, rep) => assert_eq!(got, rep, "k0={k0}"),
        }
    }
}

#[test]
fn steady_states_are_fixed_points_of_the_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut states = 0;
    for _ in 0..40 {
        let tfp = log_uniform(&mut rng, 1.0, 10.0);
        let a = rng.gen_range(0.1..0.9);
        let rho = -log_uniform(&mut rng, 0.2, 3.0);
        let beta = rng.gen_range(0.3..0.95);
        let gamma = rng.gen_range(0.0..2.0);
        let n = rng.gen_range(0.8..1.4);
        let e = econ(n, tfp, a, rho, beta, Wariness::Finite(gamma));
        let report = analysis::steady_states(&e).unwrap();
        for s in &report.steady_states {
            let sols = dynamics::step_solutions(&e, s.k).unwrap();
            let nearest = sols
                .iter()
                .map(|x| (x.k_next - s.k).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(
                nearest <= 1e-6 * s.k.max(1.0),
                "steady state {} does not replay (a={a} rho={rho} beta={beta} gamma={gamma} n={n})",
                s.k
            );
            states += 1;
        }
    }
    assert!(states >= 10, "only {states} steady states drawn");
}
