//! The five subcommands. Each builds the economy from a parsed config, runs
//! the corresponding library routines, and renders one artifact in the
//! requested format.

use olg_core::analysis::{self, NamedThreshold, Param, Threshold, TrapCase, TrapVerdict};
use olg_core::dynamics::{self, BranchPolicy, LimitClass, Trajectory};
use olg_core::Error;
use serde::Serialize;

use crate::config::ConfigFile;
use crate::output::{fmt_sig, Artifact, Csv, RunManifest, ARTIFACT_VERSION, NA};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn manifest(command: &'static str, cfg: &ConfigFile) -> RunManifest {
    RunManifest {
        command,
        artifact_version: ARTIFACT_VERSION,
        config: cfg.resolved(),
        solver: cfg.solver.resolve(),
        duration_ms: 0.0,
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("output serialization: {e}")))?;
    body.push('\n');
    Ok(body)
}

// ---------------------------------------------------------------- check --

#[derive(Debug, Serialize)]
struct CheckRow {
    check: &'static str,
    result: String,
    detail: String,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_else(|| NA.to_string())
}

fn pass(flag: bool) -> String {
    if flag { "pass" } else { "fail" }.to_string()
}

/// The named structural checks, one row each; a check whose premise does not
/// apply reports `skip` with the reason.
pub fn cmd_check(cfg: &ConfigFile, format: Format) -> Result<Artifact, CliError> {
    let econ = cfg.to_economy()?;
    let mut rows = Vec::new();

    let h = analysis::check_h_increasing(&econ.prod);
    rows.push(CheckRow {
        check: "h_increasing",
        result: pass(h.increasing),
        detail: format!(
            "criterion={};min_slope={};x_c={}",
            fmt_sig(h.criterion),
            fmt_sig(h.min_slope),
            fmt_opt(h.x_c)
        ),
    });

    let u = analysis::check_uniqueness(&econ);
    let witness = u
        .witness
        .map(|(lo, hi)| format!("witness=[{} {}]", fmt_sig(lo), fmt_sig(hi)))
        .unwrap_or_else(|| "witness=none".to_string());
    rows.push(CheckRow {
        check: "uniqueness",
        result: pass(u.unique),
        detail: format!(
            "returns_decreasing={};h_increasing={};{witness}",
            u.returns_decreasing, u.h_increasing
        ),
    });

    let (r_low, r_high) = econ.prefs.thresholds();
    let limits = econ.prod.limits();
    let lock = analysis::check_regime_lock(&econ);
    let lock_name = match lock {
        analysis::RegimeLock::Locked(r) => format!("locked_{}", r.index()),
        analysis::RegimeLock::Mixed => "mixed".to_string(),
    };
    rows.push(CheckRow {
        check: "regime_lock",
        result: lock_name,
        detail: format!(
            "r_low={};r_high={};fp_zero={};fp_inf={}",
            fmt_sig(r_low),
            fmt_sig(r_high),
            fmt_sig(limits.fp_zero),
            fmt_sig(limits.fp_inf)
        ),
    });

    let c = analysis::check_collapse(&econ)?;
    rows.push(CheckRow {
        check: "collapse",
        result: c.collapses.to_string(),
        detail: format!(
            "case={};m1={};m2={};m3={};uniqueness={}",
            c.case.map(|i| i.to_string()).unwrap_or_else(|| "none".into()),
            fmt_sig(c.m.m1),
            fmt_sig(c.m.m2),
            fmt_sig(c.m.m3),
            c.uniqueness
        ),
    });

    for (name, b) in [
        ("assum_poverty_beta1", econ.prefs.beta1()),
        ("assum_poverty_beta2", econ.prefs.beta2()),
    ] {
        rows.push(match analysis::check_assum_poverty(&econ, b) {
            Ok(p) => CheckRow {
                check: name,
                result: pass(p.holds),
                detail: format!(
                    "fixed_points_nonempty={};ordered_in_b={};small_x_vanishing={}",
                    p.fixed_points_nonempty, p.ordered_in_b, p.small_x_vanishing
                ),
            },
            Err(e) => CheckRow {
                check: name,
                result: "skip".to_string(),
                detail: e.to_string().replace(',', ";"),
            },
        });
    }

    let body = match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut csv = Csv::new("check,result,detail");
            for r in rows {
                csv.row([r.check.to_string(), r.result, r.detail]);
            }
            csv.finish()
        }
    };
    Ok(Artifact::new(body, manifest("check", cfg)))
}

// ----------------------------------------------------------------- step --

#[derive(Debug, Serialize)]
struct StepDocument {
    k0: f64,
    count: usize,
    solutions: Vec<dynamics::StepSolution>,
}

/// Every admissible next-period capital from `k0`, ascending.
pub fn cmd_step(cfg: &ConfigFile, k0: f64, format: Format) -> Result<Artifact, CliError> {
    let econ = cfg.to_economy()?;
    let solutions = dynamics::step_solutions(&econ, k0)?;
    let count = solutions.len();
    let body = match format {
        Format::Json => to_json(&StepDocument { k0, count, solutions })?,
        Format::Csv => {
            let mut csv = Csv::new("k_next,regime,residual");
            for s in &solutions {
                csv.row([
                    fmt_sig(s.k_next),
                    s.regime.index().to_string(),
                    fmt_sig(s.residual),
                ]);
            }
            csv.finish()
        }
    };
    let mut artifact = Artifact::new(body, manifest("step", cfg));
    artifact.notes.push(format!("count = {count}"));
    Ok(artifact)
}

// ------------------------------------------------------------- simulate --

#[derive(Debug, Serialize)]
struct SimulatedPath {
    k0: f64,
    trajectory: Trajectory,
}

fn limit_cells(limit: &LimitClass) -> (&'static str, String) {
    match limit {
        LimitClass::Collapse => ("collapse", NA.to_string()),
        LimitClass::ConvergesTo(k) => ("converges_to", fmt_sig(*k)),
        LimitClass::Undetermined => ("undetermined", NA.to_string()),
    }
}

/// One trajectory per starting capital, all under the same branch policy;
/// limit classifications follow the data as comment lines.
pub fn cmd_simulate(
    cfg: &ConfigFile,
    k0s: &[f64],
    policy: BranchPolicy,
    horizon: usize,
    format: Format,
) -> Result<Artifact, CliError> {
    let econ = cfg.to_economy()?;
    let mut paths = Vec::new();
    for &k0 in k0s {
        let trajectory = dynamics::simulate(&econ, k0, policy.clone(), horizon)?;
        paths.push(SimulatedPath { k0, trajectory });
    }
    let body = match format {
        Format::Json => to_json(&paths)?,
        Format::Csv => {
            let mut csv = Csv::new("k0,t,k,regime");
            for p in &paths {
                let label = fmt_sig(p.k0);
                for point in &p.trajectory.path {
                    csv.row([
                        label.clone(),
                        point.t.to_string(),
                        fmt_sig(point.k),
                        point.regime.index().to_string(),
                    ]);
                }
            }
            for p in &paths {
                let (limit, value) = limit_cells(&p.trajectory.limit);
                csv.comment(&format!(
                    "k0={} limit={limit} value={value} periods={}",
                    fmt_sig(p.k0),
                    p.trajectory.path.len() - 1
                ));
            }
            csv.finish()
        }
    };
    Ok(Artifact::new(body, manifest("simulate", cfg)))
}

// ----------------------------------------------------------------- trap --

#[derive(Debug, Serialize)]
struct ThresholdAudit {
    name: &'static str,
    value: f64,
    reference: f64,
    gap: f64,
    agree: bool,
}

#[derive(Debug, Serialize)]
struct TrapDocument {
    report: analysis::TrapReport,
    semantics: Option<analysis::SemanticsCheck>,
    audit: Vec<ThresholdAudit>,
}

fn case_name(case: TrapCase) -> &'static str {
    match case {
        TrapCase::NoWariness => "no_wariness",
        TrapCase::LockedLowReturn => "locked_low_return",
        TrapCase::LockedHighReturn => "locked_high_return",
        TrapCase::LockedBand => "locked_band",
        TrapCase::Mixed => "mixed",
        TrapCase::Collapse => "collapse",
    }
}

fn audit_rows(thresholds: &[NamedThreshold], reference: f64) -> Vec<ThresholdAudit> {
    thresholds
        .iter()
        .map(|t| {
            let gap = (t.value - reference).abs();
            ThresholdAudit {
                name: t.name,
                value: t.value,
                reference,
                gap,
                // agreement means matching the quoted figure to ~1%
                agree: gap <= (1e-2 * reference.abs()).max(1e-3),
            }
        })
        .collect()
}

/// Poverty-trap case, named thresholds, dynamic verification, and an
/// optional audit of every threshold against a reference figure.
pub fn cmd_trap(
    cfg: &ConfigFile,
    reference: Option<f64>,
    horizon: usize,
    format: Format,
) -> Result<Artifact, CliError> {
    let econ = cfg.to_economy()?;
    let report = analysis::poverty_thresholds(&econ)?;
    let semantics = analysis::verify_trap_semantics(&econ, &report, horizon)?;
    let audit = reference
        .map(|r| audit_rows(&report.thresholds, r))
        .unwrap_or_default();
    let body = match format {
        Format::Json => to_json(&TrapDocument { report, semantics, audit })?,
        Format::Csv => {
            let mut csv = Csv::new("field,name,value,detail");
            csv.row([
                "case".to_string(),
                case_name(report.case).to_string(),
                NA.to_string(),
                String::new(),
            ]);
            for t in &report.thresholds {
                csv.row([
                    "threshold".to_string(),
                    t.name.to_string(),
                    fmt_sig(t.value),
                    format!("maximal={}", t.maximal),
                ]);
            }
            match report.verdict {
                TrapVerdict::TrapBelow { threshold, maximal } => csv.row([
                    "verdict".to_string(),
                    "trap_below".to_string(),
                    fmt_sig(threshold),
                    format!("maximal={maximal}"),
                ]),
                TrapVerdict::CollapseForAll => csv.row([
                    "verdict".to_string(),
                    "collapse_for_all".to_string(),
                    NA.to_string(),
                    String::new(),
                ]),
                TrapVerdict::NoTrap => csv.row([
                    "verdict".to_string(),
                    "no_trap".to_string(),
                    NA.to_string(),
                    String::new(),
                ]),
            }
            if let Some(s) = &semantics {
                let (below, below_value) = limit_cells(&s.below);
                let (above, above_value) = limit_cells(&s.above);
                csv.row([
                    "semantics".to_string(),
                    "below".to_string(),
                    below.to_string(),
                    format!("start={};value={below_value}", fmt_sig(s.below_start)),
                ]);
                csv.row([
                    "semantics".to_string(),
                    "above".to_string(),
                    above.to_string(),
                    format!("start={};value={above_value}", fmt_sig(s.above_start)),
                ]);
                csv.row([
                    "semantics".to_string(),
                    "consistent".to_string(),
                    s.consistent.to_string(),
                    String::new(),
                ]);
            }
            for a in &audit {
                csv.row([
                    "audit".to_string(),
                    a.name.to_string(),
                    fmt_sig(a.value),
                    format!(
                        "reference={};gap={};verdict={}",
                        fmt_sig(a.reference),
                        fmt_sig(a.gap),
                        if a.agree { "agree" } else { "disagree" }
                    ),
                ]);
            }
            csv.finish()
        }
    };
    Ok(Artifact::new(body, manifest("trap", cfg)))
}

// ---------------------------------------------------------------- sweep --

pub fn parse_param(s: &str) -> Result<Param, CliError> {
    Ok(match s {
        "A" => Param::Tfp,
        "a" => Param::Intensity,
        "rho" => Param::Rho,
        "B" => Param::Linear,
        "beta" => Param::Beta,
        "gamma" => Param::Gamma,
        "n" => Param::N,
        _ => {
            return Err(CliError::Config(format!(
                "unknown parameter `{s}` (expected one of A, a, rho, B, beta, gamma, n)"
            )))
        }
    })
}

pub fn parse_target(s: &str) -> Result<Threshold, CliError> {
    for t in [
        Threshold::X1,
        Threshold::X2,
        Threshold::X0,
        Threshold::XBeta1,
        Threshold::XBeta2,
        Threshold::KBar1,
        Threshold::KBar2,
        Threshold::XStar,
        Threshold::XPovertyA,
        Threshold::XPovertyB,
    ] {
        if t.name() == s {
            return Ok(t);
        }
    }
    Err(CliError::Config(format!(
        "unknown target `{s}` (expected one of x1, x2, x0, x_beta1, x_beta2, kbar1, kbar2, x_star, x_poverty_a, x_poverty_b)"
    )))
}

#[derive(Debug, Serialize)]
struct SweepRow {
    param: f64,
    /// `None` where the threshold does not exist at this parameter value.
    value: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SweepDocument {
    param: &'static str,
    target: &'static str,
    rows: Vec<SweepRow>,
}

/// Evaluates a named threshold along a linear parameter grid. Points where
/// the threshold's case does not apply stay in the output as `NA` rows.
pub fn cmd_sweep(
    cfg: &ConfigFile,
    param: Param,
    from: f64,
    to: f64,
    steps: usize,
    target: Threshold,
    format: Format,
) -> Result<Artifact, CliError> {
    if steps == 0 {
        return Err(CliError::Config("--steps must be at least 1".to_string()));
    }
    let econ = cfg.to_economy()?;
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let v = if steps == 1 {
            from
        } else if i == steps - 1 {
            to
        } else {
            from + (to - from) * i as f64 / (steps - 1) as f64
        };
        let value = match param.with_value(&econ, v) {
            Ok(perturbed) => match analysis::evaluate_threshold(&perturbed, target) {
                Ok(x) => Some(x),
                Err(
                    Error::CaseBoundary { .. }
                    | Error::Unsupported { .. }
                    | Error::OutOfRange { .. }
                    | Error::Bracket { .. },
                ) => None,
                Err(e) => return Err(e.into()),
            },
            // the grid may cross the parameter's own validity boundary
            Err(Error::InvalidParameter { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        rows.push(SweepRow { param: v, value });
    }
    let body = match format {
        Format::Json => to_json(&SweepDocument {
            param: param.name(),
            target: target.name(),
            rows,
        })?,
        Format::Csv => {
            let mut csv = Csv::new(&format!("{},{}", param.name(), target.name()));
            for r in &rows {
                csv.row([fmt_sig(r.param), fmt_opt(r.value)]);
            }
            csv.finish()
        }
    };
    Ok(Artifact::new(body, manifest("sweep", cfg)))
}
