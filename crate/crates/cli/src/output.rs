//! Deterministic artifact plumbing: decimal formatting at 12 significant
//! digits, CSV with a mandatory header and `NA` sentinels, and the manifest
//! that travels with every artifact (sidecar file next to `--out`, stderr
//! otherwise). The numeric body is byte-identical across reruns; only the
//! manifest's wall-clock field varies.

use std::io::Write;
use std::path::Path;

use olg_core::model::SolverSettings;
use serde::Serialize;

use crate::config::ResolvedConfig;
use crate::CliError;

pub const ARTIFACT_VERSION: u32 = 1;

/// Absent-value sentinel mandated for CSV cells.
pub const NA: &str = "NA";

/// Decimal rendering with 12 significant digits, no locale, no trailing
/// zeros; scientific notation only outside [1e-4, 1e12).
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return NA.to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_decimal(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_decimal(mant.to_string()))
    }
}

fn trim_decimal(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

/// Row-oriented CSV accumulator. Cells are caller-controlled and never
/// contain separators, so no quoting is needed; summary lines are written
/// as `#` comments after the data.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Self {
            buf: format!("{header}\n"),
        }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let mut first = true;
        for cell in cells {
            if !first {
                self.buf.push(',');
            }
            self.buf.push_str(&cell);
            first = false;
        }
        self.buf.push('\n');
    }

    pub fn comment(&mut self, line: &str) {
        self.buf.push_str("# ");
        self.buf.push_str(line);
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub artifact_version: u32,
    pub config: ResolvedConfig,
    pub solver: SolverSettings,
    /// Wall-clock duration; the single non-reproducible field.
    pub duration_ms: f64,
}

/// A finished numeric artifact plus its manifest and stderr notes.
pub struct Artifact {
    pub body: String,
    pub manifest: RunManifest,
    pub notes: Vec<String>,
}

impl Artifact {
    pub fn new(body: String, manifest: RunManifest) -> Self {
        Self {
            body,
            manifest,
            notes: Vec::new(),
        }
    }
}

/// Writes the body to `--out` (manifest to `<out>.manifest.json`) or to
/// stdout (manifest to stderr); notes always go to stderr.
pub fn emit(artifact: &Artifact, out: Option<&Path>) -> Result<(), CliError> {
    let manifest = serde_json::to_string_pretty(&artifact.manifest)
        .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
    match out {
        Some(path) => {
            std::fs::write(path, &artifact.body)?;
            let mut sidecar = path.as_os_str().to_owned();
            sidecar.push(".manifest.json");
            std::fs::write(sidecar, manifest)?;
        }
        None => {
            let stdout = std::io::stdout();
            stdout.lock().write_all(artifact.body.as_bytes())?;
            eprintln!("{manifest}");
        }
    }
    for note in &artifact.notes {
        eprintln!("{note}");
    }
    Ok(())
}
