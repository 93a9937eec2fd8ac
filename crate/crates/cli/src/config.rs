//! Economy configuration files: one JSON document pins a whole economy,
//! with optional solver overrides. Unknown keys are rejected and parse
//! errors carry the full key path.

use std::fmt;
use std::path::Path;

use olg_core::model::{Economy, Preferences, Production, SolverSettings, Wariness};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::CliError;

/// Wariness as written in a config: a non-negative number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma(pub Wariness);

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct GammaVisitor;

        impl Visitor<'_> for GammaVisitor {
            type Value = Gamma;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Gamma, E> {
                Ok(Gamma(Wariness::Finite(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Gamma, E> {
                Ok(Gamma(Wariness::Finite(v as f64)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Gamma, E> {
                Ok(Gamma(Wariness::Finite(v as f64)))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Gamma, E> {
                if v == "inf" {
                    Ok(Gamma(Wariness::Infinite))
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        d.deserialize_any(GammaVisitor)
    }
}

impl Serialize for Gamma {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Wariness::Finite(g) => s.serialize_f64(g),
            Wariness::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UtilityChoice {
    #[default]
    Log,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProductionSection {
    #[serde(rename = "A")]
    pub tfp: f64,
    pub a: f64,
    pub rho: f64,
    #[serde(rename = "B", default)]
    pub linear: f64,
}

/// Optional overrides of the solver defaults.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tol_root: Option<f64>,
    pub tol_fixed: Option<f64>,
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub grid_points: Option<usize>,
    pub max_iter: Option<usize>,
    pub collapse_eps: Option<f64>,
    pub window: Option<usize>,
}

impl SolverSection {
    pub fn resolve(&self) -> SolverSettings {
        let d = SolverSettings::default();
        SolverSettings {
            tol_root: self.tol_root.unwrap_or(d.tol_root),
            tol_fixed: self.tol_fixed.unwrap_or(d.tol_fixed),
            k_min: self.k_min.unwrap_or(d.k_min),
            k_max: self.k_max.unwrap_or(d.k_max),
            grid_points: self.grid_points.unwrap_or(d.grid_points),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            collapse_eps: self.collapse_eps.unwrap_or(d.collapse_eps),
            window: self.window.unwrap_or(d.window),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n: f64,
    pub beta: f64,
    pub gamma: Gamma,
    #[serde(default)]
    pub utility: UtilityChoice,
    pub production: ProductionSection,
    #[serde(default)]
    pub solver: SolverSection,
}

/// The configuration a run actually used, echoed into its manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub n: f64,
    pub beta: f64,
    pub gamma: Gamma,
    pub utility: UtilityChoice,
    pub production: ProductionSection,
}

impl ConfigFile {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut de = serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            CliError::Config(format!("{}: at `{}`: {}", path.display(), e.path(), e.inner()))
        })
    }

    /// Builds the economy, revalidating every parameter; a rejected value is
    /// a config error, not a numeric one.
    pub fn to_economy(&self) -> Result<Economy, CliError> {
        let build = || -> olg_core::Result<Economy> {
            let prefs = Preferences::new(self.beta, self.gamma.0)?;
            let prod = Production::new(
                self.production.tfp,
                self.production.a,
                self.production.rho,
                self.production.linear,
            )?;
            Economy::new(prefs, prod, self.n)?.with_solver(self.solver.resolve())
        };
        build().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn resolved(&self) -> ResolvedConfig {
        ResolvedConfig {
            n: self.n,
            beta: self.beta,
            gamma: self.gamma,
            utility: self.utility,
            production: self.production,
        }
    }
}
