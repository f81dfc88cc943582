//! Run configuration: seed, tolerance overrides, precision and trial counts.

use std::collections::BTreeMap;
use std::path::PathBuf;

use segre_core::modmaps::{ORBIT_MARGIN, PENCIL_RATIO_TOL};
use segre_core::moduli::INVARIANT_TOL;
use segre_core::numkit::scalar::Precision;
use serde::Serialize;

use crate::CliError;

/// Default seed of every suite.
pub const DEFAULT_SEED: u64 = 20240601;

/// Maximum Plücker distance between matched lines.
pub const PLUCKER_TOL: f64 = 1e-8;

/// Tolerance keys accepted by `--tol`.
pub const TOLERANCE_KEYS: [&str; 4] = ["plucker", "invariant", "orbit-margin", "pencil-ratio"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub plucker: f64,
    pub invariant: f64,
    pub orbit_margin: f64,
    pub pencil_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            plucker: PLUCKER_TOL,
            invariant: INVARIANT_TOL,
            orbit_margin: ORBIT_MARGIN,
            pencil_ratio: PENCIL_RATIO_TOL,
        }
    }
}

impl Tolerances {
    /// Defaults with `overrides` applied; keys must be known and values positive and finite.
    pub fn with_overrides(overrides: &BTreeMap<String, f64>) -> Result<Self, CliError> {
        let mut t = Tolerances::default();
        for (key, &value) in overrides {
            if !(value.is_finite() && value > 0.0) {
                return Err(CliError::Config(format!("tolerance {key} must be positive, got {value}")));
            }
            match key.as_str() {
                "plucker" => t.plucker = value,
                "invariant" => t.invariant = value,
                "orbit-margin" => t.orbit_margin = value,
                "pencil-ratio" => t.pencil_ratio = value,
                _ => {
                    return Err(CliError::Config(format!(
                        "unknown tolerance {key}; expected one of {}",
                        TOLERANCE_KEYS.join(", ")
                    )))
                }
            }
        }
        Ok(t)
    }
}

/// Parses `KEY=VAL`.
pub fn parse_tolerance(arg: &str) -> Result<(String, f64), CliError> {
    let (key, value) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("expected KEY=VAL, got {arg}")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("tolerance {key}: not a number: {value}")))?;
    Ok((key.trim().to_string(), value))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub suite: String,
    pub seed: u64,
    /// Overrides the default trial count of the sampling suites.
    pub trials: Option<usize>,
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub precision: Precision,
    /// Source points of P^3 replacing random samples in the six-lines suite.
    pub fixtures: Option<PathBuf>,
    pub json: Option<PathBuf>,
    /// Also runs the monodromy count.
    pub long: bool,
}

impl RunConfig {
    pub fn new(suite: &str) -> Self {
        RunConfig {
            suite: suite.to_string(),
            seed: DEFAULT_SEED,
            trials: None,
            tolerance_overrides: BTreeMap::new(),
            precision: Precision::Double,
            fixtures: None,
            json: None,
            long: false,
        }
    }

    pub fn validate(&self) -> Result<Tolerances, CliError> {
        if self.trials == Some(0) {
            return Err(CliError::Config("trial count must be at least 1".into()));
        }
        Tolerances::with_overrides(&self.tolerance_overrides)
    }

    pub fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_key_value() {
        assert_eq!(parse_tolerance("plucker=1e-6").unwrap(), ("plucker".to_string(), 1e-6));
        assert!(parse_tolerance("plucker").is_err());
        assert!(parse_tolerance("plucker=abc").is_err());
    }

    #[test]
    fn unknown_key_is_rejected() {
        let mut cfg = RunConfig::new("segre");
        cfg.tolerance_overrides.insert("newton".into(), 1e-3);
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn zero_trials_are_rejected() {
        let mut cfg = RunConfig::new("lines");
        cfg.trials = Some(0);
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #[test]
        fn accepted_tolerances_are_positive(key in 0usize..4, value in -1.0f64..1.0) {
            let mut overrides = BTreeMap::new();
            overrides.insert(TOLERANCE_KEYS[key].to_string(), value);
            match Tolerances::with_overrides(&overrides) {
                Ok(t) => {
                    prop_assert!(value > 0.0);
                    prop_assert!([t.plucker, t.invariant, t.orbit_margin, t.pencil_ratio].contains(&value));
                }
                Err(_) => prop_assert!(value <= 0.0),
            }
        }
    }
}
