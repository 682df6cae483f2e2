//! Flat TOML configuration for each subcommand, with `key=value` overrides.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Largest qubit count accepted unless `allow_large` is set.
pub const DEFAULT_MAX_QUBITS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// The computational basis state `|0...0>`.
    E0,
    /// An exact ground state of the Hamiltonian.
    Ground,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub seed: u64,
    pub trials: usize,
    pub n: usize,
    pub layers: Vec<usize>,
    /// Step size is `mu0 / N`.
    pub mu0: f64,
    pub sigma: f64,
    pub max_iters: usize,
    /// Gap used for the iterations-to-target summary.
    pub target_gap: f64,
    pub record_every: usize,
    pub reference: Reference,
    pub allow_large: bool,
    pub out: Option<PathBuf>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100,
            n: 6,
            layers: vec![1, 2, 4, 8, 16],
            mu0: 0.2,
            sigma: 0.05,
            max_iters: 2000,
            target_gap: 1e-6,
            record_every: 1,
            reference: Reference::E0,
            allow_large: false,
            out: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSweepConfig {
    pub seed: u64,
    pub trials: usize,
    pub n_values: Vec<usize>,
    pub sigmas: Vec<f64>,
    pub layers: usize,
    pub delta: f64,
    pub reference: Reference,
    pub allow_large: bool,
    pub out: Option<PathBuf>,
}

impl Default for InitSweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100,
            n_values: vec![2, 4, 6],
            sigmas: vec![0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3],
            layers: 16,
            delta: 0.1,
            reference: Reference::E0,
            allow_large: false,
            out: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShotsConfig {
    pub seed: u64,
    pub trials: usize,
    pub n: usize,
    pub layers: usize,
    pub mu0: f64,
    pub sigma: f64,
    /// Number of Pauli terms in the random Hamiltonian.
    pub terms: usize,
    pub budgets: Vec<u64>,
    pub gamma: f64,
    /// Optimization steps used to reach the circuit at which shots are taken.
    pub opt_iters: usize,
    pub allow_large: bool,
    pub out: Option<PathBuf>,
}

impl Default for ShotsConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100,
            n: 6,
            layers: 8,
            mu0: 0.2,
            sigma: 0.05,
            terms: 24,
            budgets: vec![100, 1_000, 10_000, 100_000],
            gamma: 0.05,
            opt_iters: 2000,
            allow_large: false,
            out: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandscapeConfig {
    /// `"tfim"` or the path of a Pauli-term file.
    pub hamiltonian: String,
    /// Qubit count for `tfim`.
    pub n: usize,
    pub allow_large: bool,
    pub out: Option<PathBuf>,
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        Self {
            hamiltonian: "tfim".into(),
            n: 2,
            allow_large: false,
            out: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecomposeConfig {
    /// Dense matrix file: one row per line, whitespace-separated entries
    /// such as `1`, `-0.5`, `0.25+1i`.
    pub input: Option<PathBuf>,
    pub allow_large: bool,
    pub out: Option<PathBuf>,
}

fn config_err(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        key: Some(key.to_string()),
        message: message.into(),
    }
}

fn check_qubits(key: &str, n: usize, allow_large: bool) -> Result<(), CliError> {
    if n < 2 {
        return Err(config_err(key, format!("needs at least 2 qubits, got {n}")));
    }
    if n > DEFAULT_MAX_QUBITS && !allow_large {
        return Err(config_err(
            key,
            format!("{n} qubits exceeds the default cap of {DEFAULT_MAX_QUBITS}; set allow_large = true to proceed"),
        ));
    }
    if n > unitary_vqe::pauli::MAX_QUBITS {
        return Err(config_err(
            key,
            format!(
                "{n} qubits exceeds the hard limit of {}",
                unitary_vqe::pauli::MAX_QUBITS
            ),
        ));
    }
    Ok(())
}

fn positive(key: &str, x: f64) -> Result<(), CliError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(config_err(key, format!("must be positive, got {x}")));
    }
    Ok(())
}

fn at_least_one(key: &str, x: usize) -> Result<(), CliError> {
    if x == 0 {
        return Err(config_err(key, "must be at least 1"));
    }
    Ok(())
}

pub trait Validate {
    fn validate(&self) -> Result<(), CliError>;
}

impl Validate for ConvergenceConfig {
    fn validate(&self) -> Result<(), CliError> {
        at_least_one("trials", self.trials)?;
        check_qubits("n", self.n, self.allow_large)?;
        if self.layers.is_empty() || self.layers.contains(&0) {
            return Err(config_err("layers", "must be a non-empty list of positive counts"));
        }
        positive("mu0", self.mu0)?;
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(config_err("sigma", "must be non-negative"));
        }
        at_least_one("max_iters", self.max_iters)?;
        positive("target_gap", self.target_gap)?;
        at_least_one("record_every", self.record_every)
    }
}

impl Validate for InitSweepConfig {
    fn validate(&self) -> Result<(), CliError> {
        at_least_one("trials", self.trials)?;
        if self.n_values.is_empty() {
            return Err(config_err("n_values", "must not be empty"));
        }
        for &n in &self.n_values {
            check_qubits("n_values", n, self.allow_large)?;
        }
        if self.sigmas.is_empty() || self.sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(config_err("sigmas", "must be a non-empty list of non-negative values"));
        }
        at_least_one("layers", self.layers)?;
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(config_err("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }
}

impl Validate for ShotsConfig {
    fn validate(&self) -> Result<(), CliError> {
        at_least_one("trials", self.trials)?;
        check_qubits("n", self.n, self.allow_large)?;
        at_least_one("layers", self.layers)?;
        positive("mu0", self.mu0)?;
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(config_err("sigma", "must be non-negative"));
        }
        at_least_one("terms", self.terms)?;
        let max_terms = 1u128 << (2 * self.n);
        if self.terms as u128 > max_terms {
            return Err(config_err(
                "terms",
                format!("at most {max_terms} distinct strings exist on {} qubits", self.n),
            ));
        }
        if self.budgets.is_empty() {
            return Err(config_err("budgets", "must not be empty"));
        }
        if let Some(b) = self.budgets.iter().find(|&&b| b < self.terms as u64) {
            return Err(config_err(
                "budgets",
                format!("budget {b} is below one shot per term ({})", self.terms),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(config_err("gamma", format!("must lie in (0, 1), got {}", self.gamma)));
        }
        at_least_one("opt_iters", self.opt_iters)
    }
}

impl Validate for LandscapeConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.hamiltonian == "tfim" {
            check_qubits("n", self.n, self.allow_large)?;
        }
        Ok(())
    }
}

impl Validate for DecomposeConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.input.is_none() {
            return Err(config_err("input", "a matrix file is required"));
        }
        Ok(())
    }
}

/// Reads the optional config file and applies `key=value` overrides.
/// Values are parsed as TOML, falling back to a plain string.
pub fn load_table(path: Option<&Path>, overrides: &[String]) -> Result<toml::Table, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config {
                key: None,
                message: format!("cannot read {}: {e}", p.display()),
            })?;
            text.parse::<toml::Table>().map_err(|e| CliError::Config {
                key: None,
                message: format!("{}: {e}", p.display()),
            })?
        }
        None => toml::Table::new(),
    };
    for item in overrides {
        let (key, value) = item.split_once('=').ok_or_else(|| CliError::Config {
            key: None,
            message: format!("override `{item}` is not of the form key=value"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Config {
                key: None,
                message: format!("override `{item}` has an empty key"),
            });
        }
        let value = value.trim();
        let parsed = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        table.insert(key.to_string(), parsed);
    }
    Ok(table)
}

pub fn from_table<T: DeserializeOwned>(table: toml::Table) -> Result<T, CliError> {
    T::deserialize(toml::Value::Table(table)).map_err(|e| CliError::Config {
        key: None,
        message: e.to_string().trim().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ConvergenceConfig::default().validate().unwrap();
        InitSweepConfig::default().validate().unwrap();
        ShotsConfig::default().validate().unwrap();
        LandscapeConfig::default().validate().unwrap();
    }

    #[test]
    fn overrides_parse_as_toml() {
        let t = load_table(None, &["n=4".into(), "layers=[1,2]".into(), "hamiltonian=h.txt".into()]).unwrap();
        assert_eq!(t["n"], toml::Value::Integer(4));
        assert_eq!(t["hamiltonian"], toml::Value::String("h.txt".into()));
        let c: ConvergenceConfig =
            from_table(load_table(None, &["n=4".into(), "layers=[1,2]".into()]).unwrap()).unwrap();
        assert_eq!(c.n, 4);
        assert_eq!(c.layers, vec![1, 2]);
        assert_eq!(c.mu0, 0.2);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = from_table::<ShotsConfig>(load_table(None, &["budget=5".into()]).unwrap()).unwrap_err();
        assert!(err.to_string().contains("budget"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn large_n_needs_override() {
        let c = ConvergenceConfig {
            n: 9,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = ConvergenceConfig {
            n: 9,
            allow_large: true,
            ..Default::default()
        };
        assert!(c.validate().is_ok());
    }
}
