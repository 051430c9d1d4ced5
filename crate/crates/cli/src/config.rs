//! Scenario files.
//!
//! A scenario is a TOML document with top-level `units`, `seed`, an
//! `[output]` table and one or more `[[run]]` tables:
//!
//! ```toml
//! units = "paper"
//!
//! [output]
//! csv = "dimer.csv"
//! svg = "dimer.svg"
//! sample_stride = 10
//!
//! [[run]]
//! label = "afm"
//! initial_state = "ket:up,down"
//! observables = ["r1_x", "r1_y", "r1_z", "r1_mag"]
//!
//! [run.system]
//! spins = [0.5, 0.5]
//!
//! [run.hamiltonian]
//! B = [1.0, 0.0, 0.0]
//! J_over_B0_in_muB = 1.0
//! D_over_J = 0.0
//!
//! [run.dynamics]
//! engine = "qllg"
//! kappa = 0.5
//! dt = 0.001
//! t_max = 50.0
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use qllg_core::{CouplingScale, Integrator, UnitSystem};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(with = "by_name", default)]
    pub units: UnitSystem,
    /// Seed for `random` initial states that do not carry their own.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub seed: u64,
    pub output: OutputConfig,
    #[serde(rename = "run")]
    pub runs: Vec<RunConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// With several runs each writes `<stem>_<label>.csv`.
    pub csv: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
    /// Columns drawn in the SVG; all columns when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<Vec<String>>,
    /// Record every n-th integration step.
    #[serde(default = "one")]
    pub sample_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub label: String,
    /// State grammar of `qllg_core::spin::parse_state`, `random` or
    /// `file:<path>`. Required by the quantum engines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<String>,
    /// Initial moments in μ_B for the classical engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<Vec<[f64; 3]>>,
    pub observables: Vec<String>,
    pub system: SystemConfig,
    pub hamiltonian: HamiltonianConfig,
    pub dynamics: DynamicsConfig,
    /// Classical run integrated alongside a quantum one on the same grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalCompare>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub spins: Vec<f64>,
}

/// Couplings apply to every neighbouring pair `(k, k+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    /// Tesla.
    #[serde(rename = "B")]
    pub b_field: [f64; 3],
    /// meV
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub exchange: Option<f64>,
    /// `J` in units of `μ_B |B|`.
    #[serde(rename = "J_over_B0_in_muB", default, skip_serializing_if = "Option::is_none")]
    pub exchange_over_zeeman: Option<f64>,
    /// DMI vector, meV.
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub dmi: Option<[f64; 3]>,
    /// `|D| / |J|`, directed along `D_axis` (default `z`).
    #[serde(rename = "D_over_J", default, skip_serializing_if = "Option::is_none")]
    pub dmi_over_exchange: Option<f64>,
    #[serde(rename = "D_axis", default, skip_serializing_if = "Option::is_none")]
    pub dmi_axis: Option<[f64; 3]>,
    #[serde(with = "by_name_opt", default, skip_serializing_if = "Option::is_none")]
    pub coupling_scale: Option<CouplingScale>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Qllg,
    Qll,
    Classical,
    /// Closed-form pure-state solution of the q-LLG equation.
    Exact,
}

impl Engine {
    pub fn is_quantum(self) -> bool {
        self != Engine::Classical
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Qllg => "qllg",
            Engine::Qll => "qll",
            Engine::Classical => "classical",
            Engine::Exact => "exact",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub engine: Engine,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Gilbert damping for the classical engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// ps
    pub dt: f64,
    /// ps
    pub t_max: f64,
    #[serde(with = "by_name_opt", default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<Integrator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalCompare {
    pub alpha: f64,
    /// μ_B
    pub moments: Vec<[f64; 3]>,
}

fn one() -> usize {
    1
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    /// Structural checks that do not need any numerics.
    pub fn check(&self) -> Result<(), CliError> {
        if self.output.sample_stride == 0 {
            return Err(CliError::Config("sample_stride must be at least 1".into()));
        }
        if self.runs.is_empty() {
            return Err(CliError::Config("scenario has no [[run]] tables".into()));
        }
        let mut labels = std::collections::HashSet::new();
        for run in &self.runs {
            if run.label.is_empty()
                || !run
                    .label
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
            {
                return Err(CliError::Config(format!(
                    "run label `{}` must be non-empty and use only [A-Za-z0-9_.-]",
                    run.label
                )));
            }
            if !labels.insert(run.label.as_str()) {
                return Err(CliError::Config(format!("duplicate run label `{}`", run.label)));
            }
            let h = &run.hamiltonian;
            if h.exchange.is_some() && h.exchange_over_zeeman.is_some() {
                return Err(CliError::Config(format!(
                    "run `{}`: give either J or J_over_B0_in_muB, not both",
                    run.label
                )));
            }
            if h.dmi.is_some() && (h.dmi_over_exchange.is_some() || h.dmi_axis.is_some()) {
                return Err(CliError::Config(format!(
                    "run `{}`: give either D or D_over_J (with D_axis), not both",
                    run.label
                )));
            }
            if run.observables.is_empty() {
                return Err(CliError::Config(format!("run `{}` selects no observables", run.label)));
            }
        }
        Ok(())
    }

    /// Override every run's horizon.
    pub fn set_t_max(&mut self, t_max: f64) {
        for run in &mut self.runs {
            run.dynamics.t_max = t_max;
        }
    }
}

/// Serde adapter for enums that round-trip through `FromStr`/`Display`.
mod by_name {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: fmt::Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: fmt::Display,
        D: Deserializer<'de>,
    {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

mod by_name_opt {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: fmt::Display, S: Serializer>(value: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Option<T>, D::Error>
    where
        T: FromStr,
        T::Err: fmt::Display,
        D: Deserializer<'de>,
    {
        let text = Option::<String>::deserialize(d)?;
        text.map(|t| t.parse().map_err(serde::de::Error::custom)).transpose()
    }
}
