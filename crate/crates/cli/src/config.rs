//! Experiment configuration: named objects, one task, and run settings.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use qsvt_core::io::{self, CircuitDoc, HamiltonianDoc, InstanceDoc, ObservableDoc, StateDoc, TaskDoc};
use qsvt_core::{EstimationMode, HamiltonianSum, InterleavedCircuit, Measurement, StateVector};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    #[serde(default)]
    pub hamiltonians: BTreeMap<String, HamiltonianDoc>,
    #[serde(default)]
    pub circuits: BTreeMap<String, CircuitDoc>,
    #[serde(default)]
    pub states: BTreeMap<String, StateDoc>,
    #[serde(default)]
    pub observables: BTreeMap<String, ObservableDoc>,
    pub task: TaskSpec,
    #[serde(default)]
    pub extrapolation: ExtrapolationSpec,
    /// Mode string, as for `--mode`.
    #[serde(default)]
    pub estimation: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtrapolationSpec {
    pub order: Option<usize>,
    pub eps: Option<f64>,
    pub m: Option<usize>,
    pub inv_s0: Option<u64>,
}

/// Expectation of `observable` after `circuit` on `state`, optionally
/// conditioned on leading flag qubits.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutSpec {
    pub circuit: String,
    pub state: String,
    pub observable: String,
    #[serde(default)]
    pub flag: Vec<bool>,
    #[serde(default)]
    pub postselect: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskSpec {
    Interleaved(ReadoutSpec),
    Qls {
        instance: InstanceDoc,
        #[serde(default)]
        t_steps: Option<usize>,
    },
    Gse {
        task: TaskDoc,
    },
    Approx {
        function: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        #[serde(default)]
        coeffs: Vec<f64>,
    },
    Sweep(SweepSpec),
    Resources {
        circuit: String,
    },
}

#[derive(Debug, Clone, Deserialize)]
pub struct SweepSpec {
    pub axis: String,
    pub values: Vec<f64>,
    /// `t` axis.
    #[serde(default)]
    pub hamiltonian: Option<String>,
    /// `s`, `eps` and `m` axes.
    #[serde(default)]
    pub readout: Option<ReadoutSpec>,
    /// `T` axis.
    #[serde(default)]
    pub instance: Option<InstanceDoc>,
}

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::Interleaved(_) => "interleaved",
            TaskSpec::Qls { .. } => "qls",
            TaskSpec::Gse { .. } => "gse",
            TaskSpec::Approx { .. } => "approx",
            TaskSpec::Sweep(_) => "sweep",
            TaskSpec::Resources { .. } => "resources",
        }
    }
}

/// Parse and check the schema tag; the raw value is kept for the echo.
pub fn load(text: &str) -> Result<(ExperimentConfig, serde_json::Value), CliError> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Schema(format!("config: {e}")))?;
    let cfg: ExperimentConfig = serde_json::from_value(raw.clone()).map_err(|e| CliError::Schema(format!("config: {e}")))?;
    if cfg.schema != io::SCHEMA_VERSION {
        return Err(CliError::Schema(format!(
            "schema: expected {:?}, got {:?}",
            io::SCHEMA_VERSION,
            cfg.schema
        )));
    }
    Ok((cfg, raw))
}

/// Named objects built into core types.
pub struct Resolved {
    pub hamiltonians: BTreeMap<String, Arc<HamiltonianSum>>,
    pub circuits: BTreeMap<String, InterleavedCircuit>,
    pub states: BTreeMap<String, StateVector>,
    pub observables: BTreeMap<String, qsvt_core::Observable>,
}

fn schema_at<'a>(what: &'a str, name: &'a str) -> impl Fn(qsvt_core::Error) -> CliError + 'a {
    move |e| CliError::Schema(format!("{what}.{name}: {e}"))
}

impl Resolved {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let mut hamiltonians = BTreeMap::new();
        for (name, doc) in &cfg.hamiltonians {
            hamiltonians.insert(name.clone(), Arc::new(doc.build().map_err(schema_at("hamiltonians", name))?));
        }
        let mut circuits = BTreeMap::new();
        for (name, doc) in &cfg.circuits {
            circuits.insert(name.clone(), doc.build(&hamiltonians).map_err(schema_at("circuits", name))?);
        }
        let mut states = BTreeMap::new();
        for (name, doc) in &cfg.states {
            states.insert(name.clone(), doc.build().map_err(schema_at("states", name))?);
        }
        let mut observables = BTreeMap::new();
        for (name, doc) in &cfg.observables {
            observables.insert(name.clone(), doc.build().map_err(schema_at("observables", name))?);
        }
        Ok(Self {
            hamiltonians,
            circuits,
            states,
            observables,
        })
    }

    fn lookup<'a, T>(map: &'a BTreeMap<String, T>, what: &str, name: &str) -> Result<&'a T, CliError> {
        map.get(name)
            .ok_or_else(|| CliError::Schema(format!("task.{what}: unknown name {name:?}")))
    }

    pub fn hamiltonian(&self, name: &str) -> Result<&Arc<HamiltonianSum>, CliError> {
        Self::lookup(&self.hamiltonians, "hamiltonian", name)
    }

    pub fn circuit(&self, name: &str) -> Result<&InterleavedCircuit, CliError> {
        Self::lookup(&self.circuits, "circuit", name)
    }

    /// Circuit, start state and measurement, with register sizes checked.
    pub fn readout(&self, spec: &ReadoutSpec) -> Result<(InterleavedCircuit, StateVector, Measurement), CliError> {
        let circ = self.circuit(&spec.circuit)?.clone();
        let state = Self::lookup(&self.states, "state", &spec.state)?.clone();
        let obs = Self::lookup(&self.observables, "observable", &spec.observable)?.clone();
        let n = circ.num_qubits();
        if state.num_qubits() != n {
            return Err(CliError::Schema(format!(
                "task.state: {} qubits, circuit has {n}",
                state.num_qubits()
            )));
        }
        if spec.flag.len() + obs.num_qubits() != n {
            return Err(CliError::Schema(format!(
                "task.observable: {} flag + {} observable qubits do not cover {n}",
                spec.flag.len(),
                obs.num_qubits()
            )));
        }
        let meas = if spec.flag.is_empty() {
            Measurement::plain(obs)
        } else {
            Measurement::flagged(spec.flag.clone(), obs, spec.postselect)
        };
        Ok((circ, state, meas))
    }
}

/// `exact-read`, `shots:N[:seed]` (`N` may be `auto`) or
/// `coherent:eps:delta[:seed]`; a missing seed falls back to `seed`.
pub fn parse_mode(text: &str, seed: u64) -> Result<EstimationMode, CliError> {
    let bad = |why: &str| CliError::Schema(format!("mode {text:?}: {why}"));
    let parts: Vec<&str> = text.split(':').collect();
    let seed_at = |i: usize| -> Result<u64, CliError> {
        parts
            .get(i)
            .map(|s| s.parse::<u64>().map_err(|_| bad("seed must be a nonnegative integer")))
            .unwrap_or(Ok(seed))
    };
    match parts[0] {
        "exact-read" | "exact" if parts.len() == 1 => Ok(EstimationMode::ExactRead),
        "shots" if (2..=3).contains(&parts.len()) => {
            let shots = match parts[1] {
                "auto" => None,
                n => Some(
                    n.parse::<u64>()
                        .ok()
                        .filter(|&n| n > 0)
                        .ok_or_else(|| bad("shot count must be a positive integer or `auto`"))?,
                ),
            };
            Ok(EstimationMode::Shots { shots, seed: seed_at(2)? })
        }
        "coherent" if (3..=4).contains(&parts.len()) => {
            let eps: f64 = parts[1].parse().map_err(|_| bad("eps must be a number"))?;
            let delta: f64 = parts[2].parse().map_err(|_| bad("delta must be a number"))?;
            if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
                return Err(bad("eps and delta must lie in (0, 1)"));
            }
            Ok(EstimationMode::Coherent {
                eps,
                delta,
                seed: seed_at(3)?,
            })
        }
        _ => Err(bad("expected exact-read, shots:N[:seed] or coherent:eps:delta[:seed]")),
    }
}
