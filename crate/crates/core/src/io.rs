//! JSON documents: Hamiltonians, gate programs, interleaved circuits, states,
//! observables, linear-system instances, ground-state tasks and GQSP angle
//! sets. Every document type converts into the corresponding core type.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{Gate, GateProgram, U2Rotation};
use crate::gqsp::{CompletionMethod, GqspAngles};
use crate::groundstate::GroundStateTask;
use crate::hamiltonian::{HamiltonianSum, HermitianTerm};
use crate::interleaved::InterleavedCircuit;
use crate::linalg::{c, CMat};
use crate::pauli::PauliString;
use crate::qls::LinearSystemInstance;
use crate::state::{Observable, StateVector};
use crate::C64;

pub const SCHEMA_VERSION: &str = "qsvt/1";

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

/// `[re, im]`.
pub type ComplexPair = [f64; 2];

fn square_matrix(entries: &[ComplexPair], what: &str) -> Result<CMat> {
    let len = entries.len();
    let dim = (len as f64).sqrt().round() as usize;
    if dim * dim != len || !dim.is_power_of_two() {
        return Err(schema(format!("{what}: {len} entries is not a 2^k × 2^k matrix")));
    }
    Ok(CMat::from_fn(dim, dim, |r, col| {
        let [re, im] = entries[r * dim + col];
        c(re, im)
    }))
}

fn flatten(m: &CMat) -> Vec<ComplexPair> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for col in 0..m.ncols() {
            out.push([m[(r, col)].re, m[(r, col)].im]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum TermDoc {
    Pauli { pauli: String, coeff: f64 },
    /// Row-major `[re, im]` entries of a Hermitian block.
    Dense { qubits: Vec<usize>, matrix: Vec<ComplexPair> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianDoc {
    Terms(Vec<TermDoc>),
    Sized { qubits: usize, terms: Vec<TermDoc> },
}

impl HamiltonianDoc {
    pub fn terms(&self) -> &[TermDoc] {
        match self {
            HamiltonianDoc::Terms(t) | HamiltonianDoc::Sized { terms: t, .. } => t,
        }
    }

    fn declared_qubits(&self) -> Option<usize> {
        match self {
            HamiltonianDoc::Sized { qubits, .. } => Some(*qubits),
            HamiltonianDoc::Terms(_) => None,
        }
    }

    pub fn build(&self) -> Result<HamiltonianSum> {
        let inferred = self.terms().iter().find_map(|t| match t {
            TermDoc::Pauli { pauli, .. } => Some(pauli.len()),
            TermDoc::Dense { .. } => None,
        });
        let n = self
            .declared_qubits()
            .or(inferred)
            .ok_or_else(|| schema("hamiltonian: qubit count needed when all terms are dense"))?;
        let mut h = HamiltonianSum::new(n);
        for (i, t) in self.terms().iter().enumerate() {
            let term = match t {
                TermDoc::Pauli { pauli, coeff } => HermitianTerm::pauli(
                    pauli.parse::<PauliString>().map_err(|e| schema(format!("terms[{i}].pauli: {e}")))?,
                    *coeff,
                ),
                TermDoc::Dense { qubits, matrix } => {
                    HermitianTerm::dense(n, qubits.clone(), square_matrix(matrix, "terms.matrix")?)
                        .map_err(|e| schema(format!("terms[{i}]: {e}")))?
                }
            };
            h.push(term).map_err(|e| schema(format!("terms[{i}]: {e}")))?;
        }
        Ok(h)
    }

    /// Pauli terms only; other term kinds have no document form.
    pub fn from_hamiltonian(h: &HamiltonianSum) -> Result<Self> {
        let terms = h
            .terms()
            .iter()
            .map(|t| match t {
                HermitianTerm::Pauli { word, coeff } => Ok(TermDoc::Pauli {
                    pauli: word.to_string(),
                    coeff: *coeff,
                }),
                _ => Err(schema("only Pauli terms can be exported")),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HamiltonianDoc::Sized {
            qubits: h.num_qubits(),
            terms,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateDoc {
    H { qubit: usize },
    X { qubit: usize },
    /// `R(θ, φ, γ)`.
    U2 { qubit: usize, theta: f64, phi: f64, #[serde(default)] gamma: f64 },
    /// `cos θ|0⟩ + sin θ|1⟩` from `|0⟩`: `[[cos, −sin], [sin, cos]]`.
    Ry { qubit: usize, theta: f64 },
    PauliExp { word: String, angle: f64 },
    Unitary { qubits: Vec<usize>, matrix: Vec<ComplexPair> },
}

impl GateDoc {
    pub fn build(&self) -> Result<Gate> {
        Ok(match self {
            GateDoc::H { qubit } => Gate::hadamard(*qubit),
            GateDoc::X { qubit } => Gate::x(*qubit),
            GateDoc::U2 { qubit, theta, phi, gamma } => Gate::u2(*qubit, U2Rotation::new(*theta, *phi, *gamma)),
            GateDoc::Ry { qubit, theta } => {
                let (s, co) = theta.sin_cos();
                Gate::Single {
                    qubit: *qubit,
                    m: [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]],
                }
            }
            GateDoc::PauliExp { word, angle } => Gate::PauliExp {
                word: word.parse().map_err(|e| schema(format!("pauli_exp.word: {e}")))?,
                angle: *angle,
            },
            GateDoc::Unitary { qubits, matrix } => {
                let m = square_matrix(matrix, "unitary.matrix")?;
                if m.nrows() != 1 << qubits.len() {
                    return Err(schema("unitary: matrix size does not match qubit list"));
                }
                if crate::linalg::unitarity_defect(&m) > 1e-10 {
                    return Err(schema("unitary: matrix is not unitary within 1e-10"));
                }
                Gate::Unitary {
                    support: qubits.clone(),
                    matrix: Arc::new(m),
                }
            }
        })
    }
}

/// A gate list, or `"I"` for the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProgramDoc {
    Identity(String),
    Gates(Vec<GateDoc>),
}

impl ProgramDoc {
    pub fn build(&self) -> Result<GateProgram> {
        match self {
            ProgramDoc::Identity(s) if s == "I" => Ok(GateProgram::identity()),
            ProgramDoc::Identity(s) => Err(schema(format!("unitary: expected \"I\" or a gate list, got {s:?}"))),
            ProgramDoc::Gates(g) => Ok(GateProgram::new(g.iter().map(GateDoc::build).collect::<Result<_>>()?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum SegmentDoc {
    Unitary {
        unitary: ProgramDoc,
    },
    Evolution {
        hamiltonian: String,
        sign: i8,
        /// Control value on a prepended qubit, if any.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        controlled: Option<bool>,
    },
}

/// `{"qubits": n, "segments": [...]}`. Consecutive gate segments merge;
/// missing ones are identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDoc {
    pub qubits: usize,
    pub segments: Vec<SegmentDoc>,
}

impl CircuitDoc {
    pub fn build(&self, hams: &BTreeMap<String, Arc<HamiltonianSum>>) -> Result<InterleavedCircuit> {
        let mut circ = InterleavedCircuit::new(self.qubits);
        for (i, seg) in self.segments.iter().enumerate() {
            match seg {
                SegmentDoc::Unitary { unitary } => {
                    let p = unitary.build()?;
                    if !p.fits(self.qubits) {
                        return Err(schema(format!("segments[{i}]: gate does not fit {} qubits", self.qubits)));
                    }
                    circ.push_gates(&p);
                }
                SegmentDoc::Evolution {
                    hamiltonian,
                    sign,
                    controlled,
                } => {
                    let h = hams
                        .get(hamiltonian)
                        .ok_or_else(|| schema(format!("segments[{i}].hamiltonian: unknown name {hamiltonian:?}")))?;
                    if *sign != 1 && *sign != -1 {
                        return Err(schema(format!("segments[{i}].sign: must be +1 or -1")));
                    }
                    let h = match controlled {
                        Some(v) => Arc::new(h.controlled(*v)),
                        None => h.clone(),
                    };
                    circ.push_evolution(h, *sign).map_err(|e| schema(format!("segments[{i}]: {e}")))?;
                }
            }
        }
        Ok(circ)
    }
}

/// `"0101"`, `{"amplitudes": [[re, im], …]}` or `{"qubits": n, "prep": [gates]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum StateDoc {
    Bits(String),
    Amplitudes { amplitudes: Vec<ComplexPair> },
    Prepared { qubits: usize, prep: ProgramDoc },
}

impl StateDoc {
    pub fn build(&self) -> Result<StateVector> {
        match self {
            StateDoc::Bits(b) => StateVector::from_bits(b).map_err(|e| schema(format!("state: {e}"))),
            StateDoc::Amplitudes { amplitudes } => {
                StateVector::from_amplitudes(amplitudes.iter().map(|[re, im]| c(*re, *im)).collect())
                    .map_err(|e| schema(format!("state.amplitudes: {e}")))
            }
            StateDoc::Prepared { qubits, prep } => {
                let p = prep.build()?;
                if !p.fits(*qubits) {
                    return Err(schema("state.prep: gate does not fit the register"));
                }
                let mut s = StateVector::zero(*qubits);
                p.apply(&mut s);
                Ok(s)
            }
        }
    }
}

/// A Pauli word, a weighted Pauli sum, or a dense Hermitian matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ObservableDoc {
    Word(String),
    Terms(Vec<TermDoc>),
    Dense { matrix: Vec<ComplexPair> },
}

impl ObservableDoc {
    pub fn build(&self) -> Result<Observable> {
        match self {
            ObservableDoc::Word(w) => Observable::pauli(w).map_err(|e| schema(format!("observable: {e}"))),
            ObservableDoc::Terms(t) => Observable::from_hamiltonian(&HamiltonianDoc::Terms(t.clone()).build()?)
                .map_err(|e| schema(format!("observable: {e}"))),
            ObservableDoc::Dense { matrix } => Observable::from_dense(square_matrix(matrix, "observable.matrix")?)
                .map_err(|e| schema(format!("observable: {e}"))),
        }
    }
}

/// `{"pauli": "XZ", "re": 0.5, "im": 0.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexTermDoc {
    pub pauli: String,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub a: Vec<ComplexTermDoc>,
    pub kappa: f64,
    /// Prepares `|b⟩` on the system register.
    pub b_prep: ProgramDoc,
    pub observable: ObservableDoc,
}

impl InstanceDoc {
    pub fn build(&self) -> Result<LinearSystemInstance> {
        let terms = self
            .a
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let p: PauliString = t.pauli.parse().map_err(|e| schema(format!("a[{i}].pauli: {e}")))?;
                Ok((p, C64::new(t.re, t.im)))
            })
            .collect::<Result<Vec<_>>>()?;
        LinearSystemInstance::new(terms, self.kappa, self.b_prep.build()?, self.observable.build()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDoc {
    pub hamiltonian: HamiltonianDoc,
    pub mu: f64,
    pub delta: f64,
    pub guess_prep: ProgramDoc,
    pub gamma: f64,
    pub observable: ObservableDoc,
}

impl TaskDoc {
    pub fn build(&self) -> Result<GroundStateTask> {
        Ok(GroundStateTask {
            h: self.hamiltonian.build()?,
            mu: self.mu,
            delta: self.delta,
            guess_prep: self.guess_prep.build()?,
            gamma: self.gamma,
            observable: self.observable.build()?,
        })
    }
}

/// `{"thetas": […], "phis": […], "gamma": x}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleDoc {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub gamma: f64,
}

impl From<&GqspAngles> for AngleDoc {
    fn from(a: &GqspAngles) -> Self {
        Self {
            thetas: a.theta.clone(),
            phis: a.phi.clone(),
            gamma: a.lambda,
        }
    }
}

impl AngleDoc {
    /// Imported angles carry no synthesis metadata; `scale` is taken as 1.
    pub fn build(&self) -> Result<GqspAngles> {
        let len = self.thetas.len();
        if len == 0 || len % 2 == 0 || self.phis.len() != len {
            return Err(schema("angles: thetas and phis need equal odd length 2d + 1"));
        }
        Ok(GqspAngles {
            d: (len - 1) / 2,
            theta: self.thetas.clone(),
            phi: self.phis.clone(),
            lambda: self.gamma,
            scale: 1.0,
            completion: CompletionMethod::Trivial,
            max_residual: 0.0,
        })
    }
}

pub fn export_matrix(m: &CMat) -> Vec<ComplexPair> {
    flatten(m)
}

/// Parse JSON, naming the offending path on failure.
pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| schema(e.to_string()))
}
