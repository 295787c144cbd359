//! Task execution. Every command returns its output text plus an optional
//! oracle mismatch, so the caller can emit results before exiting with 4.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use qsvt_core::estimation::EstimationPlan;
use qsvt_core::funcapprox::{self, ApproximationReport};
use qsvt_core::groundstate::{self, GroundStateConfig, GroundStateTask};
use qsvt_core::interleaved::{self, ExtrapolationConfig, ExtrapolationReport};
use qsvt_core::qls::{self, LinearSystemInstance, QlsConfig};
use qsvt_core::{gqsp, io, EstimationMode, ExtrapolationScheme, InterleavedCircuit, Variant};

use crate::config::{parse_mode, ExperimentConfig, ReadoutSpec, Resolved, TaskSpec};
use crate::{sweep, CliError, GlobalArgs};

/// Dense oracles are computed for `--check` up to this many qubits.
pub const CHECK_MAX_QUBITS: usize = 12;

pub struct Outcome {
    pub body: String,
    pub mismatch: Option<String>,
}

impl Outcome {
    fn json(v: &Value, mismatch: Option<String>) -> Self {
        let mut body = serde_json::to_string_pretty(v).expect("serializable");
        body.push('\n');
        Outcome { body, mismatch }
    }
}

pub fn sim(e: qsvt_core::Error) -> CliError {
    match e {
        qsvt_core::Error::Schema(m) => CliError::Schema(m),
        other => CliError::Simulation(other.to_string()),
    }
}

/// Flags override the config file, which overrides defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub eps: f64,
    pub order: usize,
    pub mode: EstimationMode,
    pub mode_text: String,
    pub m: Option<usize>,
    pub inv_s0: Option<u64>,
    pub check: bool,
    pub seed: u64,
}

impl Settings {
    pub fn resolve(args: &GlobalArgs, cfg: Option<&ExperimentConfig>, default_eps: f64) -> Result<Self, CliError> {
        let ext = cfg.map(|c| c.extrapolation.clone()).unwrap_or_default();
        let seed = args.seed.or(cfg.and_then(|c| c.seed)).unwrap_or(0);
        let mode_text = args
            .mode
            .clone()
            .or_else(|| cfg.and_then(|c| c.estimation.clone()))
            .unwrap_or_else(|| "exact-read".into());
        let mode = parse_mode(&mode_text, seed)?;
        let eps = args.eps.or(ext.eps).unwrap_or(default_eps);
        if !(eps > 0.0 && eps < 1.0) {
            return Err(CliError::Schema(format!("eps: {eps} not in (0, 1)")));
        }
        let order = args.order.or(ext.order).unwrap_or(1);
        if order == 0 {
            return Err(CliError::Schema("order: must be at least 1".into()));
        }
        let m = args.m.or(ext.m);
        if m == Some(0) {
            return Err(CliError::Schema("m: must be at least 1".into()));
        }
        let inv_s0 = match args.s0 {
            Some(s0) => Some(inverse_step(s0)?),
            None => ext.inv_s0,
        };
        Ok(Self {
            eps,
            order,
            mode,
            mode_text,
            m,
            inv_s0,
            check: args.check,
            seed,
        })
    }

    pub fn extrapolation(&self) -> ExtrapolationConfig {
        let mut cfg = ExtrapolationConfig::new(self.order, self.eps, self.mode.clone());
        cfg.m = self.m;
        cfg.inv_s0 = self.inv_s0;
        cfg
    }

    fn echo(&self) -> Value {
        json!({
            "eps": self.eps,
            "order": self.order,
            "mode": self.mode_text,
            "m": self.m,
            "inv_s0": self.inv_s0,
            "seed": self.seed,
            "check": self.check,
        })
    }
}

/// `s0` must be the reciprocal of a positive integer.
fn inverse_step(s0: f64) -> Result<u64, CliError> {
    let inv = (1.0 / s0).round();
    if !(s0 > 0.0 && s0 <= 1.0) || ((inv * s0) - 1.0).abs() > 1e-9 {
        return Err(CliError::Schema(format!("s0: {s0} is not 1/q for a positive integer q")));
    }
    Ok(inv as u64)
}

fn mode_seed(mode: &EstimationMode) -> Option<u64> {
    match mode {
        EstimationMode::ExactRead => None,
        EstimationMode::Shots { seed, .. } | EstimationMode::Coherent { seed, .. } => Some(*seed),
    }
}

fn mode_name(mode: &EstimationMode) -> &'static str {
    match mode {
        EstimationMode::ExactRead => "exact-read",
        EstimationMode::Shots { .. } => "shots",
        EstimationMode::Coherent { .. } => "coherent",
    }
}

fn scheme_echo(s: &ExtrapolationScheme) -> Value {
    json!({
        "m": s.m,
        "s0": s.s0,
        "inv_s0": s.inv_s0,
        "variant": s.variant,
        "r": s.r,
        "b": s.b,
        "b_norm1": s.b_norm1,
    })
}

fn plan_echo(mode: &EstimationMode, rep: &ExtrapolationReport) -> Value {
    json!({
        "mode": mode_name(mode),
        "shots": rep.nodes.first().map(|n| n.shots).unwrap_or(0),
        "seed": mode_seed(mode),
        "iqae_rounds": rep.nodes.iter().map(|n| n.iqae_rounds).collect::<Vec<_>>(),
    })
}

/// Common block for any run that went through the extrapolation engine.
fn engine_block(mode: &EstimationMode, rep: &ExtrapolationReport) -> Value {
    json!({
        "plan": plan_echo(mode, rep),
        "scheme": scheme_echo(&rep.scheme),
        "q0": rep.q0,
        "lambda_comm_bound": rep.lambda_comm_bound,
        "residual": rep.residual,
        "shrinks": rep.shrinks,
        "nodes": rep.nodes,
        "resources": rep.resources,
    })
}

fn check_block(estimate: f64, oracle: f64, tolerance: f64, what: &str) -> (Value, Option<String>) {
    let error = (estimate - oracle).abs();
    let pass = error <= tolerance;
    let v = json!({ "oracle": oracle, "error": error, "tolerance": tolerance, "pass": pass });
    let mismatch = (!pass).then(|| format!("{what}: |estimate − oracle| = {error:e} exceeds {tolerance:e}"));
    (v, mismatch)
}

fn skipped(n: usize) -> (Value, Option<String>) {
    (json!({ "skipped": format!("{n} qubits exceeds the dense limit {CHECK_MAX_QUBITS}") }), None)
}

fn header(command: &str, task: &str, st: &Settings, config: Option<&Value>) -> serde_json::Map<String, Value> {
    let mut out = serde_json::Map::new();
    out.insert("schema".into(), json!(io::SCHEMA_VERSION));
    out.insert("command".into(), json!(command));
    out.insert("task".into(), json!(task));
    out.insert("settings".into(), st.echo());
    if let Some(c) = config {
        out.insert("config".into(), c.clone());
    }
    out
}

pub fn run_config(command: &str, cfg: &ExperimentConfig, raw: &Value, args: &GlobalArgs) -> Result<Outcome, CliError> {
    let res = Resolved::build(cfg)?;
    let default_eps = match cfg.task {
        TaskSpec::Qls { .. } | TaskSpec::Gse { .. } => 1e-2,
        _ => 1e-3,
    };
    let st = Settings::resolve(args, Some(cfg), default_eps)?;
    match &cfg.task {
        TaskSpec::Interleaved(spec) => run_interleaved(command, &res, spec, &st, raw),
        TaskSpec::Qls { instance, t_steps } => {
            let inst = instance.build().map_err(|e| CliError::Schema(format!("task.instance: {e}")))?;
            run_qls(command, &inst, *t_steps, &st, Some(raw))
        }
        TaskSpec::Gse { task } => {
            let task = task.build().map_err(|e| CliError::Schema(format!("task.task: {e}")))?;
            run_gse(command, &task, &st, Some(raw))
        }
        TaskSpec::Approx {
            function,
            params,
            coeffs,
        } => run_approx(command, function, params, coeffs, false, &st, Some(raw)),
        TaskSpec::Sweep(spec) => sweep::run(&res, spec, &st),
        TaskSpec::Resources { circuit } => run_resources(command, res.circuit(circuit)?, &st, raw),
    }
}

fn run_interleaved(command: &str, res: &Resolved, spec: &ReadoutSpec, st: &Settings, raw: &Value) -> Result<Outcome, CliError> {
    let (circ, psi, meas) = res.readout(spec)?;
    let (estimate, rep) = interleaved::extrapolated_estimate(&circ, &psi, &meas, &st.extrapolation()).map_err(sim)?;
    let mut out = header(command, "interleaved", st, Some(raw));
    out.insert("estimate".into(), json!(estimate));
    out.insert("engine".into(), engine_block(&st.mode, &rep));
    let mut mismatch = None;
    if st.check {
        let n = circ.num_qubits();
        let (v, m) = if n <= CHECK_MAX_QUBITS {
            let oracle = interleaved::exact_expectation(&circ, &psi, &meas).map_err(sim)?.value;
            check_block(estimate, oracle, st.eps * meas.norm(), "interleaved")
        } else {
            skipped(n)
        };
        out.insert("check".into(), v);
        mismatch = m;
    }
    Ok(Outcome::json(&Value::Object(out), mismatch))
}

pub fn run_qls(
    command: &str,
    inst: &LinearSystemInstance,
    t_steps: Option<usize>,
    st: &Settings,
    raw: Option<&Value>,
) -> Result<Outcome, CliError> {
    let cfg = QlsConfig {
        eps: st.eps,
        k: st.order,
        mode: st.mode.clone(),
        t_steps,
        m: st.m,
        inv_s0: st.inv_s0,
    };
    let (estimate, rep) = qls::solve_and_estimate(inst, &cfg).map_err(sim)?;
    let mut out = header(command, "qls", st, raw);
    out.insert("estimate".into(), json!(estimate));
    if inst.n <= CHECK_MAX_QUBITS {
        out.insert("classical_reference".into(), json!(rep.classical_reference));
    }
    out.insert("overlap_after_adiabatic".into(), json!(rep.overlap_after_adiabatic));
    out.insert("filter_acceptance".into(), json!(rep.filter_acceptance));
    out.insert(
        "pipeline".into(),
        json!({
            "kappa": rep.kappa,
            "t_steps": rep.t_steps,
            "filter_degree": rep.filter_degree,
            "filter_delta": rep.filter_delta,
            "ancillas": rep.ancillas,
            "simulated_qubits": rep.simulated_qubits,
        }),
    );
    out.insert("engine".into(), engine_block(&st.mode, &rep.extrapolation));
    let mut mismatch = None;
    if st.check {
        let (v, m) = if inst.n <= CHECK_MAX_QUBITS {
            check_block(estimate, rep.classical_reference, st.eps * inst.observable.norm, "qls")
        } else {
            skipped(inst.n)
        };
        out.insert("check".into(), v);
        mismatch = m;
    }
    Ok(Outcome::json(&Value::Object(out), mismatch))
}

pub fn run_gse(command: &str, task: &GroundStateTask, st: &Settings, raw: Option<&Value>) -> Result<Outcome, CliError> {
    let cfg = GroundStateConfig {
        eps: st.eps,
        k: st.order,
        mode: st.mode.clone(),
        m: st.m,
        inv_s0: st.inv_s0,
    };
    let (estimate, rep) = groundstate::estimate_property(task, &cfg).map_err(sim)?;
    let n = task.num_qubits();
    let mut out = header(command, "gse", st, raw);
    out.insert("estimate".into(), json!(estimate));
    if n <= CHECK_MAX_QUBITS {
        out.insert("dense_reference".into(), json!(rep.facts.reference));
    }
    out.insert("post_filter_overlap".into(), json!(rep.post_filter_overlap));
    out.insert(
        "pipeline".into(),
        json!({
            "ground_energy": rep.facts.ground_energy,
            "first_excited": rep.facts.first_excited,
            "guess_overlap": rep.facts.guess_overlap,
            "filter_degree": rep.filter_degree,
            "eps_filter": rep.eps_filter,
            "aa_length": rep.aa_length,
            "success_probability": rep.success_probability,
            "ancillas": rep.ancillas,
            "simulated_qubits": rep.simulated_qubits,
        }),
    );
    out.insert("engine".into(), engine_block(&st.mode, &rep.extrapolation));
    let mut mismatch = None;
    if st.check {
        let (v, m) = if n <= CHECK_MAX_QUBITS {
            check_block(estimate, rep.facts.reference, st.eps * task.observable.norm, "gse")
        } else {
            skipped(n)
        };
        out.insert("check".into(), v);
        mismatch = m;
    }
    Ok(Outcome::json(&Value::Object(out), mismatch))
}

fn require(params: &BTreeMap<String, f64>, name: &str) -> Result<f64, CliError> {
    params
        .get(name)
        .copied()
        .ok_or_else(|| CliError::Schema(format!("params.{name}: required")))
}

/// Build the named construction. `eps` comes from the settings.
pub fn approximation(
    function: &str,
    params: &BTreeMap<String, f64>,
    coeffs: &[f64],
    eps: f64,
) -> Result<ApproximationReport, CliError> {
    let r = match function {
        "sign" => funcapprox::sign_approx(require(params, "delta")?, eps),
        "shifted-sign" => funcapprox::shifted_sign(require(params, "mu")?, require(params, "delta")?, eps),
        "rectangle" => funcapprox::rectangle(require(params, "t")?, require(params, "delta")?, eps),
        "filter" => funcapprox::filter(require(params, "delta")?, eps),
        "inverse" => funcapprox::inverse(require(params, "kappa")?, eps).map(|(r, _)| r),
        "exp" => funcapprox::exponential(require(params, "beta")?, eps),
        "poly2laurent" => {
            if coeffs.is_empty() {
                return Err(CliError::Schema("coeffs: poly2laurent needs monomial coefficients".into()));
            }
            funcapprox::poly_to_laurent(coeffs, require(params, "delta")?, eps)
        }
        other => {
            return Err(CliError::Schema(format!(
                "function: unknown {other:?}; expected sign, shifted-sign, rectangle, filter, inverse, exp or poly2laurent"
            )))
        }
    };
    r.map_err(|e| match e {
        qsvt_core::Error::InvalidParameter { .. } => CliError::Schema(e.to_string()),
        other => sim(other),
    })
}

pub fn run_approx(
    command: &str,
    function: &str,
    params: &BTreeMap<String, f64>,
    coeffs: &[f64],
    with_angles: bool,
    st: &Settings,
    raw: Option<&Value>,
) -> Result<Outcome, CliError> {
    let rep = approximation(function, params, coeffs, st.eps)?;
    let mut out = header(command, "approx", st, raw);
    let admissible = rep.is_admissible();
    let within = rep.measured_sup_error <= rep.eps;
    out.insert("function".into(), json!(function));
    out.insert("degree".into(), json!(rep.degree()));
    out.insert("admissible".into(), json!(admissible));
    out.insert("within_eps".into(), json!(within));
    out.insert("report".into(), serde_json::to_value(&rep).expect("serializable"));
    if with_angles {
        let angles = gqsp::synthesize_angles(&rep.polynomial).map_err(sim)?;
        out.insert("angles".into(), serde_json::to_value(io::AngleDoc::from(&angles)).expect("serializable"));
        out.insert("angle_scale".into(), json!(angles.scale));
    }
    let mismatch = (st.check && !(admissible && within)).then(|| {
        format!(
            "approx {function}: sup error {:e} (eps {:e}), circle sup {:.12}",
            rep.measured_sup_error, rep.eps, rep.circle_sup_norm
        )
    });
    Ok(Outcome::json(&Value::Object(out), mismatch))
}

/// `k,re,im` rows for `P(z) = Σ_k c_k z^k`.
pub fn coefficient_csv(rep: &ApproximationReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(vec![]);
    let io_err = |e: csv::Error| CliError::Simulation(e.to_string());
    w.write_record(["k", "re", "im"]).map_err(io_err)?;
    let d = rep.polynomial.d as i64;
    for k in -d..=d {
        let c = rep.polynomial.coeff(k);
        w.write_record([k.to_string(), c.re.to_string(), c.im.to_string()]).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Simulation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

/// Accounting only: the scheme the engine would use, with no simulation.
pub fn run_resources(command: &str, circ: &InterleavedCircuit, st: &Settings, raw: &Value) -> Result<Outcome, CliError> {
    let cfg = st.extrapolation();
    let m = cfg.m.unwrap_or_else(|| cfg.default_m());
    let m_seg = circ.segment_count().max(1) as u64;
    let (q0, lam) = interleaved::base_q0(circ, st.order).map_err(sim)?;
    let inv_s0 = match cfg.inv_s0 {
        Some(v) if v % m_seg != 0 => {
            return Err(CliError::Schema(format!("inv_s0: {v} is not a multiple of M = {m_seg}")));
        }
        Some(v) => v,
        None => m_seg * q0,
    };
    let scheme = ExtrapolationScheme::with_inverse_step(m, inv_s0, Variant::Even).map_err(sim)?;
    let plan = EstimationPlan::new(st.mode.clone(), m, scheme.b_norm1, st.eps, cfg.delta_total).map_err(sim)?;
    let shots = vec![plan.shots_per_node.max(1); m];
    let report = interleaved::resource_report(circ, &scheme, st.order, &shots, cfg.ancillas);
    let mut out = header(command, "resources", st, Some(raw));
    out.insert(
        "plan".into(),
        json!({
            "mode": mode_name(&st.mode),
            "shots": plan.shots_per_node,
            "seed": mode_seed(&st.mode),
        }),
    );
    out.insert("scheme".into(), scheme_echo(&scheme));
    out.insert("q0".into(), json!(inv_s0 / m_seg));
    out.insert("lambda_comm_bound".into(), json!(lam));
    out.insert("resources".into(), serde_json::to_value(&report).expect("serializable"));
    Ok(Outcome::json(&Value::Object(out), None))
}
