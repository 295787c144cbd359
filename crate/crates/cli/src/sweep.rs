//! Parameter sweeps emitted as CSV: one row per point, then one fit row.
//!
//! | axis  | value              | error                         | cost                     | fit                         |
//! |-------|--------------------|-------------------------------|--------------------------|-----------------------------|
//! | `t`   | evolution time     | `‖e^{−iHt} − S_2k(t)‖`        | exponentials             | slope of ln error vs ln t   |
//! | `s`   | Trotter step `s`   | `|f(s) − f(0)|`               | exponentials             | slope of ln error vs ln s   |
//! | `T`   | adiabatic steps    | `1 − overlap`                 | `T`                      | slope of ln error vs ln T   |
//! | `delta` | filter gap `Δ`   | certified sup error           | degree                   | slope of ln degree vs ln Δ  |
//! | `eps` | target accuracy    | `|estimate − exact|`          | max-depth exponentials   | slope of ln error vs ln eps |
//! | `m`   | node count         | `|estimate − exact|`          | total exponentials       | slope of ln error vs m      |

use rayon::prelude::*;

use qsvt_core::interleaved::{self, TrotterRun};
use qsvt_core::product_formula::{formula_error, formula_error_extended, loglog_slope, suzuki};
use qsvt_core::{funcapprox, qls, EstimationMode, HermitianTerm};

use crate::commands::{sim, Outcome, Settings};
use crate::config::{Resolved, SweepSpec};
use crate::CliError;

pub const AXES: [&str; 6] = ["t", "s", "T", "delta", "eps", "m"];

struct Point {
    value: f64,
    error: f64,
    cost: f64,
}

fn need<'a, T>(v: &'a Option<T>, field: &str, axis: &str) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| CliError::Schema(format!("task.{field}: required for axis {axis:?}")))
}

fn positive_integers(values: &[f64], axis: &str) -> Result<Vec<u64>, CliError> {
    values
        .iter()
        .map(|&v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                Err(CliError::Schema(format!("task.values: {v} is not a positive integer ({axis} axis)")))
            }
        })
        .collect()
}

fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn run(res: &Resolved, spec: &SweepSpec, st: &Settings) -> Result<Outcome, CliError> {
    if !AXES.contains(&spec.axis.as_str()) {
        return Err(CliError::Schema(format!(
            "task.axis: unsupported {:?}; expected one of {}",
            spec.axis,
            AXES.join(", ")
        )));
    }
    if spec.values.is_empty() {
        return Err(CliError::Schema("task.values: empty axis list".into()));
    }
    if spec.values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(CliError::Schema("task.values: entries must be positive".into()));
    }
    let points = match spec.axis.as_str() {
        "t" => time_axis(res, spec, st)?,
        "s" => step_axis(res, spec, st)?,
        "T" => adiabatic_axis(spec)?,
        "delta" => delta_axis(spec, st)?,
        "eps" => eps_axis(res, spec, st)?,
        "m" => m_axis(res, spec, st)?,
        _ => unreachable!("axis checked above"),
    };
    let xs: Vec<f64> = points.iter().map(|p| p.value).collect();
    let errs: Vec<f64> = points.iter().map(|p| p.error).collect();
    let slope = if points.len() < 2 {
        f64::NAN
    } else {
        match spec.axis.as_str() {
            "delta" => loglog_slope(&xs, &points.iter().map(|p| p.cost).collect::<Vec<_>>()),
            "m" => linear_slope(&xs, &errs.iter().map(|e| e.ln()).collect::<Vec<_>>()),
            _ => loglog_slope(&xs, &errs),
        }
    };
    let mut w = csv::Writer::from_writer(vec![]);
    let io_err = |e: csv::Error| CliError::Simulation(e.to_string());
    w.write_record(["row", "axis", "value", "error", "cost", "slope"]).map_err(io_err)?;
    for p in &points {
        w.write_record(["point", &spec.axis, &p.value.to_string(), &p.error.to_string(), &p.cost.to_string(), ""])
            .map_err(io_err)?;
    }
    w.write_record(["fit", &spec.axis, "", "", "", &slope.to_string()]).map_err(io_err)?;
    let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Simulation(e.to_string()))?).expect("ascii");
    Ok(Outcome { body, mismatch: None })
}

fn time_axis(res: &Resolved, spec: &SweepSpec, st: &Settings) -> Result<Vec<Point>, CliError> {
    let h = res.hamiltonian(need(&spec.hamiltonian, "hamiltonian", "t")?)?;
    let pf = suzuki(st.order, h.len()).map_err(sim)?;
    let paulis = h.terms().iter().all(|t| matches!(t, HermitianTerm::Pauli { .. }));
    let cost = pf.exponential_count(1) as f64;
    spec.values
        .par_iter()
        .map(|&t| {
            let error = if paulis {
                formula_error_extended(h, &pf, t)
            } else {
                formula_error(h, &pf, t)
            }
            .map_err(sim)?;
            Ok(Point { value: t, error, cost })
        })
        .collect()
}

fn step_axis(res: &Resolved, spec: &SweepSpec, st: &Settings) -> Result<Vec<Point>, CliError> {
    let (circ, psi, meas) = res.readout(need(&spec.readout, "readout", "s")?)?;
    let m_seg = circ.segment_count().max(1) as f64;
    let exact = interleaved::exact_expectation(&circ, &psi, &meas).map_err(sim)?.value;
    spec.values
        .par_iter()
        .map(|&s| {
            let inv = (1.0 / s).round();
            if ((inv * s) - 1.0).abs() > 1e-9 || (inv as u64) % (m_seg as u64) != 0 {
                return Err(CliError::Schema(format!("task.values: 1/s = {} is not a multiple of M = {m_seg}", 1.0 / s)));
            }
            let run = TrotterRun::new(st.order, inv as u64, circ.segment_count()).map_err(sim)?;
            let r = interleaved::trotterized_expectation(&circ, &psi, &meas, &run, &EstimationMode::ExactRead, 0, 0)
                .map_err(sim)?;
            let pf = suzuki(st.order, 1).map_err(sim)?;
            let cost = inv * pf.upsilon() as f64 * circ.gamma_avg();
            Ok(Point {
                value: s,
                error: (r.value - exact).abs(),
                cost,
            })
        })
        .collect()
}

fn adiabatic_axis(spec: &SweepSpec) -> Result<Vec<Point>, CliError> {
    let inst = need(&spec.instance, "instance", "T")?
        .build()
        .map_err(|e| CliError::Schema(format!("task.instance: {e}")))?;
    let ts = positive_integers(&spec.values, "T")?;
    ts.par_iter()
        .map(|&t| {
            let overlap = qls::adiabatic_overlap(&inst, t as usize).map_err(sim)?;
            Ok(Point {
                value: t as f64,
                error: 1.0 - overlap,
                cost: t as f64,
            })
        })
        .collect()
}

fn delta_axis(spec: &SweepSpec, st: &Settings) -> Result<Vec<Point>, CliError> {
    spec.values
        .par_iter()
        .map(|&d| {
            let rep = funcapprox::filter(d, st.eps).map_err(|e| CliError::Schema(e.to_string()))?;
            Ok(Point {
                value: d,
                error: rep.measured_sup_error,
                cost: rep.degree() as f64,
            })
        })
        .collect()
}

fn eps_axis(res: &Resolved, spec: &SweepSpec, st: &Settings) -> Result<Vec<Point>, CliError> {
    let (circ, psi, meas) = res.readout(need(&spec.readout, "readout", "eps")?)?;
    let exact = interleaved::exact_expectation(&circ, &psi, &meas).map_err(sim)?.value;
    spec.values
        .iter()
        .map(|&eps| {
            let mut cfg = st.extrapolation();
            cfg.eps = eps;
            let (est, rep) = interleaved::extrapolated_estimate(&circ, &psi, &meas, &cfg).map_err(sim)?;
            Ok(Point {
                value: eps,
                error: (est - exact).abs(),
                cost: rep.resources.max_depth_exponentials,
            })
        })
        .collect()
}

fn m_axis(res: &Resolved, spec: &SweepSpec, st: &Settings) -> Result<Vec<Point>, CliError> {
    let (circ, psi, meas) = res.readout(need(&spec.readout, "readout", "m")?)?;
    let exact = interleaved::exact_expectation(&circ, &psi, &meas).map_err(sim)?.value;
    let ms = positive_integers(&spec.values, "m")?;
    // Fixed s0 so only the node count changes.
    let inv_s0 = match st.inv_s0 {
        Some(v) => v,
        None => {
            let (q0, _) = interleaved::base_q0(&circ, st.order).map_err(sim)?;
            q0 * circ.segment_count().max(1) as u64
        }
    };
    ms.iter()
        .map(|&m| {
            let mut cfg = st.extrapolation();
            cfg.m = Some(m as usize);
            cfg.inv_s0 = Some(inv_s0);
            let (est, rep) = interleaved::extrapolated_estimate(&circ, &psi, &meas, &cfg).map_err(sim)?;
            Ok(Point {
                value: m as f64,
                error: (est - exact).abs(),
                cost: rep.resources.total_exponentials,
            })
        })
        .collect()
}
