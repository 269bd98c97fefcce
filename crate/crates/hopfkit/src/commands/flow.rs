use hopf_core::ansatz::{sigma2_profile, uniform_nodes};
use hopf_core::energy::closed_form_sigma2_energy;
use hopf_core::variation::{gradient_flow, EnergyKind};
use hopf_core::{MetricFamily, Profile};
use serde::Serialize;

use crate::cli::{FlowKind, FlowTask, Init};
use crate::format::Table;
use crate::io::{profile_table, Output};
use crate::{Outcome, Result};

#[derive(Debug, Serialize)]
struct FlowReport {
    command: &'static str,
    k: i64,
    l: i64,
    kind: &'static str,
    init: &'static str,
    intervals: usize,
    status: &'static str,
    steps: usize,
    converged: bool,
    energy: f64,
    grad_norm: f64,
    /// Closed-form energy and distance to the closed-form profile, σ₂ flows only.
    e_closed: Option<f64>,
    energy_rel_error: Option<f64>,
    closed_form_deviation: Option<f64>,
}

pub fn run(task: &FlowTask, out: &Output) -> Result<Outcome> {
    let c = task.charge;
    let nodes = uniform_nodes(task.intervals);
    let initial = match task.init {
        Init::Linear => Profile::Linear.sample(nodes)?,
        Init::ClosedForm => sigma2_profile(c).sample(nodes)?,
    };
    let kind = match task.kind {
        FlowKind::Sigma1 => EnergyKind::Sigma1,
        FlowKind::Sigma2 => EnergyKind::Sigma2,
        FlowKind::Sigma12 => EnergyKind::Sigma12 { coupling: task.coupling },
        FlowKind::Quartic => EnergyKind::Quartic,
    };
    let state = gradient_flow(&initial, c, kind, &MetricFamily::canonical(task.radius), &task.flow)?;

    let mut history = Table::new(&["step", "energy", "grad_norm", "step_size"]);
    for (i, (&e, &g)) in state.energy_history.iter().zip(&state.grad_norm_history).enumerate() {
        let step = if i == 0 { 0.0 } else { state.step_history[i - 1] };
        history.push_numbers(&[i as f64, e, g, step]);
    }
    out.csv("history.csv", &history)?;
    out.csv("profile.csv", &profile_table(&state.profile))?;

    let sigma2 = task.kind == FlowKind::Sigma2;
    let e_closed = sigma2.then(|| closed_form_sigma2_energy(c, task.radius));
    let outcome = if state.converged { Outcome::Success } else { Outcome::Failure };
    if !state.converged {
        eprintln!("flow stopped after {} steps without reaching the gradient tolerance", state.steps);
    }
    let report = FlowReport {
        command: "flow",
        k: c.k(),
        l: c.l(),
        kind: kind.tag(),
        init: match task.init {
            Init::Linear => "linear",
            Init::ClosedForm => "closed-form",
        },
        intervals: task.intervals,
        status: outcome.status(),
        steps: state.steps,
        converged: state.converged,
        energy: state.energy(),
        grad_norm: state.grad_norm(),
        e_closed,
        energy_rel_error: e_closed.map(|e| (state.energy() / e - 1.0).abs()),
        closed_form_deviation: sigma2.then(|| state.profile.max_deviation(&sigma2_profile(c))),
    };
    out.json("report.json", &report)?;
    out.summary(&report)?;
    Ok(outcome)
}
