use std::f64::consts::PI;

use hopf_core::ansatz::{sigma2_profile, BOUNDARY_TOL};
use hopf_core::criticality::interior_grid;
use hopf_core::energy::{closed_form_sigma2_energy, dirichlet_density, full_energy, sigma2_density, EnergyReport};
use hopf_core::Profile;
use serde::Serialize;

use crate::cli::EnergyTask;
use crate::format::Table;
use crate::io::{read_profile, Output};
use crate::{Outcome, Result};

#[derive(Debug, Serialize)]
pub struct QuadSummary {
    pub panels: usize,
    pub nodes: usize,
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
pub struct EnergySummary {
    pub k: i64,
    pub l: i64,
    pub Q: i64,
    pub R: f64,
    pub K: f64,
    pub e_sigma1: f64,
    pub e_sigma2: f64,
    pub e_full: f64,
    pub bound: f64,
    pub bound_ratio: f64,
    pub quad: QuadSummary,
    pub source: String,
    /// The closed-form σ₂ energy of the charge, for comparison.
    pub e_sigma2_closed: f64,
}

impl EnergySummary {
    fn new(r: &EnergyReport, radius: f64, source: String, e_sigma2_closed: f64) -> Self {
        Self {
            k: r.k,
            l: r.l,
            Q: r.q,
            R: radius,
            K: r.coupling,
            e_sigma1: r.e_sigma1,
            e_sigma2: r.e_sigma2,
            e_full: r.e_full,
            bound: r.bound,
            bound_ratio: r.bound_ratio,
            quad: QuadSummary {
                panels: r.panels,
                nodes: r.nodes_per_panel,
            },
            source,
            e_sigma2_closed,
        }
    }
}

pub fn run(task: &EnergyTask, out: &Output) -> Result<Outcome> {
    let c = task.charge;
    let (profile, source) = match &task.profile {
        Some(path) => {
            let p = Profile::Discrete(read_profile(path)?);
            p.check_boundary(BOUNDARY_TOL)?;
            (p, path.display().to_string())
        }
        None => (sigma2_profile(c), "closed-form".to_string()),
    };
    let report = full_energy(&profile, c, task.radius, task.coupling, &task.quad)?;
    let summary = EnergySummary::new(&report, task.radius, source, closed_form_sigma2_energy(c, task.radius));
    if task.plot_points >= 2 {
        let (w1, w2) = (2.0 * PI * PI * task.radius, 2.0 * PI * PI / task.radius);
        let mut plot = Table::new(&["s", "sigma1_integrand", "sigma2_integrand"]);
        for s in interior_grid(task.plot_points) {
            plot.push_numbers(&[s, w1 * dirichlet_density(&profile, c, s), w2 * sigma2_density(&profile, c, s)]);
        }
        out.csv("plot.csv", &plot)?;
    }
    out.json("report.json", &summary)?;
    out.summary(&summary)?;
    Ok(Outcome::Success)
}
