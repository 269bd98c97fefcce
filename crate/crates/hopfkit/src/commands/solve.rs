use hopf_core::ansatz::{harmonic_profile, hc_closed_form, hc_profile, sigma2_profile, HcConfig};
use hopf_core::criticality::{
    interior_grid, residual_harmonic, residual_hc, residual_sigma2, shoot_harmonic, shoot_sigma2, Equation,
    HarmonicShot, MismatchScan, ResidualReport,
};
use hopf_core::{DiscreteProfile, Profile};
use serde::Serialize;

use crate::cli::{SolveTask, SolveType};
use crate::format::{g17, Table};
use crate::io::{profile_table, Output};
use crate::{Outcome, Result};

#[derive(Debug, Serialize)]
pub struct ResidualSummary {
    pub equation: &'static str,
    pub norm_inf: f64,
    pub norm_l2: f64,
    pub grid_size: usize,
    pub relative_inf: f64,
}

impl From<&ResidualReport> for ResidualSummary {
    fn from(r: &ResidualReport) -> Self {
        Self {
            equation: r.equation.tag(),
            norm_inf: r.norm_inf,
            norm_l2: r.norm_l2,
            grid_size: r.grid.len(),
            relative_inf: r.relative_inf,
        }
    }
}

#[derive(Debug, Serialize)]
struct ScanSummary {
    points: usize,
    sign_constant: bool,
    min_abs_mismatch: f64,
}

#[derive(Debug, Serialize)]
struct SolveReport {
    command: &'static str,
    #[serde(rename = "type")]
    kind: &'static str,
    k: i64,
    l: i64,
    status: &'static str,
    threshold: f64,
    intervals: usize,
    residual: Option<ResidualSummary>,
    /// Sup-norm distance to the closed form, where one exists.
    closed_form_deviation: Option<f64>,
    scan: Option<ScanSummary>,
}

fn residual_table(r: &ResidualReport) -> Table {
    let mut t = Table::new(&["s", "residual", "scale"]);
    for ((&s, &v), &c) in r.grid.iter().zip(&r.residuals).zip(&r.scales) {
        t.push_numbers(&[s, v, c]);
    }
    t
}

fn scan_table(scan: &MismatchScan) -> Table {
    let mut t = Table::new(&["slope", "mismatch"]);
    for (&c, &m) in scan.slopes.iter().zip(&scan.mismatches) {
        t.rows.push(vec![g17(c), g17(m)]);
    }
    t
}

fn scan_summary(scan: &MismatchScan) -> ScanSummary {
    ScanSummary {
        points: scan.slopes.len(),
        sign_constant: scan.sign_constant(),
        min_abs_mismatch: scan.mismatches.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())),
    }
}

pub fn run(task: &SolveTask, out: &Output) -> Result<Outcome> {
    let c = task.charge;
    let grid = interior_grid(task.residual_nodes);
    let mut scan = None;
    let (profile, closed): (DiscreteProfile, Option<Profile>) = match task.kind {
        SolveType::Sigma2 => (shoot_sigma2(c, &task.shooting)?, Some(sigma2_profile(c))),
        SolveType::Hc => {
            let config = HcConfig {
                intervals: task.shooting.intervals,
                ..HcConfig::default()
            };
            (hc_profile(c, config)?, Some(hc_closed_form(c)))
        }
        SolveType::Harmonic => match shoot_harmonic(c, &task.shooting)? {
            HarmonicShot::Solution {
                profile,
                fitted_c,
                scan: s,
                ..
            } => {
                scan = Some(s);
                let closed = harmonic_profile(c.l().unsigned_abs() as u32, fitted_c).ok();
                (profile, closed)
            }
            HarmonicShot::NoSolution(s) => {
                eprintln!("no harmonic profile for charge ({}, {}): mismatch scan attached", c.k(), c.l());
                out.csv("scan.csv", &scan_table(&s))?;
                let report = SolveReport {
                    command: "solve",
                    kind: "harmonic",
                    k: c.k(),
                    l: c.l(),
                    status: Outcome::NoSolution.status(),
                    threshold: task.threshold,
                    intervals: task.shooting.intervals,
                    residual: None,
                    closed_form_deviation: None,
                    scan: Some(scan_summary(&s)),
                };
                out.json("report.json", &report)?;
                out.summary(&report)?;
                return Ok(Outcome::NoSolution);
            }
        },
    };
    let deviation = closed.as_ref().map(|p| profile.max_deviation(p));
    let p = Profile::Discrete(profile.clone());
    let report = match task.kind {
        SolveType::Sigma2 => ResidualReport::build(Equation::Sigma2Bracket, &grid, |s| Ok(residual_sigma2(&p, c, s).bracket)),
        SolveType::Harmonic => ResidualReport::build(Equation::Harmonic, &grid, |s| Ok(residual_harmonic(&p, c, s))),
        SolveType::Hc => ResidualReport::build(Equation::Hc, &grid, |s| Ok(residual_hc(&p, c, s))),
    }?;
    let outcome = if report.relative_inf < task.threshold {
        Outcome::Success
    } else {
        eprintln!(
            "residual {} exceeds threshold {}",
            g17(report.relative_inf),
            g17(task.threshold)
        );
        Outcome::Failure
    };
    out.csv("profile.csv", &profile_table(&profile))?;
    out.csv("residuals.csv", &residual_table(&report))?;
    if let Some(s) = &scan {
        out.csv("scan.csv", &scan_table(s))?;
    }
    let summary = SolveReport {
        command: "solve",
        kind: match task.kind {
            SolveType::Sigma2 => "sigma2",
            SolveType::Harmonic => "harmonic",
            SolveType::Hc => "hc",
        },
        k: c.k(),
        l: c.l(),
        status: outcome.status(),
        threshold: task.threshold,
        intervals: profile.nodes().len() - 1,
        residual: Some(ResidualSummary::from(&report)),
        closed_form_deviation: deviation,
        scan: scan.as_ref().map(scan_summary),
    };
    out.json("report.json", &summary)?;
    out.summary(&summary)?;
    Ok(outcome)
}
