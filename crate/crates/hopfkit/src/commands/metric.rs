use hopf_core::ansatz::sigma2_profile;
use hopf_core::metricchange::{
    certificate_grid, certify_biconformal_hc, certify_conformal_sigma12, certify_lemma_le, certify_remark_c,
    lemma_le_predicate, sigma_for_full_criticality,
};
use hopf_core::real::Real;
use hopf_core::Charge;
use serde::Serialize;

use crate::cli::{MetricTask, Recipe};
use crate::format::g17;
use crate::io::Output;
use crate::{Outcome, Result};

/// Recipe-specific diagnostics.
#[derive(Debug, Serialize)]
#[serde(untagged)]
enum Details {
    Biconformal {
        spectrum_error: f64,
        sigma2_residual: f64,
        harmonic_residual: f64,
        sigma12_residual: f64,
    },
    Conformal {
        theta: f64,
        predicate: f64,
        sigma12_residual: f64,
        factor_consistency: f64,
    },
    RemarkC {
        sigma12_residual: f64,
        sigma2_residual: f64,
        harmonic_residual: f64,
        sigma_min: f64,
        sigma_max: f64,
    },
    Lemma {
        exponent: f64,
        epsilon: f64,
        predicate: f64,
        sigma2_residual: f64,
    },
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct MetricReport {
    command: &'static str,
    recipe: &'static str,
    k: i64,
    l: i64,
    R: f64,
    K: f64,
    status: &'static str,
    /// The defining condition of the metric change.
    predicate: f64,
    predicate_tol: f64,
    /// The criticality residual under the new metric.
    residual: f64,
    residual_tol: f64,
    grid_size: usize,
    details: Details,
}

fn tag(r: Recipe) -> &'static str {
    match r {
        Recipe::BiconformalHc => "biconformal-hc",
        Recipe::ConformalSigma12 => "conformal-sigma12",
        Recipe::RemarkC => "remark-c",
        Recipe::LemmaLe => "lemma-le",
    }
}

/// `(predicate, residual, details)` for the recipe.
fn evaluate(task: &MetricTask, c: Charge, grid: &[f64]) -> Result<(f64, f64, Details)> {
    let r = task.radius;
    Ok(match task.recipe {
        Recipe::BiconformalHc => {
            let cert = certify_biconformal_hc(c, r, task.intervals, grid)?;
            (
                cert.spectrum_error,
                cert.sigma2_residual,
                Details::Biconformal {
                    spectrum_error: cert.spectrum_error,
                    sigma2_residual: cert.sigma2_residual,
                    harmonic_residual: cert.harmonic_residual,
                    sigma12_residual: cert.sigma12_residual,
                },
            )
        }
        Recipe::ConformalSigma12 => {
            let cert = certify_conformal_sigma12(c, r, task.coupling, task.intervals, grid)?;
            (
                cert.predicate,
                cert.sigma12_residual,
                Details::Conformal {
                    theta: cert.theta,
                    predicate: cert.predicate,
                    sigma12_residual: cert.sigma12_residual,
                    factor_consistency: cert.factor_consistency,
                },
            )
        }
        Recipe::RemarkC => {
            let p = sigma2_profile(c);
            let cert = certify_remark_c(&p, c, r, &[task.coupling], task.intervals, grid)?;
            // The change is σ⁻² g^H + σ⁻⁴ g^V, so its predicate d/ds(σ²/ρ) should vanish for ρ = σ².
            let sigma = sigma_for_full_criticality(&p, c, r, task.intervals)?.sigma();
            let s1 = sigma.clone();
            let rho = hopf_core::s3geom::scalar_fn(move |s| s1(s).sq());
            let predicate = grid
                .iter()
                .map(|&s| lemma_le_predicate(&sigma, &rho, 3, s).abs())
                .fold(0.0, f64::max);
            let residual = cert.sigma12_residuals.iter().map(|&(_, v)| v).fold(0.0, f64::max);
            (
                predicate,
                residual,
                Details::RemarkC {
                    sigma12_residual: residual,
                    sigma2_residual: cert.sigma2_residual,
                    harmonic_residual: cert.harmonic_residual,
                    sigma_min: cert.sigma_min,
                    sigma_max: cert.sigma_max,
                },
            )
        }
        Recipe::LemmaLe => {
            let cert = certify_lemma_le(&sigma2_profile(c), c, r, task.epsilon, task.exponent, grid)?;
            (
                cert.predicate,
                cert.sigma2_residual,
                Details::Lemma {
                    exponent: cert.exponent,
                    epsilon: task.epsilon,
                    predicate: cert.predicate,
                    sigma2_residual: cert.sigma2_residual,
                },
            )
        }
    })
}

pub fn run(task: &MetricTask, out: &Output) -> Result<Outcome> {
    let c = task.charge;
    let grid = certificate_grid(task.grid);
    let (predicate, residual, details) = evaluate(task, c, &grid)?;
    let pass = predicate < task.predicate_tol && residual < task.residual_tol;
    let outcome = if pass { Outcome::Success } else { Outcome::Violation };
    if !pass {
        eprintln!(
            "{}: predicate {} (tol {}), residual {} (tol {})",
            tag(task.recipe),
            g17(predicate),
            g17(task.predicate_tol),
            g17(residual),
            g17(task.residual_tol)
        );
    }
    let report = MetricReport {
        command: "metric",
        recipe: tag(task.recipe),
        k: c.k(),
        l: c.l(),
        R: task.radius,
        K: task.coupling,
        status: outcome.status(),
        predicate,
        predicate_tol: task.predicate_tol,
        residual,
        residual_tol: task.residual_tol,
        grid_size: grid.len(),
        details,
    };
    out.json("report.json", &report)?;
    out.summary(&report)?;
    Ok(outcome)
}
