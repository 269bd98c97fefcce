//! Command-line arguments and their resolution into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hopf_core::criticality::ShootingConfig;
use hopf_core::quad::Quadrature;
use hopf_core::variation::FlowConfig;
use hopf_core::Charge;

use crate::config::ConfigFile;
use crate::error::{CliError, Result};
use crate::io::Output;

#[derive(Debug, Parser)]
#[command(name = "hopfkit", version, about = "Equivariant Faddeev-Hopf configurations on the three-sphere")]
pub struct Cli {
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the summary as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Print nothing on standard output.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    /// Directory for CSV and JSON output files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for a critical profile and report its residuals.
    Solve(SolveArgs),
    /// Energies of a closed-form or tabulated profile.
    Energy(EnergyArgs),
    /// Table of closed-form and quadrature energies over charges.
    Scan(ScanArgs),
    /// Discrete gradient flow of a reduced energy.
    Flow(FlowArgs),
    /// Apply a metric change and verify criticality under the new metric.
    Metric(MetricArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ChargeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    pub l: Option<i64>,
    /// Radius of the round sphere.
    #[arg(long, visible_alias = "R")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct QuadArgs {
    /// Gauss-Legendre panels on (0, pi/2).
    #[arg(long)]
    pub panels: Option<usize>,
    /// Nodes per panel.
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveType {
    Sigma2,
    Harmonic,
    Hc,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub charge: ChargeArgs,
    #[arg(long = "type", value_enum)]
    pub kind: Option<SolveType>,
    /// Intervals of the output grid.
    #[arg(long)]
    pub intervals: Option<usize>,
    /// Start offset from the singular ends.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Shoot on alpha directly instead of the linear route (sigma2 only).
    #[arg(long)]
    pub direct: bool,
    /// Largest accepted scale-relative residual.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Intervals of the residual grid.
    #[arg(long)]
    pub residual_nodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub charge: ChargeArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    /// Coupling of the sigma2 term.
    #[arg(long, visible_alias = "K")]
    pub coupling: Option<f64>,
    /// Profile CSV (`s,alpha`); the closed-form sigma2 profile otherwise.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Samples of the integrand plot data.
    #[arg(long)]
    pub plot_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, visible_alias = "R")]
    pub radius: Option<f64>,
    #[command(flatten)]
    pub quad: QuadArgs,
    /// Rows cover 1 <= l <= k <= k-max.
    #[arg(long)]
    pub k_max: Option<i64>,
    /// Worker threads; 0 uses every processor.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    Linear,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlowKind {
    Sigma1,
    Sigma2,
    Sigma12,
    Quartic,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub charge: ChargeArgs,
    #[arg(long, visible_alias = "K")]
    pub coupling: Option<f64>,
    #[arg(long, value_enum)]
    pub init: Option<Init>,
    #[arg(long, value_enum)]
    pub kind: Option<FlowKind>,
    /// Maximum number of descent steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Gradient-norm tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Grid intervals.
    #[arg(long)]
    pub intervals: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Recipe {
    BiconformalHc,
    ConformalSigma12,
    RemarkC,
    LemmaLe,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[command(flatten)]
    pub charge: ChargeArgs,
    #[arg(long, value_enum)]
    pub recipe: Option<Recipe>,
    #[arg(long, visible_alias = "K")]
    pub coupling: Option<f64>,
    /// Exponent `p` of `rho = sigma^p` (lemma-le).
    #[arg(long)]
    pub p: Option<f64>,
    /// Amplitude of `sigma = 1 + epsilon sin 2s` (lemma-le).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Grid intervals of the integrated factors.
    #[arg(long)]
    pub intervals: Option<usize>,
    /// Intervals of the certificate sample grid.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub predicate_tol: Option<f64>,
    #[arg(long)]
    pub residual_tol: Option<f64>,
}

/// Validated settings of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub output: Output,
    pub task: Task,
}

#[derive(Debug, Clone)]
pub enum Task {
    Solve(SolveTask),
    Energy(EnergyTask),
    Scan(ScanTask),
    Flow(FlowTask),
    Metric(MetricTask),
}

#[derive(Debug, Clone)]
pub struct SolveTask {
    pub charge: Charge,
    pub kind: SolveType,
    pub shooting: ShootingConfig,
    pub threshold: f64,
    pub residual_nodes: usize,
}

#[derive(Debug, Clone)]
pub struct EnergyTask {
    pub charge: Charge,
    pub radius: f64,
    pub coupling: f64,
    pub quad: Quadrature,
    pub profile: Option<PathBuf>,
    pub plot_points: usize,
}

#[derive(Debug, Clone)]
pub struct ScanTask {
    pub radius: f64,
    pub quad: Quadrature,
    pub k_max: i64,
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct FlowTask {
    pub charge: Charge,
    pub radius: f64,
    pub coupling: f64,
    pub init: Init,
    pub kind: FlowKind,
    pub intervals: usize,
    pub flow: FlowConfig,
}

#[derive(Debug, Clone)]
pub struct MetricTask {
    pub charge: Charge,
    pub radius: f64,
    pub coupling: f64,
    pub recipe: Recipe,
    pub exponent: f64,
    pub epsilon: f64,
    pub intervals: usize,
    pub grid: usize,
    pub predicate_tol: f64,
    pub residual_tol: f64,
}

fn positive(key: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn nonnegative(key: &'static str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::invalid(key, format!("must be nonnegative and finite, got {v}")))
    }
}

fn at_least(key: &'static str, v: usize, min: usize) -> Result<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::invalid(key, format!("must be at least {min}, got {v}")))
    }
}

fn charge(a: &ChargeArgs, file: &ConfigFile) -> Result<Charge> {
    Ok(Charge::new(file.pick(a.k, "k", 1)?, file.pick(a.l, "l", 1)?)?)
}

fn radius(flag: Option<f64>, file: &ConfigFile) -> Result<f64> {
    positive("radius", file.pick(flag, "radius", 1.0)?)
}

fn coupling(flag: Option<f64>, file: &ConfigFile) -> Result<f64> {
    nonnegative("coupling", file.pick(flag, "coupling", 1.0)?)
}

fn quadrature(q: &QuadArgs, file: &ConfigFile) -> Result<Quadrature> {
    let d = Quadrature::default();
    let panels = at_least("panels", file.pick(q.panels, "panels", d.panels())?, 1)?;
    let nodes = at_least("nodes", file.pick(q.nodes, "nodes", d.nodes_per_panel())?, 1)?;
    Ok(Quadrature::new(panels, nodes))
}

impl RunConfig {
    /// Layers flags over the config file over defaults and validates the result.
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let output = Output {
            dir: match &cli.out {
                Some(p) => Some(p.clone()),
                None => file.get::<PathBuf>("out")?,
            },
            json: file.switch(cli.json, "json")?,
            quiet: file.switch(cli.quiet, "quiet")?,
        };
        let task = match &cli.command {
            Command::Solve(a) => {
                let d = ShootingConfig::default();
                let shooting = ShootingConfig {
                    epsilon: positive("epsilon", file.pick(a.epsilon, "epsilon", d.epsilon)?)?,
                    intervals: at_least("intervals", file.pick(a.intervals, "intervals", d.intervals)?, 8)?,
                    linear_route: !file.switch(a.direct, "direct")?,
                    ..d
                };
                Task::Solve(SolveTask {
                    charge: charge(&a.charge, &file)?,
                    kind: file.pick_enum(a.kind, "type", SolveType::Sigma2)?,
                    shooting,
                    threshold: positive("threshold", file.pick(a.threshold, "threshold", 1e-6)?)?,
                    residual_nodes: at_least(
                        "residual-nodes",
                        file.pick(a.residual_nodes, "residual-nodes", 1000)?,
                        2,
                    )?,
                })
            }
            Command::Energy(a) => Task::Energy(EnergyTask {
                charge: charge(&a.charge, &file)?,
                radius: radius(a.charge.radius, &file)?,
                coupling: coupling(a.coupling, &file)?,
                quad: quadrature(&a.quad, &file)?,
                profile: match &a.profile {
                    Some(p) => Some(p.clone()),
                    None => file.get("profile")?,
                },
                plot_points: file.pick(a.plot_points, "plot-points", 256)?,
            }),
            Command::Scan(a) => {
                let k_max = file.pick(a.k_max, "k-max", 6)?;
                if !(1..=1000).contains(&k_max) {
                    return Err(CliError::invalid("k-max", format!("must be in 1..=1000, got {k_max}")));
                }
                Task::Scan(ScanTask {
                    radius: radius(a.radius, &file)?,
                    quad: quadrature(&a.quad, &file)?,
                    k_max,
                    threads: file.pick(a.threads, "threads", 0)?,
                })
            }
            Command::Flow(a) => {
                let d = FlowConfig::default();
                Task::Flow(FlowTask {
                    charge: charge(&a.charge, &file)?,
                    radius: radius(a.charge.radius, &file)?,
                    coupling: coupling(a.coupling, &file)?,
                    init: file.pick_enum(a.init, "init", Init::Linear)?,
                    kind: file.pick_enum(a.kind, "kind", FlowKind::Sigma2)?,
                    intervals: at_least("intervals", file.pick(a.intervals, "intervals", 1024)?, 33)?,
                    flow: FlowConfig {
                        max_steps: file.pick(a.steps, "steps", d.max_steps)?,
                        tol: positive("tol", file.pick(a.tol, "tol", d.tol)?)?,
                        ..d
                    },
                })
            }
            Command::Metric(a) => {
                let recipe = file.pick_enum(a.recipe, "recipe", Recipe::BiconformalHc)?;
                let (ptol, rtol) = match recipe {
                    Recipe::BiconformalHc => (1e-9, 1e-7),
                    Recipe::ConformalSigma12 | Recipe::RemarkC => (1e-8, 1e-6),
                    Recipe::LemmaLe => (1e-8, 1e-7),
                };
                let epsilon = file.pick(a.epsilon, "epsilon", 0.3)?;
                if !(epsilon.abs() < 1.0) {
                    return Err(CliError::invalid("epsilon", format!("|epsilon| must be below 1, got {epsilon}")));
                }
                let exponent = file.pick(a.p, "p", 2.0)?;
                if !exponent.is_finite() {
                    return Err(CliError::invalid("p", "must be finite"));
                }
                Task::Metric(MetricTask {
                    charge: charge(&a.charge, &file)?,
                    radius: radius(a.charge.radius, &file)?,
                    coupling: coupling(a.coupling, &file)?,
                    recipe,
                    exponent,
                    epsilon,
                    intervals: at_least("intervals", file.pick(a.intervals, "intervals", 1024)?, 16)?,
                    grid: at_least("grid", file.pick(a.grid, "grid", 400)?, 4)?,
                    predicate_tol: positive("predicate-tol", file.pick(a.predicate_tol, "predicate-tol", ptol)?)?,
                    residual_tol: positive("residual-tol", file.pick(a.residual_tol, "residual-tol", rtol)?)?,
                })
            }
        };
        Ok(Self { output, task })
    }
}
