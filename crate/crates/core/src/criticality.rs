//! Residuals of the criticality equations and boundary-value solvers for the profile.
//!
//! Two independent routes are provided. The reduced route evaluates the scalar ODEs in `α`
//! directly. The geometric route evaluates the frame-level systems from Christoffel symbols,
//! the adapted frame, the fibre mean curvature and the pullback eigenvalues, and works for
//! any metric of the family.
//!
//! For a general block metric write `a = 1/g33`, `b = cᵀG⁻¹c` with `c = (k, ℓ)` and
//! `vol = √(det G · g33)`. Then `λ₁² = a α′²`, `λ₂² = b sin²α`, and the reduced tension
//! fields (the `∂_t` components) are
//!
//! ```text
//! τ      = (vol a α′)′/vol − b sin α cos α
//! τ_σ₂   = (vol a b sin²α α′)′/vol − a b α′² sin α cos α
//! τ₄     = (vol S a α′)′/vol − S b sin α cos α,   S = λ₁² + λ₂²
//! ```
//!
//! The first equation of each geometric system equals `(α′/√g33)` times the matching
//! tension. The harmonic one is oriented as right side minus left side so that this factor
//! is positive.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::ansatz::{frame_quotients, uniform_nodes, Charge, DiscreteProfile, Profile};
use crate::interp::Interpolant;
use crate::ode::{Advance, Integrator, OdeOptions};
use crate::quad::{self, GaussLegendre};
use crate::real::{Dual, Jet, Real};
use crate::s3geom::{
    christoffel_from, covariant, frame_from, inner, mean_curvature_from, scalar_fn, MetricFamily,
    MetricJet, ScalarFn,
};
use crate::{Error, Result, HALF_PI};

/// Which equation a residual belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Equation {
    Hc,
    Harmonic,
    Sigma2Bracket,
    Sigma2Full,
    SystemEq1,
    SystemEq2,
    Sigma12,
}

impl Equation {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Hc => "hc",
            Self::Harmonic => "harmonic",
            Self::Sigma2Bracket => "sigma2-bracket",
            Self::Sigma2Full => "sigma2-full",
            Self::SystemEq1 => "system-eq1",
            Self::SystemEq2 => "system-eq2",
            Self::Sigma12 => "sigma12",
        }
    }
}

/// A residual value with the largest magnitude among the terms that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    fn from_terms(terms: &[f64]) -> Self {
        Self {
            value: terms.iter().sum(),
            scale: terms.iter().fold(0.0, |m: f64, t| m.max(t.abs())),
        }
    }

    /// `|value| / max(scale, 1)`: relative to the largest term, absolute when all terms are small.
    pub fn relative(&self) -> f64 {
        self.value.abs() / self.scale.max(1.0)
    }
}

/// Residuals of one equation over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub equation: Equation,
    pub grid: Vec<f64>,
    pub residuals: Vec<f64>,
    pub scales: Vec<f64>,
    pub norm_inf: f64,
    pub norm_l2: f64,
    /// `max |residual| / scale` over the grid.
    pub relative_inf: f64,
}

impl ResidualReport {
    /// Evaluates `f` at every grid point strictly inside `(0, π/2)`.
    pub fn build<F: FnMut(f64) -> Result<Residual>>(equation: Equation, grid: &[f64], mut f: F) -> Result<Self> {
        let mut g = Vec::new();
        let mut residuals = Vec::new();
        let mut scales = Vec::new();
        for &s in grid.iter().filter(|&&s| s > 0.0 && s < HALF_PI) {
            let r = f(s)?;
            g.push(s);
            residuals.push(r.value);
            scales.push(r.scale);
        }
        let norm_inf = residuals.iter().fold(0.0, |m: f64, r| m.max(r.abs()));
        let norm_l2 = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
        let relative_inf = residuals
            .iter()
            .zip(&scales)
            .map(|(r, s)| Residual { value: *r, scale: *s }.relative())
            .fold(0.0, f64::max);
        Ok(Self {
            equation,
            grid: g,
            residuals,
            scales,
            norm_inf,
            norm_l2,
            relative_inf,
        })
    }
}

/// `n − 1` equally spaced points strictly inside `(0, π/2)`.
pub fn interior_grid(n: usize) -> Vec<f64> {
    let h = HALF_PI / n as f64;
    (1..n).map(|i| h * i as f64).collect()
}

/// `α′ − sin α √(k²/cos²s + ℓ²/sin²s)`.
pub fn residual_hc(profile: &Profile, charge: Charge, s: f64) -> Residual {
    let a = profile.eval(s);
    Residual::from_terms(&[a.d, -a.v.sin() * charge.p(s).sqrt()])
}

/// `α″ + (cot s − tan s) α′ − P sin α cos α`.
pub fn residual_harmonic(profile: &Profile, charge: Charge, s: f64) -> Residual {
    let a = profile.eval(s);
    let (sn, cs) = (s.sin(), s.cos());
    Residual::from_terms(&[
        a.dd,
        (cs / sn - sn / cs) * a.d,
        -charge.p(s) * a.v.sin() * a.v.cos(),
    ])
}

/// The σ₂ equation: the bracket and the full product `α′ sin α · bracket`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma2Residual {
    pub bracket: Residual,
    pub full: Residual,
}

/// `bracket = [α″ sin α + α′² cos α] P + α′ sin α (k²/(sin s cos³s) − ℓ²/(cos s sin³s))`.
pub fn residual_sigma2(profile: &Profile, charge: Charge, s: f64) -> Sigma2Residual {
    let a = profile.eval(s);
    let (sn, cs) = (s.sin(), s.cos());
    let (sa, ca) = (a.v.sin(), a.v.cos());
    let p = charge.p(s);
    let q = charge.k2() / (sn * cs * cs * cs) - charge.l2() / (cs * sn * sn * sn);
    let bracket = Residual::from_terms(&[a.dd * sa * p, a.d * a.d * ca * p, a.d * sa * q]);
    let f = a.d * sa;
    Sigma2Residual {
        bracket,
        full: Residual {
            value: f * bracket.value,
            scale: f.abs() * bracket.scale,
        },
    }
}

/// Which frame-level system to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum System {
    Harmonic,
    Sigma2,
}

/// Both equations of a frame-level system at one latitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemResidual {
    pub eq1: Residual,
    pub eq2: Residual,
}

/// Geometric evaluation of the frame-level systems at `s`.
///
/// With `E_i(f) = e_i^s ∂_s f`, the harmonic system is
///
/// ```text
/// eq1 = (λ₂² − λ₁²) g(∇_{E2}E2, E1) − λ₁² g(μ, E1) − ½ E1(λ₂² − λ₁²)
/// eq2 = (λ₁² − λ₂²) g(∇_{E1}E1, E2) − λ₂² g(μ, E2) − ½ E2(λ₁² − λ₂²)
/// ```
///
/// and the σ₂ system (domain dimension 3) is
///
/// ```text
/// eq1 = ½ λ₁² E1(λ₂²) + ½ λ₂² E1(λ₁²) − λ₁² λ₂² g(μ, E1)
/// eq2 = ½ λ₁² E2(λ₂²) + ½ λ₂² E2(λ₁²) − λ₁² λ₂² g(μ, E2)
/// ```
///
/// The eigenvalues are Rayleigh quotients of `φ*h` on the frame, carried through dual numbers
/// for their derivatives.
pub fn residual_system(
    profile: &Profile,
    charge: Charge,
    metric: &MetricFamily,
    system: System,
    s: f64,
) -> Result<SystemResidual> {
    let g = metric.at(s)?;
    Ok(system_from(&g, &profile.eval(s), charge, system))
}

fn system_from(g: &MetricJet, a: &Jet, charge: Charge, system: System) -> SystemResidual {
    let table = christoffel_from(g);
    let fd = frame_from(g.duals(), charge);
    let split = |v: [Dual; 3]| ([v[0].v, v[1].v, v[2].v], [v[0].d, v[1].d, v[2].d]);
    let (e1, de1) = split(fd.e1);
    let (e2, de2) = split(fd.e2);
    let (l1, l2, _) = frame_quotients(charge, Dual::new(a.v, a.d), Dual::new(a.d, a.dd), &fd);
    let mu = mean_curvature_from(g, charge);
    let m = g.matrix();
    let along1 = |x: Dual| e1[2] * x.d;
    let along2 = |x: Dual| e2[2] * x.d;
    match system {
        System::Harmonic => {
            let n22 = covariant(&table, &e2, &e2, &de2);
            let n11 = covariant(&table, &e1, &e1, &de1);
            let eq1 = Residual::from_terms(&[
                (l2.v - l1.v) * inner(&m, &n22, &e1),
                -l1.v * mu.along_e1,
                -0.5 * along1(l2 - l1),
            ]);
            let eq2 = Residual::from_terms(&[
                (l1.v - l2.v) * inner(&m, &n11, &e2),
                -l2.v * mu.along_e2,
                -0.5 * along2(l1 - l2),
            ]);
            SystemResidual { eq1, eq2 }
        }
        System::Sigma2 => {
            let eq = |along: &dyn Fn(Dual) -> f64, mu_i: f64| {
                Residual::from_terms(&[
                    0.5 * l1.v * along(l2),
                    0.5 * l2.v * along(l1),
                    -l1.v * l2.v * mu_i,
                ])
            };
            SystemResidual {
                eq1: eq(&along1, mu.along_e1),
                eq2: eq(&along2, mu.along_e2),
            }
        }
    }
}

/// `eq1(harmonic) + K · eq1(σ₂)`, the reduced form of `τ + K τ_σ₂ = 0`.
pub fn residual_sigma12(profile: &Profile, charge: Charge, metric: &MetricFamily, k: f64, s: f64) -> Result<Residual> {
    if !(k >= 0.0) {
        return Err(Error::InvalidParameter(format!("coupling K must be nonnegative, got {k}")));
    }
    let g = metric.at(s)?;
    let a = profile.eval(s);
    let h = system_from(&g, &a, charge, System::Harmonic).eq1;
    let q = system_from(&g, &a, charge, System::Sigma2).eq1;
    Ok(Residual {
        value: h.value + k * q.value,
        scale: h.scale.max(k * q.scale),
    })
}

/// The positive factor `f` with `eq1 = f · (hand-reduced residual)` on the round metric of
/// radius `radius`: `α′/R³` against the harmonic ODE and `α′ sin α/R⁵` against the σ₂ bracket.
pub fn reduction_factor(system: System, profile: &Profile, radius: f64, s: f64) -> f64 {
    let a = profile.eval(s);
    match system {
        System::Harmonic => a.d / radius.powi(3),
        System::Sigma2 => a.d * a.v.sin() / radius.powi(5),
    }
}

/// Reduced tension fields at one latitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedTensions {
    pub tau: f64,
    pub tau_sigma2: f64,
    pub tau4: f64,
}

/// `τ`, `τ_σ₂` and `τ₄` of the ansatz map under `metric`.
pub fn reduced_tensions(profile: &Profile, charge: Charge, metric: &MetricFamily, s: f64) -> Result<ReducedTensions> {
    let g = metric.at(s)?;
    let a = profile.eval(s);
    let [g11, g12, g22, g33] = g.duals();
    let det = g11 * g22 - g12 * g12;
    let (k, l) = (charge.k() as f64, charge.l() as f64);
    let b = (g22 * (k * k) - g12 * (2.0 * k * l) + g11 * (l * l)) / det;
    let ai = g33.recip();
    let vol = (det * g33).sqrt();
    let alpha = Dual::new(a.v, a.d);
    let da = Dual::new(a.d, a.dd);
    let sa = alpha.sin();
    let sc = sa.v * alpha.v.cos();
    let s_sum = ai * da.sq() + b * sa.sq();
    let flux_h = vol * ai * da;
    let flux_q = vol * ai * b * sa.sq() * da;
    let flux_4 = vol * s_sum * ai * da;
    Ok(ReducedTensions {
        tau: flux_h.d / vol.v - b.v * sc,
        tau_sigma2: flux_q.d / vol.v - ai.v * b.v * a.d * a.d * sc,
        tau4: flux_4.d / vol.v - s_sum.v * b.v * sc,
    })
}

/// Settings for the shooting solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    /// Start offset from the singular endpoints.
    pub epsilon: f64,
    /// Bracket for the series coefficient `c₁`.
    pub slope_lo: f64,
    pub slope_hi: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_bisection: usize,
    /// Number of log-spaced slopes in the harmonic scan.
    pub scan_points: usize,
    /// Distance from `π/2` at which the harmonic mismatch is extrapolated, for `|k| = 1`.
    /// Charge `k` uses its `|k|`-th root, which keeps the growth `t^{−|k|}` of the unstable
    /// mode fixed.
    pub far_offset: f64,
    /// Intervals of the output grid.
    pub intervals: usize,
    /// Use the linear route for the σ₂ equation; otherwise shoot on `α` directly.
    pub linear_route: bool,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            slope_lo: 1e-3,
            slope_hi: 1e3,
            rtol: 1e-10,
            atol: 1e-12,
            max_bisection: 200,
            scan_points: 61,
            far_offset: 1e-4,
            intervals: 1024,
            linear_route: true,
        }
    }
}

impl ShootingConfig {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.1) {
            return Err(Error::InvalidParameter(format!("epsilon must be in (0, 0.1), got {}", self.epsilon)));
        }
        if !(self.slope_lo > 0.0 && self.slope_lo < self.slope_hi) {
            return Err(Error::InvalidParameter(format!(
                "slope bracket must satisfy 0 < lo < hi, got [{}, {}]",
                self.slope_lo, self.slope_hi
            )));
        }
        if self.intervals < 8 {
            return Err(Error::GridTooCoarse {
                interior: self.intervals.saturating_sub(1),
                required: 7,
            });
        }
        Ok(())
    }

    fn ode(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.rtol,
            atol: self.atol,
            ..OdeOptions::default()
        }
    }
}

/// Solves the σ₂ boundary-value problem `bracket = 0`, `α(0) = 0`, `α(π/2) = π`.
///
/// The linear route substitutes `u = cos α`, which turns the bracket into
/// `−(u″ P + u′ Q)`. Hence `u′ ∝ φ = exp(−∫ Q/P)`, and with `θ = (1 − u)/2`,
/// `θ(s) = I(s)/I(π/2)` where `I(s) = ∫₀ˢ φ`. Both integrals use adaptive quadrature. The
/// direct route shoots on `α` from the series start `α(ε) = c₁ε` and bisects on `c₁`.
pub fn shoot_sigma2(charge: Charge, config: &ShootingConfig) -> Result<DiscreteProfile> {
    config.validate()?;
    let profile = if config.linear_route {
        sigma2_linear(charge, config)?
    } else {
        sigma2_direct(charge, config)?
    };
    let worst = interior_grid(config.intervals)
        .iter()
        .map(|&s| residual_sigma2(&Profile::Discrete(profile.clone()), charge, s).bracket.relative())
        .fold(0.0, f64::max);
    if !(worst < 1e-6) {
        return Err(Error::Convergence(format!(
            "sigma2 solution for {charge:?} has scale-relative bracket residual {worst:e}"
        )));
    }
    Ok(profile)
}

/// `Q/P = w′/w` with `w = k² tan s + ℓ² cot s = (k² sin²s + ℓ² cos²s)/(sin s cos s)`, from
/// `(sin s, cos s)`.
fn q_over_p_from(charge: Charge, sn: f64, cs: f64) -> f64 {
    let (k2, l2) = (charge.k2(), charge.l2());
    2.0 * (k2 - l2) * sn * cs / (k2 * sn * sn + l2 * cs * cs) - cs / sn + sn / cs
}

fn q_over_p(charge: Charge, s: f64) -> f64 {
    q_over_p_from(charge, s.sin(), s.cos())
}

fn sigma2_linear(charge: Charge, config: &ShootingConfig) -> Result<DiscreteProfile> {
    let tol = 1e-14;
    let nodes = uniform_nodes(config.intervals);
    let n = nodes.len();
    let anchor = PI / 4.0;
    let rate = |s: f64| -q_over_p(charge, s);
    // ln φ at interior nodes, with φ(π/4) = 1.
    let mut lnphi = alloc::vec![0.0; n];
    let first_right = nodes.partition_point(|&s| s < anchor);
    let mut prev = (anchor, 0.0);
    for i in first_right..n - 1 {
        let v = prev.1 + quad::adaptive(prev.0, nodes[i], tol, rate)?;
        lnphi[i] = v;
        prev = (nodes[i], v);
    }
    prev = (anchor, 0.0);
    for i in (1..first_right).rev() {
        let v = prev.1 + quad::adaptive(prev.0, nodes[i], tol, rate)?;
        lnphi[i] = v;
        prev = (nodes[i], v);
    }
    // φ inside a cell, from the nearer interior node.
    let phi_at = |s: f64, i: usize| -> Result<f64> {
        let j = if i == 0 {
            1
        } else if i + 1 >= n - 1 {
            n - 2
        } else if s - nodes[i] <= nodes[i + 1] - s {
            i
        } else {
            i + 1
        };
        Ok((lnphi[j] + quad::adaptive(nodes[j], s, tol, rate)?).exp())
    };
    let rule = quad::GaussLegendre::new(10);
    let mut cells = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
        let mut acc = 0.0;
        for (x, w) in rule.nodes().iter().zip(rule.weights()) {
            acc += w * phi_at(mid + half * x, i)?;
        }
        cells.push(acc * half);
    }
    // I(s_i) from the left and I_tot − I(s_i) from the right.
    let mut left = alloc::vec![0.0; n];
    for i in 1..n {
        left[i] = left[i - 1] + cells[i - 1];
    }
    let mut right = alloc::vec![0.0; n];
    for i in (0..n - 1).rev() {
        right[i] = right[i + 1] + cells[i];
    }
    let total = quad::pairwise_sum(&cells);
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Convergence(format!("integrating factor integral is {total}")));
    }

    let mut values = alloc::vec![0.0; n];
    let mut slopes = alloc::vec![0.0; n];
    let mut second = alloc::vec![0.0; n];
    for i in 1..n - 1 {
        let theta = left[i] / total;
        let omega = right[i] / total;
        let phi = lnphi[i].exp();
        let dth = phi / total;
        let ddth = rate(nodes[i]) * dth;
        let prod = theta * omega;
        let root = prod.sqrt();
        values[i] = if theta <= 0.5 {
            2.0 * theta.sqrt().asin()
        } else {
            PI - 2.0 * omega.sqrt().asin()
        };
        slopes[i] = dth / root;
        second[i] = ddth / root - 0.5 * dth * dth * (omega - theta) / (prod * root);
    }
    // Near each end φ vanishes linearly, φ ≈ c t, so θ ≈ c t²/(2 I) and α′ → √(2c/I).
    // The regularized rates are integrated in the distance to the end.
    let near0 = |t: f64| -q_over_p_from(charge, t.sin(), t.cos()) - 1.0 / t;
    let c0 = (lnphi[1] - quad::adaptive(0.0, nodes[1], tol, near0)? - nodes[1].ln()).exp();
    let t1 = HALF_PI - nodes[n - 2];
    let near1 = |t: f64| -q_over_p_from(charge, t.cos(), t.sin()) + 1.0 / t;
    let c1 = (lnphi[n - 2] - quad::adaptive(0.0, t1, tol, near1)? - t1.ln()).exp();
    slopes[0] = (2.0 * c0 / total).sqrt();
    slopes[n - 1] = (2.0 * c1 / total).sqrt();
    values[n - 1] = PI;
    DiscreteProfile::with_second_derivatives(nodes, values, slopes, second)
}

/// `α″` from the σ₂ bracket.
fn sigma2_rhs(charge: Charge, s: f64, y: &[f64; 2]) -> [f64; 2] {
    let (a, da) = (y[0], y[1]);
    [da, -da * da * a.cos() / a.sin() - da * q_over_p(charge, s)]
}

enum Shot {
    /// Reached the far end with this state.
    Reached([f64; 2]),
    /// `α` reached `π` before the far end.
    Overshoot(f64),
}

/// Tolerances with `atol` below the start value, which is tiny for high-order series starts.
fn scaled_options(config: &ShootingConfig, y0: &[f64; 2]) -> OdeOptions {
    let mut opts = config.ode();
    opts.atol = opts.atol.min(1e-6 * y0[0].abs()).max(f64::MIN_POSITIVE);
    opts
}

/// Integrates from the series start `α(ε) = c₁ε^{order}` to `π/2 − offset`.
fn shoot_once<F>(config: &ShootingConfig, c1: f64, order: f64, rhs: &F, stop_at_pi: bool, offset: f64) -> Result<Shot>
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
{
    let eps = config.epsilon;
    let y0 = [c1 * eps.powf(order), order * c1 * eps.powf(order - 1.0)];
    let mut it = Integrator::new(eps, y0, scaled_options(config, &y0));
    let end = HALF_PI - offset;
    let mut f = |t: f64, y: &[f64; 2]| rhs(t, y);
    let mut stop = |_t: f64, y: &[f64; 2]| stop_at_pi && y[0] >= PI;
    match it.advance_to(end, &mut f, &mut stop) {
        Ok(Advance::Reached) => Ok(Shot::Reached(it.y)),
        Ok(Advance::Stopped) => Ok(Shot::Overshoot(it.t)),
        // The α-equation is singular where sin α = 0; step collapse there is an overshoot.
        Err(Error::Convergence(_)) if stop_at_pi && it.y[0] > 0.5 * PI => Ok(Shot::Overshoot(it.t)),
        Err(e) => Err(e),
    }
}

/// Signed boundary mismatch of one shot: `α(π/2) − π`, extrapolated from `π/2 − t` along
/// `π − α ∝ t^q`, or the remaining distance `π/2 − s` (positive) on overshoot.
fn mismatch(shot: &Shot, t: f64, q: f64) -> f64 {
    match shot {
        Shot::Reached(y) => y[0] + y[1] * t / q - PI,
        Shot::Overshoot(t) => (HALF_PI - t).max(f64::MIN_POSITIVE),
    }
}

fn sigma2_direct(charge: Charge, config: &ShootingConfig) -> Result<DiscreteProfile> {
    let rhs = |s: f64, y: &[f64; 2]| sigma2_rhs(charge, s, y);
    let eps = config.epsilon;
    let eval = |c: f64| -> Result<f64> { Ok(mismatch(&shoot_once(config, c, 1.0, &rhs, true, eps)?, eps, 1.0)) };
    let c1 = bisect_log(config, config.slope_lo, config.slope_hi, |c| Ok(eval(c)? < 0.0), "sigma2 start slope")?;

    join_two_sided(config, &rhs, c1, 1.0, 1.0)
}

/// Builds the profile from the left branch with start coefficient `c1` and a right branch
/// `α ≈ π − c₂(π/2 − s)^{q}` whose `c₂` matches `α(π/4)`.
///
/// Shooting the far end directly is ill-conditioned: the endpoint value is sensitive to
/// integration error in the singular region. Each branch here starts from its own series.
/// Both equations are invariant under `α ↦ π − α`, so the right branch is integrated for
/// `β = π − α` with the same right-hand side, which keeps `π − α` at full precision.
fn join_two_sided<F>(config: &ShootingConfig, rhs: &F, c1: f64, p: f64, q: f64) -> Result<DiscreteProfile>
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
{
    // A value inconsistency δ between the branches shows up in α″ as δ/h², so both are
    // traced near round-off.
    let config = &ShootingConfig {
        rtol: config.rtol.min(1e-13),
        atol: config.atol.min(1e-15),
        ..*config
    };
    let eps = config.epsilon;
    let left0 = [c1 * eps.powf(p), p * c1 * eps.powf(p - 1.0)];
    let mid = PI / 4.0;
    let window = 0.3;
    let nodes = uniform_nodes(config.intervals);
    let n = nodes.len();

    let mut lt: Vec<(f64, Option<usize>)> = (1..n - 1)
        .filter(|&i| nodes[i] < mid + window)
        .map(|i| (nodes[i].max(eps), Some(i)))
        .collect();
    lt.push((mid, None));
    lt.sort_by(|x, y| x.0.total_cmp(&y.0));
    let ly = trace(config, eps, left0, rhs, &lt.iter().map(|t| t.0).collect::<Vec<_>>())?;
    let left_mid = ly[lt.iter().position(|t| t.1.is_none()).unwrap_or(0)][0];

    // States of β = π − α.
    let right = |c2: f64, targets: &[f64]| -> Result<Option<Vec<[f64; 2]>>> {
        let y0 = [c2 * eps.powf(q), -q * c2 * eps.powf(q - 1.0)];
        match trace_until(config, HALF_PI - eps, y0, rhs, targets, |y| y[0] <= 0.0 || y[0] >= PI) {
            Ok(v) => Ok(v),
            Err(Error::Convergence(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let c2 = bisect_log(
        config,
        config.slope_lo,
        config.slope_hi,
        |c| Ok(matches!(right(c, &[mid])?, Some(v) if v[0][0] < PI - left_mid)),
        "end slope",
    )?;
    let mut rt: Vec<(f64, Option<usize>)> = (1..n - 1)
        .filter(|&i| nodes[i] > mid - window)
        .map(|i| (nodes[i].min(HALF_PI - eps), Some(i)))
        .collect();
    rt.push((mid, None));
    rt.sort_by(|x, y| y.0.total_cmp(&x.0));
    let targets: Vec<f64> = rt.iter().map(|t| t.0).collect();
    let at_mid = rt.iter().position(|t| t.1.is_none()).unwrap_or(0);
    let full = |c: f64| -> Result<(Vec<[f64; 2]>, f64)> {
        let ry = right(c, &targets)?.ok_or_else(|| Error::Convergence("end branch stopped early".into()))?;
        let gap = left_mid - (PI - ry[at_mid][0]);
        Ok((ry, gap))
    };
    // One secant step on the full trace removes the step-sequence difference to the
    // bisection runs.
    let (ry0, g0) = full(c2)?;
    let c2b = c2 * (1.0 + 1e-7);
    let (_, g1) = full(c2b)?;
    let (c2, ry, delta) = if g1 != g0 {
        let c = c2 - g0 * (c2b - c2) / (g1 - g0);
        let (ry, g) = full(c)?;
        if g.abs() < g0.abs() { (c, ry, g) } else { (c2, ry0, g0) }
    } else {
        (c2, ry0, g0)
    };

    let mut left = alloc::vec![None; n];
    for (t, y) in lt.iter().zip(&ly) {
        if let Some(i) = t.1 {
            left[i] = Some(*y);
        }
    }
    // A ramp vanishing to order q + 2 at π/2 and flat at π/4 closes the gap there; a smooth step over the
    // window blends the branches so that round-off differences do not reach α″ through
    // a single cell.
    let span = HALF_PI - mid;
    // ψ(x) = x^m [1 + m(1 − x) + m(m + 1)(1 − x)²/2]: ψ(1) = 1 with ψ′(1) = ψ″(1) = 0.
    let m = q + 2.0;
    let ramp = |x: f64| {
        let y = 1.0 - x;
        let a = 1.0 + m * y + 0.5 * m * (m + 1.0) * y * y;
        let da = -m - m * (m + 1.0) * y;
        (x.powf(m) * a, m * x.powf(m - 1.0) * a + x.powf(m) * da)
    };
    let mut values = alloc::vec![0.0; n];
    let mut slopes = alloc::vec![0.0; n];
    let mut worst = 0.0f64;
    for (t, y) in rt.iter().zip(&ry) {
        let Some(i) = t.1 else { continue };
        let s = nodes[i];
        let x = (HALF_PI - s) / span;
        let (r, dr_dx) = ramp(x);
        let (ar, dr) = (PI - y[0] + delta * r, -y[1] - delta * dr_dx / span);
        (values[i], slopes[i]) = match left[i] {
            None => (ar, dr),
            Some([al, dl]) => {
                worst = worst.max((ar - al).abs()).max((dr - dl).abs() / dl.abs().max(1.0));
                let u = (s - (mid - window)) / (2.0 * window);
                let chi = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
                let dchi = 30.0 * u * u * (1.0 - u) * (1.0 - u) / (2.0 * window);
                (al + chi * (ar - al), dl + chi * (dr - dl) + dchi * (ar - al))
            }
        };
    }
    for i in 1..n - 1 {
        if let (Some([al, dl]), true) = (left[i], nodes[i] <= mid - window) {
            values[i] = al;
            slopes[i] = dl;
        }
    }
    if !(worst < 1e-6) {
        return Err(Error::Convergence(format!("branches disagree by {worst:e} where they overlap")));
    }
    slopes[0] = if p == 1.0 { c1 } else { 0.0 };
    slopes[n - 1] = if q == 1.0 { c2 } else { 0.0 };
    finish_profile(nodes, values, slopes, rhs)
}

/// Bisection in `ln c` for the switch point of a predicate that is true at `lo` and false
/// at `hi`.
fn bisect_log<P: FnMut(f64) -> Result<bool>>(
    config: &ShootingConfig,
    mut lo: f64,
    mut hi: f64,
    mut below: P,
    what: &str,
) -> Result<f64> {
    if !(below(lo)? && !below(hi)?) {
        return Err(Error::Convergence(format!("{what}: bracket [{lo}, {hi}] does not enclose a root")));
    }
    for _ in 0..config.max_bisection {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// States at `targets`, visited in order from `(t0, y0)`.
fn trace<F>(config: &ShootingConfig, t0: f64, y0: [f64; 2], rhs: &F, targets: &[f64]) -> Result<Vec<[f64; 2]>>
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
{
    trace_until(config, t0, y0, rhs, targets, |_| false)?
        .ok_or_else(|| Error::Convergence("trajectory stopped early".into()))
}

/// Like [`trace`], returning `None` when `stop` fires first.
fn trace_until<F, S>(
    config: &ShootingConfig,
    t0: f64,
    y0: [f64; 2],
    rhs: &F,
    targets: &[f64],
    stop: S,
) -> Result<Option<Vec<[f64; 2]>>>
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
    S: Fn(&[f64; 2]) -> bool,
{
    let mut it = Integrator::new(t0, y0, scaled_options(config, &y0));
    let mut f = |t: f64, y: &[f64; 2]| rhs(t, y);
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        if let Advance::Stopped = it.advance_to(t, &mut f, &mut |_, y: &[f64; 2]| stop(y))? {
            return Ok(None);
        }
        out.push(it.y);
    }
    Ok(Some(out))
}

fn finish_profile<F>(nodes: Vec<f64>, mut values: Vec<f64>, slopes: Vec<f64>, rhs: &F) -> Result<DiscreteProfile>
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
{
    let n = nodes.len();
    let mut second = alloc::vec![0.0; n];
    for i in 1..n - 1 {
        second[i] = rhs(nodes[i], &[values[i], slopes[i]])[1];
    }
    values[0] = 0.0;
    values[n - 1] = PI;
    DiscreteProfile::with_second_derivatives(nodes, values, slopes, second)
}

/// Boundary mismatch `α(π/2) − π` over log-spaced start slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct MismatchScan {
    pub slopes: Vec<f64>,
    pub mismatches: Vec<f64>,
}

impl MismatchScan {
    /// True when every mismatch is nonzero and of one sign.
    pub fn sign_constant(&self) -> bool {
        let pos = self.mismatches.iter().all(|&m| m > 0.0);
        let neg = self.mismatches.iter().all(|&m| m < 0.0);
        pos || neg
    }
}

/// Result of [`shoot_harmonic`].
#[derive(Debug, Clone)]
pub enum HarmonicShot {
    Solution {
        profile: DiscreteProfile,
        /// Series coefficient `c₁` of `α ≈ c₁ s^{|ℓ|}`.
        c1: f64,
        /// `C` with `α ≈ 2 arctan(C tan^{|ℓ|} s)` near `0`, that is `c₁/2`.
        fitted_c: f64,
        scan: MismatchScan,
    },
    NoSolution(MismatchScan),
}

/// `α″` from the harmonic ODE.
fn harmonic_rhs(charge: Charge, s: f64, y: &[f64; 2]) -> [f64; 2] {
    let (sn, cs) = (s.sin(), s.cos());
    let (a, da) = (y[0], y[1]);
    [da, -(cs / sn - sn / cs) * da + charge.p(s) * a.sin() * a.cos()]
}

/// Shoots on the harmonic ODE from `α(ε) = c₁ ε^{|ℓ|}` over a log-spaced scan of `c₁`.
///
/// A sign change of the mismatch is refined by bisection. When every slope meets the far
/// boundary (the `|k| = |ℓ|` family) the slope is fixed by `α(π/4) = π/2`. Otherwise the scan
/// is returned as [`HarmonicShot::NoSolution`].
pub fn shoot_harmonic(charge: Charge, config: &ShootingConfig) -> Result<HarmonicShot> {
    config.validate()?;
    let order = charge.l().abs() as f64;
    let far = charge.k().abs() as f64;
    let rhs = |s: f64, y: &[f64; 2]| harmonic_rhs(charge, s, y);
    let t = config.far_offset.powf(1.0 / far).max(config.epsilon);
    let eval = |c: f64| -> Result<f64> { Ok(mismatch(&shoot_once(config, c, order, &rhs, false, t)?, t, far)) };
    let m = config.scan_points.max(2);
    let ratio = (config.slope_hi / config.slope_lo).ln();
    let slopes: Vec<f64> = (0..m)
        .map(|i| config.slope_lo * (ratio * i as f64 / (m - 1) as f64).exp())
        .collect();
    let mismatches = slopes.iter().map(|&c| eval(c)).collect::<Result<Vec<f64>>>()?;
    let scan = MismatchScan { slopes, mismatches };
    let hit_tol = 1e-5;

    let hits = scan.mismatches.iter().filter(|m| m.abs() < hit_tol).count();
    let c1 = if let Some(i) = scan.mismatches.windows(2).position(|w| w[0] * w[1] < 0.0).filter(|_| hits < 2) {
        let (mut lo, mut hi) = (scan.slopes[i], scan.slopes[i + 1]);
        let mlo = scan.mismatches[i];
        for _ in 0..config.max_bisection {
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            if eval(mid)? * mlo > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo * hi).sqrt()
    } else if hits >= 2 {
        // Bisection on α(π/4) − π/2 over the slopes that reach π.
        let hits: Vec<f64> = scan
            .slopes
            .iter()
            .zip(&scan.mismatches)
            .filter(|(_, m)| m.abs() < hit_tol)
            .map(|(c, _)| *c)
            .collect();
        let eps = config.epsilon;
        let quarter = |c: f64| -> Result<f64> {
            let y0 = [c * eps.powf(order), order * c * eps.powf(order - 1.0)];
            Ok(trace(config, eps, y0, &rhs, &[PI / 4.0])?[0][0] - PI / 2.0)
        };
        let (mut lo, mut hi) = (hits[0], hits[hits.len() - 1]);
        if quarter(lo)? * quarter(hi)? > 0.0 {
            return Ok(HarmonicShot::NoSolution(scan));
        }
        let qlo = quarter(lo)?;
        for _ in 0..config.max_bisection {
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            if quarter(mid)? * qlo > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo * hi).sqrt()
    } else {
        return Ok(HarmonicShot::NoSolution(scan));
    };

    let profile = match join_two_sided(config, &rhs, c1, order, far) {
        Ok(p) => p,
        Err(Error::Convergence(_)) => return Ok(HarmonicShot::NoSolution(scan)),
        Err(e) => return Err(e),
    };
    Ok(HarmonicShot::Solution {
        profile,
        c1,
        fitted_c: 0.5 * c1,
        scan,
    })
}

/// A function `L(s)` known through its derivative, tabulated by quadrature.
///
/// Values at the nodes accumulate cell integrals of the rate outward from `π/4`, where
/// `L = 0`. Each cell gets two 10-point Gauss–Legendre panels: cells never contain a
/// singular end, so the rate is analytic at a distance of at least one cell width and the
/// rule converges geometrically. Adaptive refinement would chase rounding noise instead,
/// which is large where the rate divides by a small slope. Between nodes the value is a
/// cubic Hermite interpolant, while the first derivative is the rate itself.
#[derive(Clone)]
pub struct IntegratedLog {
    nodes: Vec<f64>,
    values: Vec<f64>,
    rate: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    interp: Interpolant,
}

impl core::fmt::Debug for IntegratedLog {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("IntegratedLog")
            .field("nodes", &self.nodes.len())
            .finish_non_exhaustive()
    }
}

impl IntegratedLog {
    /// Tabulates `L` at `nodes`, which must be increasing and lie inside `(0, π/2)` unless
    /// the rate is integrable up to the ends.
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(nodes: Vec<f64>, rate: F) -> Result<Self> {
        let rule = GaussLegendre::new(10);
        let cell = |a: f64, b: f64| {
            let m = 0.5 * (a + b);
            rule.integrate(a, m, &rate) + rule.integrate(m, b, &rate)
        };
        let anchor = PI / 4.0;
        let n = nodes.len();
        if n < 2 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("log-factor nodes must be increasing".into()));
        }
        let mut values = alloc::vec![0.0; n];
        let first_right = nodes.partition_point(|&s| s < anchor);
        let mut prev = (anchor, 0.0);
        for i in first_right..n {
            let v = prev.1 + cell(prev.0, nodes[i]);
            values[i] = v;
            prev = (nodes[i], v);
        }
        prev = (anchor, 0.0);
        for i in (0..first_right).rev() {
            let v = prev.1 + cell(prev.0, nodes[i]);
            values[i] = v;
            prev = (nodes[i], v);
        }
        let slopes: Vec<f64> = nodes.iter().map(|&s| rate(s)).collect();
        if values.iter().chain(&slopes).any(|v| !v.is_finite()) {
            return Err(Error::Quadrature("log factor is not finite on the grid".into()));
        }
        let interp = Interpolant::cubic_hermite(nodes.clone(), values.clone(), slopes);
        Ok(Self {
            nodes,
            values,
            rate: Arc::new(rate),
            interp,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(L, L′, L″)`; `L′` is exact and `L″` a central difference of it.
    pub fn eval(&self, s: f64) -> Jet {
        let h = 1e-6 * s.min(HALF_PI - s).min(1.0);
        let d2 = ((self.rate)(s + h) - (self.rate)(s - h)) / (2.0 * h);
        Jet::new(self.interp.eval(s).v, (self.rate)(s), d2)
    }

    /// `L` as a [`ScalarFn`].
    pub fn as_fn(&self) -> ScalarFn {
        let me = self.clone();
        scalar_fn(move |s| me.eval(s))
    }

    /// `e^{p L}` as a [`ScalarFn`].
    pub fn exp_fn(&self, p: f64) -> ScalarFn {
        let me = self.clone();
        scalar_fn(move |s| (me.eval(s) * p).exp())
    }
}

/// Rejects profiles whose slope is too small to divide by on the interior of the grid.
pub(crate) fn check_slope(profile: &Profile, nodes: &[f64]) -> Result<()> {
    for &s in nodes.iter().filter(|&&s| s > 0.0 && s < HALF_PI) {
        let d = profile.deriv(s);
        if !(d >= 1e-10) {
            return Err(Error::DivisionNearZero { s, value: d });
        }
    }
    Ok(())
}

/// Conformal exponent `γ` making a horizontally conformal profile harmonic on
/// `e^{2γ} · can`.
///
/// Under `g̃ = e^{2γ} g` the reduced tension becomes `e^{−2γ}(τ + γ′ α′/R²)`, so
/// `γ′ = −ρ_h/α′` with `ρ_h` the harmonic ODE residual, and `γ(π/4) = 0`.
pub fn conformal_gamma_for_harmonicity(profile: &Profile, charge: Charge, intervals: usize) -> Result<IntegratedLog> {
    let nodes = uniform_nodes(intervals);
    check_slope(profile, &nodes)?;
    let p = profile.clone();
    let rate = move |s: f64| -residual_harmonic(&p, charge, s).value / p.deriv(s);
    // The rate is bounded, so γ extends to both ends; quadrature nodes stay interior.
    let interior: Vec<f64> = nodes[1..nodes.len() - 1].to_vec();
    IntegratedLog::new(interior, rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{harmonic_profile, hc_profile, sigma2_profile, HcConfig};

    fn charge(k: i64, l: i64) -> Charge {
        Charge::new(k, l).unwrap()
    }

    #[test]
    fn hopf_map_satisfies_everything() {
        let c = charge(1, 1);
        let p = Profile::Linear;
        for s in interior_grid(50) {
            assert!(residual_hc(&p, c, s).value.abs() < 1e-13);
            assert!(residual_harmonic(&p, c, s).value.abs() < 1e-12);
            assert!(residual_sigma2(&p, c, s).bracket.value.abs() < 1e-12);
            for k in [0.0, 1.0, 7.5] {
                let r = residual_sigma12(&p, c, &MetricFamily::canonical(1.0), k, s).unwrap();
                assert!(r.value.abs() < 1e-10, "{s} {k} {r:?}");
            }
        }
    }

    #[test]
    fn sigma2_profile_is_not_hc_or_harmonic() {
        let c = charge(2, 1);
        let p = sigma2_profile(c);
        assert!(residual_hc(&p, c, PI / 4.0).relative() > 1e-2);
        assert!(residual_harmonic(&p, c, PI / 4.0).relative() > 1e-2);
        let r = residual_sigma12(&p, c, &MetricFamily::canonical(1.0), 1.0, PI / 4.0).unwrap();
        assert!(r.relative() > 1e-3);
    }

    #[test]
    fn constant_profile_zeroes_full_residual_but_fails_boundary() {
        let p = Profile::custom(|_| Jet::new(1.0, 0.0, 0.0));
        let r = residual_sigma2(&p, charge(2, 1), 0.7);
        assert_eq!(r.full.value, 0.0);
        assert!(p.check_boundary(1e-8).is_err());
    }

    #[test]
    fn geometric_and_reduced_routes_agree() {
        for (c, p) in [
            (charge(2, 1), sigma2_profile(charge(2, 1))),
            (charge(3, -2), harmonic_profile(2, 0.6).unwrap()),
            (charge(1, 4), Profile::Linear),
        ] {
            for r in [1.0, 1.8] {
                let m = MetricFamily::canonical(r);
                for s in [0.2, 0.77, 1.3] {
                    let h = residual_system(&p, c, &m, System::Harmonic, s).unwrap();
                    let expect = reduction_factor(System::Harmonic, &p, r, s) * residual_harmonic(&p, c, s).value;
                    assert!((h.eq1.value - expect).abs() < 1e-9 * h.eq1.scale.max(1.0), "{s} {} {expect}", h.eq1.value);
                    assert!(h.eq2.value.abs() < 1e-10);
                    let q = residual_system(&p, c, &m, System::Sigma2, s).unwrap();
                    let expect = reduction_factor(System::Sigma2, &p, r, s) * residual_sigma2(&p, c, s).bracket.value;
                    assert!((q.eq1.value - expect).abs() < 1e-9 * q.eq1.scale.max(1.0), "{s} {} {expect}", q.eq1.value);
                    assert!(q.eq2.value.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn tensions_match_geometric_systems_on_general_metrics() {
        let c = charge(3, 2);
        let p = harmonic_profile(1, 1.3).unwrap();
        let base = MetricFamily::conformal(1.2, scalar_fn(|s| (Jet::var(s) * 3.0).sin() * 0.2));
        let m = MetricFamily::frame_diagonal(
            &base,
            c,
            scalar_fn(|s| Jet::var(s).cos() * 0.3 + 1.0),
            scalar_fn(|s| Jet::var(s).sq() * 0.1 + 0.8),
        );
        for s in [0.3, 0.9, 1.4] {
            let g = m.at(s).unwrap();
            let f = p.deriv(s) / g.g33.v.sqrt();
            let t = reduced_tensions(&p, c, &m, s).unwrap();
            let h = residual_system(&p, c, &m, System::Harmonic, s).unwrap();
            let q = residual_system(&p, c, &m, System::Sigma2, s).unwrap();
            assert!((h.eq1.value - f * t.tau).abs() < 1e-10 * h.eq1.scale);
            assert!((q.eq1.value - f * t.tau_sigma2).abs() < 1e-10 * q.eq1.scale);
            assert!(h.eq2.value.abs() < 1e-10 && q.eq2.value.abs() < 1e-10);
        }
    }

    #[test]
    fn hc_profiles_have_half_quartic_tension() {
        let c = charge(2, 1);
        let p = Profile::Discrete(hc_profile(c, HcConfig::default()).unwrap());
        let m = MetricFamily::canonical(1.0);
        for s in [0.2, 0.6, 1.1] {
            assert!(residual_hc(&p, c, s).relative() < 1e-8);
            let t = reduced_tensions(&p, c, &m, s).unwrap();
            assert!((t.tau_sigma2 - 0.5 * t.tau4).abs() < 1e-7 * t.tau4.abs().max(1e-300));
        }
    }

    #[test]
    fn sigma2_routes() {
        let cfg = ShootingConfig::default();
        for (k, l) in [(2, 1), (1, 1), (3, 2), (5, 1), (1, 3)] {
            let c = charge(k, l);
            let closed = sigma2_profile(c);
            let lin = shoot_sigma2(c, &cfg).unwrap();
            assert!(lin.max_deviation(&closed) < 1e-9, "{k} {l} {}", lin.max_deviation(&closed));
            let direct = shoot_sigma2(c, &ShootingConfig { linear_route: false, ..cfg }).unwrap();
            assert!(direct.max_deviation(&closed) < 1e-8, "{k} {l} {}", direct.max_deviation(&closed));
        }
    }

    #[test]
    fn harmonic_shooting() {
        let cfg = ShootingConfig::default();
        for k in 1..=3 {
            let c = charge(k, k);
            match shoot_harmonic(c, &cfg).unwrap() {
                HarmonicShot::Solution { profile, fitted_c, .. } => {
                    let closed = harmonic_profile(k as u32, fitted_c).unwrap();
                    assert!(profile.max_deviation(&closed) < 1e-8);
                    assert!((fitted_c - 1.0).abs() < 1e-6);
                    let p = Profile::Discrete(profile);
                    let worst = interior_grid(997)
                        .iter()
                        .map(|&s| residual_harmonic(&p, c, s).relative())
                        .fold(0.0, f64::max);
                    assert!(worst < 1e-7, "{k} {worst:e}");
                }
                HarmonicShot::NoSolution(_) => panic!("({k},{k}) must be solvable"),
            }
        }
        for (k, l) in [(2, 1), (3, 1)] {
            match shoot_harmonic(charge(k, l), &cfg).unwrap() {
                HarmonicShot::NoSolution(scan) => assert!(scan.sign_constant()),
                HarmonicShot::Solution { .. } => panic!("({k},{l}) must not be solvable"),
            }
        }
        assert!(matches!(
            shoot_harmonic(charge(1, 2), &cfg).unwrap(),
            HarmonicShot::NoSolution(_)
        ));
    }

    #[test]
    fn conformal_gamma_makes_hc_profile_harmonic() {
        // Oracle: γ = −½ ln(k² sin²s + ℓ² cos²s) + ½ ln((k² + ℓ²)/2).
        let c = charge(2, 1);
        let p = Profile::Discrete(hc_profile(c, HcConfig::default()).unwrap());
        let gamma = conformal_gamma_for_harmonicity(&p, c, 512).unwrap();
        for s in [0.1, 0.5, 1.2] {
            let exact = -0.5 * (4.0 * s.sin().sq() + s.cos().sq()).ln() + 0.5 * 2.5f64.ln();
            assert!((gamma.eval(s).v - exact).abs() < 1e-8);
        }
        let m = MetricFamily::conformal(1.0, gamma.as_fn());
        for s in interior_grid(20) {
            let r = residual_system(&p, c, &m, System::Harmonic, s).unwrap();
            assert!(r.eq1.value.abs() < 1e-9, "{s} {r:?}");
        }
        let hopf = conformal_gamma_for_harmonicity(&Profile::Linear, charge(1, 1), 64).unwrap();
        assert!(hopf.values().iter().all(|v| v.abs() < 1e-14));
    }
}
