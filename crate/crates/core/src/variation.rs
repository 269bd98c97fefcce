//! Discrete first and second variations of the reduced functionals, Hessian spectra and
//! a descent flow over profiles.
//!
//! Every functional is a sum of cell energies over the profile grid, so gradients and
//! the tridiagonal Hessian are exact derivatives of a computable scalar. With a metric of
//! the family and the coefficients `a = 1/g33`, `b = cᵀG⁻¹c`, `vol = √det g`, the reduced
//! densities (per `4π² ds`) are
//!
//! ```text
//! σ₁:  ½ (a α′² + b sin²α) vol
//! σ₂:  ½ a b vol α′² sin²α = ½ C ((cos α)′)²
//! 4:   ¼ (a α′² + b sin²α)² vol
//! ```
//!
//! Cells use midpoint values and difference quotients, except for the σ₂ term under
//! [`Discretization::Flux`], which uses `½ κ (Δ cos α)²` with `κ = 1/∫_cell C⁻¹`. The flux
//! form is exact for the σ₂ equation `(C (cos α)′)′ = 0`, so closed-form σ₂ profiles are
//! discrete critical points and the discrete energy at them equals the continuous one.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::ansatz::{Charge, DiscreteProfile, Profile};
use crate::interp::Interpolant;
use crate::linalg::SymTridiagonal;
use crate::quad::{GaussLegendre, Quadrature};
#[allow(unused_imports)] // float methods come from `Real` without std
use crate::real::{Jet, Real};
use crate::s3geom::MetricFamily;
use crate::{Error, Result};

/// Fewest interior nodes accepted by the discrete functionals.
pub const MIN_INTERIOR: usize = 32;

/// Which reduced functional to vary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyKind {
    Sigma1,
    Sigma2,
    /// `E_σ₁ + K E_σ₂`.
    Sigma12 { coupling: f64 },
    /// `¼ ∫ |dφ|⁴`.
    Quartic,
}

impl EnergyKind {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Sigma1 => "sigma1",
            Self::Sigma2 => "sigma2",
            Self::Sigma12 { .. } => "sigma12",
            Self::Quartic => "quartic",
        }
    }

    fn weights(self) -> (f64, f64, f64) {
        match self {
            Self::Sigma1 => (1.0, 0.0, 0.0),
            Self::Sigma2 => (0.0, 1.0, 0.0),
            Self::Sigma12 { coupling } => (1.0, coupling, 0.0),
            Self::Quartic => (0.0, 0.0, 1.0),
        }
    }
}

/// Treatment of the σ₂ term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Discretization {
    /// `½ κ (Δ cos α)²` with the harmonic cell average `κ` of `C`.
    #[default]
    Flux,
    /// Midpoint value and difference quotient; second order.
    Midpoint,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    h: f64,
    a: f64,
    b: f64,
    vol: f64,
    kappa: f64,
}

/// Cell energy `h F(d, m)` with `d` the difference quotient and `m` the midpoint value,
/// as `F` and its derivatives up to second order.
#[derive(Debug, Clone, Copy, Default)]
struct Local {
    f: f64,
    fd: f64,
    fm: f64,
    fdd: f64,
    fdm: f64,
    fmm: f64,
}

impl Local {
    fn add(&mut self, w: f64, o: Local) {
        self.f += w * o.f;
        self.fd += w * o.fd;
        self.fm += w * o.fm;
        self.fdd += w * o.fdd;
        self.fdm += w * o.fdm;
        self.fmm += w * o.fmm;
    }
}

/// A reduced functional discretized on a fixed grid with pinned end values.
#[derive(Debug, Clone)]
pub struct DiscreteFunctional {
    nodes: Vec<f64>,
    cells: Vec<Cell>,
    kind: EnergyKind,
    scheme: Discretization,
}

fn coefficients(metric: &MetricFamily, charge: Charge, s: f64) -> Result<(f64, f64, f64)> {
    let g = metric.at(s)?;
    let [g11, g12, g22, g33] = g.values();
    let (k, l) = (charge.k() as f64, charge.l() as f64);
    let det = g11 * g22 - g12 * g12;
    let b = (g22 * k * k - 2.0 * g12 * k * l + g11 * l * l) / det;
    Ok((1.0 / g33, b, (det * g33).sqrt()))
}

fn check_grid(nodes: &[f64]) -> Result<()> {
    let interior = nodes.len().saturating_sub(2);
    if interior < MIN_INTERIOR {
        return Err(Error::GridTooCoarse {
            interior,
            required: MIN_INTERIOR,
        });
    }
    Ok(())
}

impl DiscreteFunctional {
    pub fn new(
        nodes: &[f64],
        charge: Charge,
        kind: EnergyKind,
        metric: &MetricFamily,
        scheme: Discretization,
    ) -> Result<Self> {
        check_grid(nodes)?;
        if let EnergyKind::Sigma12 { coupling } = kind {
            if !(coupling >= 0.0 && coupling.is_finite()) {
                return Err(Error::InvalidParameter(format!("coupling K must be nonnegative, got {coupling}")));
            }
        }
        let rule = GaussLegendre::new(10);
        let mut cells = Vec::with_capacity(nodes.len() - 1);
        for w in nodes.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            let h = s1 - s0;
            if !(h > 0.0) {
                return Err(Error::InvalidParameter("nodes must be strictly increasing".into()));
            }
            let (a, b, vol) = coefficients(metric, charge, 0.5 * (s0 + s1))?;
            let kappa = if kind.weights().1 > 0.0 && scheme == Discretization::Flux {
                let mut err = None;
                let inv = rule.integrate(s0, s1, |s| match coefficients(metric, charge, s) {
                    Ok((a, b, vol)) => 1.0 / (a * b * vol),
                    Err(e) => {
                        err = Some(e);
                        0.0
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                1.0 / inv
            } else {
                0.0
            };
            cells.push(Cell { h, a, b, vol, kappa });
        }
        Ok(Self {
            nodes: nodes.to_vec(),
            cells,
            kind,
            scheme,
        })
    }

    /// Canonical-metric σ₂ functional on `nodes`.
    pub fn sigma2(nodes: &[f64], charge: Charge, radius: f64) -> Result<Self> {
        Self::new(
            nodes,
            charge,
            EnergyKind::Sigma2,
            &MetricFamily::canonical(radius),
            Discretization::Flux,
        )
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kind(&self) -> EnergyKind {
        self.kind
    }

    pub fn scheme(&self) -> Discretization {
        self.scheme
    }

    fn check_values(&self, values: &[f64]) {
        assert_eq!(values.len(), self.nodes.len(), "one value per node");
    }

    fn local(&self, c: &Cell, d: f64, m: f64) -> Local {
        let (w1, w2, w4) = self.kind.weights();
        let (sm, cm) = (m.sin(), m.cos());
        let (s2m, c2m) = (2.0 * sm * cm, cm * cm - sm * sm);
        let mut out = Local::default();
        if w1 > 0.0 {
            let (av, bv) = (c.a * c.vol, c.b * c.vol);
            out.add(
                w1,
                Local {
                    f: 0.5 * (av * d * d + bv * sm * sm),
                    fd: av * d,
                    fm: 0.5 * bv * s2m,
                    fdd: av,
                    fdm: 0.0,
                    fmm: bv * c2m,
                },
            );
        }
        if w2 > 0.0 && self.scheme == Discretization::Midpoint {
            let cc = c.a * c.b * c.vol;
            out.add(
                w2,
                Local {
                    f: 0.5 * cc * d * d * sm * sm,
                    fd: cc * d * sm * sm,
                    fm: 0.5 * cc * d * d * s2m,
                    fdd: cc * sm * sm,
                    fdm: cc * d * s2m,
                    fmm: cc * d * d * c2m,
                },
            );
        }
        if w4 > 0.0 {
            let sum = c.a * d * d + c.b * sm * sm;
            let (sd, sm_, sdd, smm) = (2.0 * c.a * d, c.b * s2m, 2.0 * c.a, 2.0 * c.b * c2m);
            let v = c.vol;
            out.add(
                w4,
                Local {
                    f: 0.25 * v * sum * sum,
                    fd: 0.5 * v * sum * sd,
                    fm: 0.5 * v * sum * sm_,
                    fdd: 0.5 * v * (sd * sd + sum * sdd),
                    fdm: 0.5 * v * sd * sm_,
                    fmm: 0.5 * v * (sm_ * sm_ + sum * smm),
                },
            );
        }
        out
    }

    /// Energy of one cell with its gradient and Hessian in `(y0, y1)`, per `4π²`.
    fn cell(&self, c: &Cell, y0: f64, y1: f64) -> (f64, [f64; 2], [f64; 3]) {
        let h = c.h;
        let l = self.local(c, (y1 - y0) / h, 0.5 * (y0 + y1));
        let mut e = h * l.f;
        let mut g = [-l.fd + 0.5 * h * l.fm, l.fd + 0.5 * h * l.fm];
        let mut hs = [
            l.fdd / h - l.fdm + 0.25 * h * l.fmm,
            -l.fdd / h + 0.25 * h * l.fmm,
            l.fdd / h + l.fdm + 0.25 * h * l.fmm,
        ];
        let w2 = self.kind.weights().1;
        if w2 > 0.0 && self.scheme == Discretization::Flux {
            let k = w2 * c.kappa;
            let (s0, c0, s1, c1) = (y0.sin(), y0.cos(), y1.sin(), y1.cos());
            let du = c1 - c0;
            e += 0.5 * k * du * du;
            g[0] += k * du * s0;
            g[1] -= k * du * s1;
            hs[0] += k * (s0 * s0 + du * c0);
            hs[1] -= k * s0 * s1;
            hs[2] += k * (s1 * s1 - du * c1);
        }
        (e, g, hs)
    }

    /// The discrete energy of nodal values (end values included).
    pub fn energy(&self, values: &[f64]) -> f64 {
        self.check_values(values);
        let parts: Vec<f64> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| self.cell(c, values[i], values[i + 1]).0)
            .collect();
        4.0 * PI * PI * crate::quad::pairwise_sum(&parts)
    }

    /// Partial derivatives with respect to the interior values.
    pub fn gradient(&self, values: &[f64]) -> Vec<f64> {
        self.check_values(values);
        let n = self.nodes.len();
        let mut g = alloc::vec![0.0; n];
        for (i, c) in self.cells.iter().enumerate() {
            let (_, gc, _) = self.cell(c, values[i], values[i + 1]);
            g[i] += gc[0];
            g[i + 1] += gc[1];
        }
        let scale = 4.0 * PI * PI;
        g[1..n - 1].iter().map(|x| scale * x).collect()
    }

    /// Second derivatives with respect to the interior values.
    pub fn hessian(&self, values: &[f64]) -> SymTridiagonal {
        self.check_values(values);
        let n = self.nodes.len();
        let mut diag = alloc::vec![0.0; n];
        let mut off = alloc::vec![0.0; n - 1];
        for (i, c) in self.cells.iter().enumerate() {
            let (_, _, hs) = self.cell(c, values[i], values[i + 1]);
            diag[i] += hs[0];
            off[i] += hs[1];
            diag[i + 1] += hs[2];
        }
        let scale = 4.0 * PI * PI;
        SymTridiagonal::new(
            diag[1..n - 1].iter().map(|x| scale * x).collect(),
            off[1..n - 2].iter().map(|x| scale * x).collect(),
        )
    }

    /// Trapezoid weights of the interior nodes.
    pub fn node_weights(&self) -> Vec<f64> {
        self.cells.windows(2).map(|w| 0.5 * (w[0].h + w[1].h)).collect()
    }
}

/// Gradient of a discrete functional at the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ElGradient {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ElGradient {
    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, g| m.max(g.abs()))
    }

    /// The gradient divided by the node weights, approximating the `L²` gradient field.
    pub fn field(&self) -> Vec<f64> {
        self.values.iter().zip(&self.weights).map(|(g, w)| g / w).collect()
    }
}

/// Gradient of the discretized `kind` functional at the nodal values of `profile`.
pub fn discrete_el_gradient(
    profile: &DiscreteProfile,
    charge: Charge,
    kind: EnergyKind,
    metric: &MetricFamily,
    scheme: Discretization,
) -> Result<ElGradient> {
    let f = DiscreteFunctional::new(profile.nodes(), charge, kind, metric, scheme)?;
    let values = f.gradient(profile.values());
    let n = profile.nodes().len();
    Ok(ElGradient {
        nodes: profile.nodes()[1..n - 1].to_vec(),
        values,
        weights: f.node_weights(),
    })
}

/// A fixed-endpoint variation `v` with `v(0) = v(π/2) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationField {
    interp: Interpolant,
}

impl VariationField {
    /// Natural cubic spline through grid values; end values must vanish.
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if n < 3 || values.len() != n {
            return Err(Error::InvalidParameter("variation field needs at least 3 nodes, one value each".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("nodes must be strictly increasing".into()));
        }
        if values[0] != 0.0 || values[n - 1] != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "variation must vanish at both ends, got {} and {}",
                values[0],
                values[n - 1]
            )));
        }
        Ok(Self {
            interp: Interpolant::natural_cubic(nodes, values),
        })
    }

    /// Samples `f` at `nodes`, pinning the end values to zero.
    pub fn from_fn<F: Fn(f64) -> f64>(nodes: Vec<f64>, f: F) -> Result<Self> {
        let n = nodes.len();
        let values = nodes
            .iter()
            .enumerate()
            .map(|(i, &s)| if i == 0 || i + 1 == n { 0.0 } else { f(s) })
            .collect();
        Self::new(nodes, values)
    }

    /// `sin(2 j s)` on `nodes`.
    pub fn sine_mode(j: u32, nodes: Vec<f64>) -> Result<Self> {
        Self::from_fn(nodes, move |s| (2.0 * j as f64 * s).sin())
    }

    pub fn nodes(&self) -> &[f64] {
        self.interp.nodes()
    }

    pub fn values(&self) -> &[f64] {
        self.interp.values()
    }

    pub fn eval(&self, s: f64) -> Jet {
        self.interp.eval(s)
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")))
    }
}

/// The quadratic form `(4π²/R) ∫ v² α′² (k² tan s + ℓ² cot s) ds`.
///
/// Nonnegative by construction. It is not the second derivative of `E_σ₂` along `α + t v`;
/// that is [`second_variation_direct`].
pub fn second_variation_value(
    profile: &Profile,
    charge: Charge,
    radius: f64,
    v: &VariationField,
    quad: &Quadrature,
) -> Result<f64> {
    check_radius(radius)?;
    let i = quad.integrate_converged(1e-12, 8, |s| {
        let a = profile.eval(s).d;
        let vs = v.eval(s).v;
        Ok(vs * vs * a * a * charge.w(s))
    })?;
    Ok(4.0 * PI * PI / radius * i)
}

/// `d²/dt² E_σ₂(α + t v)` at `t = 0`:
/// `(2π²/R) ∫ w [2 v′² sin²α + 4 α′ sin 2α v v′ + 2 α′² cos 2α v²] ds`.
pub fn second_variation_direct(
    profile: &Profile,
    charge: Charge,
    radius: f64,
    v: &VariationField,
    quad: &Quadrature,
) -> Result<f64> {
    check_radius(radius)?;
    let i = quad.integrate_converged(1e-12, 8, |s| {
        let a = profile.eval(s);
        let vj = v.eval(s);
        let (sa, ca) = (a.v.sin(), a.v.cos());
        let density = 2.0 * vj.d * vj.d * sa * sa
            + 8.0 * a.d * sa * ca * vj.v * vj.d
            + 2.0 * a.d * a.d * (ca * ca - sa * sa) * vj.v * vj.v;
        Ok(charge.w(s) * density)
    })?;
    Ok(2.0 * PI * PI / radius * i)
}

/// Extreme eigenvalues of a discrete Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianSpectrum {
    pub size: usize,
    pub min: f64,
    pub max: f64,
    /// Eigenvalues with `|λ| ≤ 1e-10 · max|λ|`.
    pub near_null: usize,
}

pub fn spectrum_of(h: &SymTridiagonal) -> HessianSpectrum {
    let n = h.len();
    let min = h.eigenvalue(0);
    let max = h.eigenvalue(n - 1);
    let tol = 1e-10 * min.abs().max(max.abs());
    HessianSpectrum {
        size: n,
        min,
        max,
        near_null: h.count_below(tol) - h.count_below(-tol),
    }
}

/// Spectrum of the flux-form σ₂ Hessian at the nodal values of `profile` on `canonical(R)`.
pub fn hessian_spectrum(profile: &DiscreteProfile, charge: Charge, radius: f64) -> Result<HessianSpectrum> {
    check_radius(radius)?;
    let f = DiscreteFunctional::sigma2(profile.nodes(), charge, radius)?;
    Ok(spectrum_of(&f.hessian(profile.values())))
}

/// Settings for [`gradient_flow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub max_steps: usize,
    /// Stop once `‖∇E‖_∞` falls below this.
    pub tol: f64,
    pub initial_step: f64,
    pub shrink: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub min_step: f64,
    /// Precondition with the shifted Hessian; plain steepest descent otherwise.
    pub newton: bool,
    pub scheme: Discretization,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            max_steps: 20_000,
            tol: 1e-8,
            initial_step: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            min_step: 1e-14,
            newton: true,
            scheme: Discretization::Flux,
        }
    }
}

/// Result of a descent run. Histories start with the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub profile: DiscreteProfile,
    pub steps: usize,
    pub energy_history: Vec<f64>,
    pub grad_norm_history: Vec<f64>,
    /// Accepted step length of each step.
    pub step_history: Vec<f64>,
    /// The last accepted step length.
    pub step_size: f64,
    pub converged: bool,
}

impl FlowState {
    pub fn energy(&self) -> f64 {
        *self.energy_history.last().expect("history holds the initial state")
    }

    pub fn grad_norm(&self) -> f64 {
        *self.grad_norm_history.last().expect("history holds the initial state")
    }
}

fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn shifted(base: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
    let n = base.len();
    let mut out = base.to_vec();
    for i in 1..n - 1 {
        out[i] += t * dir[i - 1];
    }
    out
}

/// Descent direction `−(H + μ I)⁻¹ g` with the smallest tried shift `μ` that makes the
/// system positive definite.
fn newton_direction(h: &SymTridiagonal, g: &[f64]) -> Option<Vec<f64>> {
    let scale = h.diag.iter().fold(0.0f64, |m, d| m.max(d.abs())).max(f64::MIN_POSITIVE);
    let mut shift = 0.0;
    for _ in 0..80 {
        if let Some(x) = h.solve_positive(shift, g) {
            let d: Vec<f64> = x.iter().map(|v| -v).collect();
            if dot(&d, g) < 0.0 {
                return Some(d);
            }
        }
        shift = if shift == 0.0 { 1e-12 * scale } else { 4.0 * shift };
    }
    None
}

/// Energy change from `values` to `values + t·dir`, by Gauss–Legendre along the segment
/// of the directional derivative. Used when the change is below the rounding level of
/// the energy itself.
fn path_change(f: &DiscreteFunctional, values: &[f64], dir: &[f64], t: f64) -> f64 {
    const X: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];
    X.iter()
        .map(|&x| 0.5 * t * dot(&f.gradient(&shifted(values, dir, x * t)), dir))
        .sum()
}

/// Backtracking descent on the interior nodes with pinned end values.
///
/// Each step tries `t = initial_step, shrink·t, …` along the (optionally Hessian
/// preconditioned) descent direction until the Armijo condition holds. The energy history
/// records accepted energies and never increases.
pub fn gradient_flow(
    initial: &DiscreteProfile,
    charge: Charge,
    kind: EnergyKind,
    metric: &MetricFamily,
    config: &FlowConfig,
) -> Result<FlowState> {
    if !(config.shrink > 0.0 && config.shrink < 1.0 && config.initial_step > 0.0) {
        return Err(Error::InvalidParameter("line search needs 0 < shrink < 1 and a positive initial step".into()));
    }
    let f = DiscreteFunctional::new(initial.nodes(), charge, kind, metric, config.scheme)?;
    let mut values = initial.values().to_vec();
    let mut energy = f.energy(&values);
    let mut grad = f.gradient(&values);
    let mut energy_history = alloc::vec![energy];
    let mut grad_norm_history = alloc::vec![norm_inf(&grad)];
    let mut step_history = Vec::new();
    let mut step_size = 0.0;
    let mut steps = 0;
    let mut converged = norm_inf(&grad) < config.tol;

    while !converged && steps < config.max_steps {
        let dir = if config.newton {
            newton_direction(&f.hessian(&values), &grad).ok_or_else(|| Error::LineSearch {
                step: steps,
                what: "no positive definite shift of the Hessian".into(),
            })?
        } else {
            grad.iter().map(|g| -g).collect()
        };
        let slope = dot(&grad, &dir);
        let mut t = config.initial_step;
        let accepted = loop {
            let trial = shifted(&values, &dir, t);
            if trial.iter().all(|x| x.is_finite()) {
                let direct = f.energy(&trial) - energy;
                let change = if direct.abs() > 1e-8 * energy.abs() {
                    direct
                } else {
                    path_change(&f, &values, &dir, t)
                };
                if change <= config.armijo * t * slope && change <= 0.0 {
                    break Some((trial, change));
                }
            }
            t *= config.shrink;
            if t < config.min_step {
                break None;
            }
        };
        let Some((trial, change)) = accepted else {
            return Err(Error::LineSearch {
                step: steps,
                what: format!("no sufficient decrease down to step {t:e} (gradient norm {:e})", norm_inf(&grad)),
            });
        };
        values = trial;
        energy += change;
        grad = f.gradient(&values);
        steps += 1;
        step_size = t;
        energy_history.push(energy);
        grad_norm_history.push(norm_inf(&grad));
        step_history.push(t);
        converged = norm_inf(&grad) < config.tol;
    }

    let profile = DiscreteProfile::new(initial.nodes().to_vec(), values)?;
    Ok(FlowState {
        profile,
        steps,
        energy_history,
        grad_norm_history,
        step_history,
        step_size,
        converged,
    })
}
