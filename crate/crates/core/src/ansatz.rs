//! The α-Hopf ansatz `φ(s, x1, x2) = (cos α(s), sin α(s) e^{i(k x1 + ℓ x2)})`.
//!
//! [`Charge`] holds the windings, [`Profile`] the reduction function `α` with two
//! derivatives. Closed-form profiles are evaluated in forms that stay accurate near both
//! ends of `[0, π/2]`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::interp::Interpolant;
use crate::quad::{self, Quadrature};
use crate::real::{Jet, Real};
use crate::s3geom::{check_interior, frame_from, wrap_angle, AdaptedFrame, MetricFamily, MetricLabel, TorusPoint};
use crate::{Error, Result, HALF_PI};

/// Largest accepted `|k|` and `|ℓ|`.
pub const MAX_WINDING: i64 = 1_000_000;

/// Tolerance within which discrete boundary values are snapped to `0` and `π`.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Winding numbers `(k, ℓ)` of the ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Charge {
    k: i64,
    l: i64,
}

impl Charge {
    pub fn new(k: i64, l: i64) -> Result<Self> {
        if k == 0 || l == 0 {
            return Err(Error::InvalidCharge {
                k,
                l,
                what: "windings must be nonzero",
            });
        }
        if k.abs() > MAX_WINDING || l.abs() > MAX_WINDING {
            return Err(Error::InvalidCharge {
                k,
                l,
                what: "winding magnitude exceeds 1e6",
            });
        }
        Ok(Self { k, l })
    }

    pub fn k(self) -> i64 {
        self.k
    }

    pub fn l(self) -> i64 {
        self.l
    }

    /// The Hopf invariant `kℓ`.
    pub fn hopf(self) -> i64 {
        self.k * self.l
    }

    /// `(ℓ, k)`.
    pub fn swapped(self) -> Self {
        Self { k: self.l, l: self.k }
    }

    /// `|k| = |ℓ|`.
    pub fn is_balanced(self) -> bool {
        self.k.abs() == self.l.abs()
    }

    pub(crate) fn k2(self) -> f64 {
        (self.k as f64) * (self.k as f64)
    }

    pub(crate) fn l2(self) -> f64 {
        (self.l as f64) * (self.l as f64)
    }

    /// `P(s) = k²/cos²s + ℓ²/sin²s`.
    pub fn p<T: Real>(self, s: T) -> T {
        s.cos().sq().recip() * self.k2() + s.sin().sq().recip() * self.l2()
    }

    /// `w(s) = k² tan s + ℓ² cot s`.
    pub fn w<T: Real>(self, s: T) -> T {
        let (sn, cs) = (s.sin(), s.cos());
        sn / cs * self.k2() + cs / sn * self.l2()
    }
}

/// The Hopf invariant of the ansatz map, `kℓ`.
pub fn hopf_charge(charge: Charge) -> i64 {
    charge.hopf()
}

/// A point `(cos t, sin t e^{iu})` of `S²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetPoint {
    pub t: f64,
    pub u: f64,
}

/// The reduction function `α : [0, π/2] → [0, π]`.
#[derive(Clone)]
pub enum Profile {
    /// `α = 2s`.
    Linear,
    /// The σ₂-critical closed form of a charge.
    Sigma2(Charge),
    /// The horizontally conformal profile `α′ = sin α √P` with `α(π/4) = π/2`.
    Hc(Charge),
    /// `α = 2 arctan(C tanᵏ s)`.
    Harmonic { k: u32, c: f64 },
    Discrete(DiscreteProfile),
    /// Any function returning `α` with two derivatives.
    Custom(Arc<dyn Fn(f64) -> Jet + Send + Sync>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear => f.write_str("Linear"),
            Self::Sigma2(c) => f.debug_tuple("Sigma2").field(c).finish(),
            Self::Hc(c) => f.debug_tuple("Hc").field(c).finish(),
            Self::Harmonic { k, c } => f.debug_struct("Harmonic").field("k", k).field("c", c).finish(),
            Self::Discrete(d) => f.debug_tuple("Discrete").field(&d.nodes().len()).finish(),
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl From<DiscreteProfile> for Profile {
    fn from(d: DiscreteProfile) -> Self {
        Self::Discrete(d)
    }
}

impl Profile {
    pub fn custom<F: Fn(f64) -> Jet + Send + Sync + 'static>(f: F) -> Self {
        Self::Custom(Arc::new(f))
    }

    /// `(α, α′, α″)` at `s ∈ [0, π/2]`.
    pub fn eval(&self, s: f64) -> Jet {
        match self {
            Self::Linear => Jet::new(2.0 * s, 2.0, 0.0),
            Self::Sigma2(c) => sigma2_jet(*c, s),
            Self::Hc(c) => hc_jet(*c, s),
            Self::Harmonic { k, c } => harmonic_jet(*k, *c, s),
            Self::Discrete(d) => d.eval(s),
            Self::Custom(f) => f(s),
        }
    }

    pub fn alpha(&self, s: f64) -> f64 {
        self.eval(s).v
    }

    pub fn deriv(&self, s: f64) -> f64 {
        self.eval(s).d
    }

    pub fn deriv2(&self, s: f64) -> f64 {
        self.eval(s).dd
    }

    /// Checks `α(0) = 0` and `α(π/2) = π` to `tol`.
    pub fn check_boundary(&self, tol: f64) -> Result<()> {
        let a0 = self.alpha(0.0);
        if !(a0.abs() <= tol) {
            return Err(Error::InvalidParameter(format!("profile has alpha(0) = {a0}, expected 0")));
        }
        let a1 = self.alpha(HALF_PI);
        if !((a1 - PI).abs() <= tol) {
            return Err(Error::BoundaryMismatch { achieved: a1 });
        }
        Ok(())
    }

    /// Samples the profile with its derivatives at `nodes`.
    pub fn sample(&self, nodes: Vec<f64>) -> Result<DiscreteProfile> {
        let jets: Vec<Jet> = nodes.iter().map(|&s| self.eval(s)).collect();
        DiscreteProfile::with_second_derivatives(
            nodes,
            jets.iter().map(|j| j.v).collect(),
            jets.iter().map(|j| j.d).collect(),
            jets.iter().map(|j| j.dd).collect(),
        )
    }
}

/// The σ₂ closed form for `charge`.
pub fn sigma2_profile(charge: Charge) -> Profile {
    Profile::Sigma2(charge)
}

/// `α(s) = 2 arctan(C tanᵏ s)`.
pub fn harmonic_profile(k: u32, c: f64) -> Result<Profile> {
    if k == 0 {
        return Err(Error::InvalidParameter("harmonic profile needs k >= 1".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("harmonic profile needs C > 0, got {c}")));
    }
    Ok(Profile::Harmonic { k, c })
}

/// `θ = ln(1 + (r − 1) sin²s)/ln r` with `r = k²/ℓ²`, so that `cos α = 1 − 2θ`.
fn sigma2_jet(charge: Charge, s: f64) -> Jet {
    let r = charge.k2() / charge.l2();
    if r == 1.0 {
        return Jet::new(2.0 * s, 2.0, 0.0);
    }
    let lr = r.ln();
    if s <= 0.0 {
        return Jet::new(0.0, 2.0 * ((r - 1.0) / lr).sqrt(), 0.0);
    }
    if s >= HALF_PI {
        return Jet::new(PI, 2.0 * ((1.0 - 1.0 / r) / lr).sqrt(), 0.0);
    }
    let x = Jet::var(s);
    let theta = (x.sin().sq() * (r - 1.0)).ln_1p() / lr;
    // 1 − θ, computed without cancellation near π/2.
    let omega = -(x.cos().sq() * (1.0 / r - 1.0)).ln_1p() / lr;
    let prod = theta.v * omega.v;
    let (v, dth, ddth) = if theta.v <= 0.5 {
        (2.0 * theta.v.sqrt().asin(), theta.d, theta.dd)
    } else {
        (PI - 2.0 * omega.v.sqrt().asin(), -omega.d, -omega.dd)
    };
    let root = prod.sqrt();
    let d = dth / root;
    let dd = ddth / root - 0.5 * dth * dth * (omega.v - theta.v) / (prod * root);
    Jet::new(v, d, dd)
}

/// A primitive of `√P`: `a ln(a + y) − b ln(b + y) − a ln cos s + b ln sin s` with
/// `a = |k|`, `b = |ℓ|`, `y = √(a² sin²s + b² cos²s)`.
fn sqrt_p_primitive(charge: Charge, s: f64) -> f64 {
    let (a, b) = ((charge.k as f64).abs(), (charge.l as f64).abs());
    let y = (a * a * s.sin().sq() + b * b * s.cos().sq()).sqrt();
    a * (a + y).ln() - b * (b + y).ln() - a * s.cos().ln() + b * s.sin().ln()
}

/// `tan(α/2) = e^{F(s) − F(π/4)}` with `F` from [`sqrt_p_primitive`]. Near the ends
/// `tan(α/2) ≈ C₀ s^{|ℓ|}` and `cot(α/2) ≈ C₁ (π/2 − s)^{|k|}`.
fn hc_jet(charge: Charge, s: f64) -> Jet {
    let (a, b) = ((charge.k as f64).abs(), (charge.l as f64).abs());
    let f0 = sqrt_p_primitive(charge, PI / 4.0);
    let ends = |m: f64, c: f64| (if m == 1.0 { 2.0 * c } else { 0.0 }, if m == 2.0 { 4.0 * c } else { 0.0 });
    if s <= 0.0 {
        let (d, dd) = ends(b, (a * (a + b).ln() - b * (2.0 * b).ln() - f0).exp());
        return Jet::new(0.0, d, dd);
    }
    if s >= HALF_PI {
        let (d, dd) = ends(a, (f0 - a * (2.0 * a).ln() + b * (a + b).ln()).exp());
        return Jet::new(PI, d, -dd);
    }
    let p = charge.p(s);
    let rp = p.sqrt();
    let (sn, cs) = (s.sin(), s.cos());
    let dp = 2.0 * charge.k2() * sn / (cs * cs * cs) - 2.0 * charge.l2() * cs / (sn * sn * sn);
    gudermann_jet(Jet::new(sqrt_p_primitive(charge, s) - f0, rp, dp / (2.0 * rp)))
}

/// The horizontally conformal profile of `charge` in closed form. [`hc_profile`] tabulates
/// the same function by quadrature.
pub fn hc_closed_form(charge: Charge) -> Profile {
    Profile::Hc(charge)
}

/// `α = 2 arctan(e^u)` for a jet `u`, evaluated through `e^{−|u|}`.
fn gudermann_jet(u: Jet) -> Jet {
    let e = (-u.v.abs()).exp();
    let v = if u.v <= 0.0 { 2.0 * e.atan() } else { PI - 2.0 * e.atan() };
    let sech = 2.0 * e / (1.0 + e * e);
    let tanh = (1.0 - e * e) / (1.0 + e * e) * if u.v < 0.0 { -1.0 } else { 1.0 };
    Jet::new(v, sech * u.d, sech * (u.dd - tanh * u.d * u.d))
}

fn harmonic_jet(k: u32, c: f64, s: f64) -> Jet {
    let kf = k as f64;
    if s <= 0.0 {
        let d = if k == 1 { 2.0 * c } else { 0.0 };
        let dd = if k == 2 { 4.0 * c } else { 0.0 };
        return Jet::new(0.0, d, dd);
    }
    if s >= HALF_PI {
        let d = if k == 1 { 2.0 / c } else { 0.0 };
        let dd = if k == 2 { -4.0 / c } else { 0.0 };
        return Jet::new(PI, d, dd);
    }
    let x = Jet::var(s);
    let u = (x.sin() / x.cos()).ln() * kf + c.ln();
    gudermann_jet(u)
}

/// How a [`DiscreteProfile`] interpolates between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolationOrder {
    /// Values only; natural cubic spline.
    NaturalCubic,
    /// Values and slopes; cubic Hermite.
    CubicHermite,
    /// Values, slopes and second derivatives; quintic Hermite.
    QuinticHermite,
}

/// A profile given at nodes of `[0, π/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteProfile {
    interp: Interpolant,
}

/// `n + 1` equally spaced nodes from `0` to `π/2`.
pub fn uniform_nodes(intervals: usize) -> Vec<f64> {
    assert!(intervals >= 1);
    let h = HALF_PI / intervals as f64;
    (0..=intervals)
        .map(|i| if i == intervals { HALF_PI } else { h * i as f64 })
        .collect()
}

fn validate(nodes: &mut [f64], values: &mut [f64], n_extra: &[usize]) -> Result<()> {
    let n = nodes.len();
    if n < 3 || values.len() != n || n_extra.iter().any(|&m| m != n) {
        return Err(Error::InvalidParameter(format!(
            "discrete profile needs at least 3 nodes and equally long columns (got {n} nodes, {} values)",
            values.len()
        )));
    }
    if nodes.iter().chain(values.iter()).any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("discrete profile contains non-finite entries".into()));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("nodes must be strictly increasing".into()));
    }
    if nodes[0].abs() > 1e-12 || (nodes[n - 1] - HALF_PI).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "nodes must span [0, pi/2], got [{}, {}]",
            nodes[0],
            nodes[n - 1]
        )));
    }
    if values[0].abs() > BOUNDARY_TOL {
        return Err(Error::InvalidParameter(format!("alpha(0) = {} must be 0", values[0])));
    }
    if (values[n - 1] - PI).abs() > BOUNDARY_TOL {
        return Err(Error::BoundaryMismatch { achieved: values[n - 1] });
    }
    nodes[0] = 0.0;
    nodes[n - 1] = HALF_PI;
    values[0] = 0.0;
    values[n - 1] = PI;
    Ok(())
}

impl DiscreteProfile {
    /// Natural cubic spline through `(nodes, values)`.
    ///
    /// Nodes must run from `0` to `π/2`; end values within [`BOUNDARY_TOL`] of `0` and `π`
    /// are snapped to those values.
    pub fn new(mut nodes: Vec<f64>, mut values: Vec<f64>) -> Result<Self> {
        validate(&mut nodes, &mut values, &[])?;
        Ok(Self {
            interp: Interpolant::natural_cubic(nodes, values),
        })
    }

    pub fn with_derivatives(mut nodes: Vec<f64>, mut values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        validate(&mut nodes, &mut values, &[slopes.len()])?;
        Ok(Self {
            interp: Interpolant::cubic_hermite(nodes, values, slopes),
        })
    }

    pub fn with_second_derivatives(
        mut nodes: Vec<f64>,
        mut values: Vec<f64>,
        slopes: Vec<f64>,
        second: Vec<f64>,
    ) -> Result<Self> {
        validate(&mut nodes, &mut values, &[slopes.len(), second.len()])?;
        Ok(Self {
            interp: Interpolant::quintic_hermite(nodes, values, slopes, second),
        })
    }

    pub fn nodes(&self) -> &[f64] {
        self.interp.nodes()
    }

    pub fn values(&self) -> &[f64] {
        self.interp.values()
    }

    pub fn order(&self) -> InterpolationOrder {
        match self.interp {
            Interpolant::NaturalCubic { .. } => InterpolationOrder::NaturalCubic,
            Interpolant::CubicHermite { .. } => InterpolationOrder::CubicHermite,
            Interpolant::QuinticHermite { .. } => InterpolationOrder::QuinticHermite,
        }
    }

    pub fn interpolant(&self) -> &Interpolant {
        &self.interp
    }

    pub fn eval(&self, s: f64) -> Jet {
        self.interp.eval(s)
    }

    /// Largest `|α(s) − other(s)|` over the nodes.
    pub fn max_deviation(&self, other: &Profile) -> f64 {
        self.nodes()
            .iter()
            .zip(self.values())
            .map(|(&s, &a)| (a - other.alpha(s)).abs())
            .fold(0.0, f64::max)
    }
}

/// `φ(point)` in the chart `(t, u)` of `S²`.
pub fn evaluate_map(charge: Charge, profile: &Profile, point: TorusPoint) -> TargetPoint {
    TargetPoint {
        t: profile.alpha(point.s),
        u: wrap_angle(charge.k as f64 * point.x1 + charge.l as f64 * point.x2),
    }
}

/// Eigenvalues of the pullback `φ*h` on the horizontal space: `λ₁²` along `E1`, `λ₂²`
/// along `E2`. The vertical eigenvalue is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackSpectrum {
    pub s: f64,
    pub lambda1_sq: f64,
    pub lambda2_sq: f64,
}

/// `φ*h(x, y) = α′² x^s y^s + sin²α (c·x)(c·y)` with `c = (k, ℓ, 0)`.
pub(crate) fn pullback_form<T: Real>(charge: Charge, alpha: T, dalpha: T, x: &[T; 3], y: &[T; 3]) -> T {
    let (k, l) = (charge.k as f64, charge.l as f64);
    let cx = x[0] * k + x[1] * l;
    let cy = y[0] * k + y[1] * l;
    dalpha.sq() * x[2] * y[2] + alpha.sin().sq() * cx * cy
}

/// Rayleigh quotients of `φ*h` on the frame vectors `e1`, `e2` and the coupling `φ*h(e1, e2)`.
pub(crate) fn frame_quotients<T: Real>(charge: Charge, alpha: T, dalpha: T, f: &AdaptedFrame<T>) -> (T, T, T) {
    (
        pullback_form(charge, alpha, dalpha, &f.e1, &f.e1),
        pullback_form(charge, alpha, dalpha, &f.e2, &f.e2),
        pullback_form(charge, alpha, dalpha, &f.e1, &f.e2),
    )
}

/// Horizontal pullback spectrum at `s`. Round metrics use the closed forms, every other
/// metric goes through [`pullback_spectrum_generic`].
pub fn pullback_spectrum(charge: Charge, profile: &Profile, metric: &MetricFamily, s: f64) -> Result<PullbackSpectrum> {
    match metric.label() {
        MetricLabel::Canonical { radius } => {
            check_interior(s)?;
            let a = profile.eval(s);
            let (sn, cs) = (s.sin(), s.cos());
            let r2 = radius * radius;
            Ok(PullbackSpectrum {
                s,
                lambda1_sq: a.d * a.d / r2,
                lambda2_sq: a.v.sin().sq() / r2 * (charge.k2() * sn * sn + charge.l2() * cs * cs) / (sn * sn * cs * cs),
            })
        }
        _ => pullback_spectrum_generic(charge, profile, metric, s),
    }
}

/// Eigenvalues of `φ*h` restricted to the horizontal space, from the symmetric 2×2 matrix in
/// the orthonormal basis `(e1, e2)`. The eigenvalue whose eigenvector leans towards `e1` is
/// reported as `λ₁²`.
pub fn pullback_spectrum_generic(
    charge: Charge,
    profile: &Profile,
    metric: &MetricFamily,
    s: f64,
) -> Result<PullbackSpectrum> {
    let g = metric.at(s)?;
    let f = frame_from(g.values(), charge);
    let a = profile.eval(s);
    let (m11, m22, m12) = frame_quotients(charge, a.v, a.d, &f);
    let mean = 0.5 * (m11 + m22);
    let half = 0.5 * (m11 - m22);
    let rad = (half * half + m12 * m12).sqrt();
    let (l1, l2) = if half >= 0.0 { (mean + rad, mean - rad) } else { (mean - rad, mean + rad) };
    Ok(PullbackSpectrum {
        s,
        lambda1_sq: l1.max(0.0),
        lambda2_sq: l2.max(0.0),
    })
}

/// Settings for [`hc_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HcConfig {
    /// Number of grid intervals on `[0, π/2]`.
    pub intervals: usize,
    /// Absolute tolerance of each adaptive quadrature segment.
    pub tol: f64,
}

impl Default for HcConfig {
    fn default() -> Self {
        Self {
            intervals: 2048,
            tol: 1e-13,
        }
    }
}

/// `√P(s) − |ℓ|/s` without cancellation near `0`.
fn sqrt_p_minus_left(charge: Charge, s: f64) -> f64 {
    let sn = s.sin();
    let l = (charge.l as f64).abs();
    // ℓ²/sin²s − ℓ²/s² is regular at s = 0.
    let ll = charge.l2() * (s - sn) * (s + sn) / (sn * sn * s * s);
    (charge.k2() / s.cos().sq() + ll) / (charge.p(s).sqrt() + l / s)
}

/// `√P(s) − |k|/(π/2 − s)` without cancellation near `π/2`.
fn sqrt_p_minus_right(charge: Charge, s: f64) -> f64 {
    let t = HALF_PI - s;
    let ls = charge.l2() / s.sin().sq();
    let k = (charge.k as f64).abs();
    // k²/cos²s − k²/t² is regular at t = 0.
    let cs = t.sin();
    let kk = charge.k2() * (t - cs) * (t + cs) / (cs * cs * t * t);
    (ls + kk) / (charge.p(s).sqrt() + k / t)
}

/// The horizontally conformal profile `α′ = sin α √P`.
///
/// Separating variables gives `ln tan(α/2) = F(s) + const` with `F′ = √P`; every constant
/// meets both boundary conditions, and the constant is fixed by `α(π/4) = π/2`. `F` is
/// accumulated node by node with adaptive quadrature outward from `π/4`, and the profile
/// stores `α`, `α′` and `α″` at every node.
pub fn hc_profile(charge: Charge, config: HcConfig) -> Result<DiscreteProfile> {
    if config.intervals < 4 {
        return Err(Error::GridTooCoarse {
            interior: config.intervals.saturating_sub(1),
            required: 3,
        });
    }
    let nodes = uniform_nodes(config.intervals);
    let n = nodes.len();
    let anchor = PI / 4.0;
    let sqrt_p = |s: f64| charge.p(s).sqrt();
    let mut u = alloc::vec![0.0; n];
    let first_right = nodes.partition_point(|&s| s < anchor);
    let mut prev = (anchor, 0.0);
    for i in first_right..n - 1 {
        let v = prev.1 + quad::adaptive(prev.0, nodes[i], config.tol, sqrt_p)?;
        u[i] = v;
        prev = (nodes[i], v);
    }
    prev = (anchor, 0.0);
    for i in (1..first_right).rev() {
        let v = prev.1 + quad::adaptive(prev.0, nodes[i], config.tol, sqrt_p)?;
        u[i] = v;
        prev = (nodes[i], v);
    }

    let mut values = alloc::vec![0.0; n];
    let mut slopes = alloc::vec![0.0; n];
    let mut second = alloc::vec![0.0; n];
    for i in 1..n - 1 {
        let s = nodes[i];
        let p = charge.p(s);
        let rp = p.sqrt();
        let (sn, cs) = (s.sin(), s.cos());
        let dp = 2.0 * charge.k2() * sn / (cs * cs * cs) - 2.0 * charge.l2() * cs / (sn * sn * sn);
        let j = gudermann_jet(Jet::new(u[i], rp, dp / (2.0 * rp)));
        if !(j.v.is_finite() && j.d.is_finite() && j.dd.is_finite()) {
            return Err(Error::Convergence(format!("horizontally conformal profile is not finite at s = {s}")));
        }
        values[i] = j.v;
        slopes[i] = j.d;
        second[i] = j.dd;
    }

    // Endpoint slopes: tan(α/2) ≈ C₀ s^{|ℓ|} near 0 and cot(α/2) ≈ C₁ (π/2 − s)^{|k|} near π/2.
    let (la, ka) = ((charge.l as f64).abs(), (charge.k as f64).abs());
    let g0 = quad::adaptive(anchor, 0.0, config.tol, |s| sqrt_p_minus_left(charge, s))?;
    let c0 = (g0 - la * anchor.ln()).exp();
    let g1 = quad::adaptive(anchor, HALF_PI, config.tol, |s| sqrt_p_minus_right(charge, s))?;
    let c1 = (-g1 - ka * anchor.ln()).exp();
    let ends = |m: f64, c: f64| -> (f64, f64) {
        (if m == 1.0 { 2.0 * c } else { 0.0 }, if m == 2.0 { 4.0 * c } else { 0.0 })
    };
    let (d0, dd0) = ends(la, c0);
    let (d1, dd1) = ends(ka, c1);
    slopes[0] = d0;
    second[0] = dd0;
    values[n - 1] = PI;
    slopes[n - 1] = d1;
    second[n - 1] = -dd1;
    DiscreteProfile::with_second_derivatives(nodes, values, slopes, second)
}

/// The Hopf invariant by the Whitehead integral `∫ A ∧ F`.
///
/// `F = φ*(Ω/4π) = f′ ds ∧ (k dx1 + ℓ dx2)` with `f′ = sin α α′/4π`, and the potential
/// `A = p dx1 + q dx2` has `p = k(f − f(π/2))`, `q = ℓ(f − f(0))`, so that each coefficient
/// vanishes where its circle collapses. With orientation `ds ∧ dx1 ∧ dx2 > 0`,
/// `Q = 4π² ∫ f′ (k q − ℓ p) ds`. `f` is accumulated by the same panel rule.
pub fn hopf_charge_numeric(charge: Charge, profile: &Profile, quad: &Quadrature) -> Result<f64> {
    let fprime = |s: f64| {
        let a = profile.eval(s);
        a.v.sin() * a.d / (4.0 * PI)
    };
    let rule = quad.rule();
    let edges = quad.panel_edges();
    let (lo, hi) = quad.bounds();
    // Nodes with f(s) − f(0).
    let mut samples: Vec<(f64, f64, f64)> = Vec::with_capacity(quad.points().len());
    let mut base = if lo > 0.0 { rule.integrate(0.0, lo, fprime) } else { 0.0 };
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, wt) in rule.nodes().iter().zip(rule.weights()) {
            let s = mid + half * x;
            let f = base + rule.integrate(a, s, fprime);
            samples.push((s, wt * half, f));
        }
        base += rule.integrate(a, b, fprime);
    }
    let total = base + if hi < HALF_PI { rule.integrate(hi, HALF_PI, fprime) } else { 0.0 };
    let (k, l) = (charge.k as f64, charge.l as f64);
    let terms: Vec<f64> = samples
        .iter()
        .map(|&(s, w, f)| {
            let q = l * f;
            let p = k * (f - total);
            w * fprime(s) * (k * q - l * p)
        })
        .collect();
    let q = 4.0 * PI * PI * quad::pairwise_sum(&terms);
    if q.is_finite() {
        Ok(q)
    } else {
        Err(Error::Quadrature(format!("non-finite Hopf charge integral for {charge:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn charge(k: i64, l: i64) -> Charge {
        Charge::new(k, l).unwrap()
    }

    // Independent oracle: the printed formula arccos(1 − 2 ln(r sin² + cos²)/ln r).
    fn sigma2_printed(k: f64, l: f64, s: f64) -> f64 {
        let r = k * k / (l * l);
        libm::acos(1.0 - 2.0 * (r * s.sin().sq() + s.cos().sq()).ln() / r.ln())
    }

    #[test]
    fn charge_validation_and_hopf() {
        assert!(matches!(Charge::new(0, 1), Err(Error::InvalidCharge { .. })));
        assert!(matches!(Charge::new(2, 2_000_000), Err(Error::InvalidCharge { .. })));
        assert_eq!(hopf_charge(charge(1, 1)), 1);
        assert_eq!(hopf_charge(charge(-1, 1)), -1);
        assert_eq!(hopf_charge(charge(2, 3)), 6);
    }

    #[test]
    fn sigma2_values() {
        let a = sigma2_profile(charge(2, 1));
        let expected = libm::acos(1.0 - 2.0 * 2.5f64.ln() / 4.0f64.ln());
        assert!((a.alpha(PI / 4.0) - expected).abs() < 1e-14);
        assert!((expected - 1.8986).abs() < 1e-4);
        let b = sigma2_profile(charge(3, 3));
        for s in [0.1, 0.8, 1.4] {
            assert!((b.alpha(s) - 2.0 * s).abs() < 1e-15);
        }
        for &(k, l) in &[(2.0, 1.0), (5.0, 2.0), (1.0, 3.0), (6.0, 5.0)] {
            let p = sigma2_profile(charge(k as i64, l as i64));
            assert!(p.check_boundary(1e-12).is_ok());
            for s in [0.05, 0.3, 0.9, 1.5] {
                assert!((p.alpha(s) - sigma2_printed(k, l, s)).abs() < 1e-12, "{k} {l} {s}");
            }
        }
    }

    #[test]
    fn sigma2_mirror_symmetry() {
        let p = sigma2_profile(charge(2, 5));
        let q = sigma2_profile(charge(5, 2));
        for s in [0.01, 0.4, 1.0, 1.55] {
            assert!((p.alpha(s) - (PI - q.alpha(HALF_PI - s))).abs() < 1e-13);
        }
    }

    #[test]
    fn harmonic_values() {
        assert!(matches!(harmonic_profile(1, 0.0), Err(Error::InvalidParameter(_))));
        let p = harmonic_profile(1, 1.0).unwrap();
        for s in [0.0, 0.2, 1.0, HALF_PI] {
            assert!((p.alpha(s) - 2.0 * s).abs() < 1e-14);
        }
        assert!((harmonic_profile(2, 1.0).unwrap().alpha(PI / 4.0) - PI / 2.0).abs() < 1e-15);
        assert!((harmonic_profile(1, 2.0).unwrap().alpha(PI / 4.0) - 2.0 * 2.0f64.atan()).abs() < 1e-15);
        assert!((2.0 * 2.0f64.atan() - 2.2143).abs() < 1e-4);
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let h = 1e-5;
        let profiles = [
            sigma2_profile(charge(2, 1)),
            sigma2_profile(charge(1, 4)),
            sigma2_profile(charge(5, 3)),
            harmonic_profile(3, 0.7).unwrap(),
            harmonic_profile(1, 2.0).unwrap(),
        ];
        for p in &profiles {
            for i in 1..40 {
                let s = i as f64 * HALF_PI / 40.0;
                let j = p.eval(s);
                let (ap, am) = (p.alpha(s + h), p.alpha(s - h));
                assert!((j.d - (ap - am) / (2.0 * h)).abs() < 1e-6, "{p:?} {s}");
                let (dp, dm) = (p.deriv(s + h), p.deriv(s - h));
                assert!((j.dd - (dp - dm) / (2.0 * h)).abs() < 1e-6, "{p:?} {s}");
            }
        }
    }

    #[test]
    fn endpoint_limits_are_continuous() {
        for p in [sigma2_profile(charge(3, 1)), harmonic_profile(1, 1.5).unwrap(), harmonic_profile(2, 0.5).unwrap()] {
            for (end, inner) in [(0.0, 1e-7), (HALF_PI, HALF_PI - 1e-7)] {
                let (a, b) = (p.eval(end), p.eval(inner));
                assert!((a.v - b.v).abs() < 1e-5);
                assert!((a.d - b.d).abs() < 1e-5, "{p:?} {end}");
                assert!((a.dd - b.dd).abs() < 1e-4, "{p:?} {end}");
            }
        }
    }

    #[test]
    fn evaluate_map_examples() {
        let pt = TorusPoint::new(0.0, 0.0, PI / 4.0).unwrap();
        let x = evaluate_map(charge(1, 1), &Profile::Linear, pt);
        assert!((x.t - PI / 2.0).abs() < 1e-15 && x.u == 0.0);
        let pt = TorusPoint::new(PI / 2.0, 0.0, PI / 4.0).unwrap();
        let x = evaluate_map(charge(2, 1), &sigma2_profile(charge(2, 1)), pt);
        assert!((x.u - PI).abs() < 1e-15 && (x.t - 1.8986).abs() < 1e-4);
        let pt = TorusPoint::new(0.3, 0.2, 1e-9).unwrap();
        assert!(evaluate_map(charge(4, 2), &sigma2_profile(charge(4, 2)), pt).t < 1e-8);
    }

    #[test]
    fn spectrum_examples() {
        let m = MetricFamily::canonical(1.0);
        for s in [0.2, 0.7, 1.3] {
            let sp = pullback_spectrum(charge(1, 1), &Profile::Linear, &m, s).unwrap();
            assert!((sp.lambda1_sq - 4.0).abs() < 1e-13 && (sp.lambda2_sq - 4.0).abs() < 1e-13);
        }
        let r = 1.7;
        let p = sigma2_profile(charge(3, -2));
        let sp = pullback_spectrum(charge(3, -2), &p, &MetricFamily::canonical(r), PI / 4.0).unwrap();
        let expect = 2.0 * p.alpha(PI / 4.0).sin().sq() * 13.0 / (r * r);
        assert!((sp.lambda2_sq - expect).abs() < 1e-12);
        assert!(pullback_spectrum(charge(1, 1), &p, &m, 0.0).is_err());
    }

    #[test]
    fn hc_closed_form_matches_tabulation() {
        for (k, l) in [(1, 1), (3, 2), (2, -5), (4, 1)] {
            let c = charge(k, l);
            let exact = hc_closed_form(c);
            let table = Profile::Discrete(hc_profile(c, HcConfig::default()).unwrap());
            for i in 0..=400 {
                let s = i as f64 * HALF_PI / 400.0;
                let (x, y) = (exact.eval(s), table.eval(s));
                assert!((x.v - y.v).abs() < 1e-10, "({k},{l}) s={s}");
                assert!((x.d - y.d).abs() < 1e-7 * x.d.abs().max(1.0), "({k},{l}) s={s}: {} {}", x.d, y.d);
                if s > 0.0 && s < HALF_PI {
                    let r = x.d - x.v.sin() * c.p(s).sqrt();
                    assert!(r.abs() < 1e-12 * x.d.abs().max(1.0), "({k},{l}) s={s}: {r:e} {}", x.d);
                }
            }
        }
        assert!((hc_closed_form(charge(1, 1)).alpha(0.3) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn hc_profile_hopf_case() {
        let p = hc_profile(charge(1, 1), HcConfig::default()).unwrap();
        for (&s, &a) in p.nodes().iter().zip(p.values()) {
            assert!((a - 2.0 * s).abs() < 1e-12);
        }
        for s in [0.013, 0.5, 1.5] {
            let j = p.eval(s);
            assert!((j.v - 2.0 * s).abs() < 1e-10 && (j.d - 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn hc_profile_matches_closed_primitive() {
        // ∫√P = (k/2) ln((k+y)/(k−y)) + (ℓ/2) ln((y−ℓ)/(y+ℓ)), y = √(k² sin² + ℓ² cos²).
        let (k, l) = (3.0, 2.0);
        let prim = |s: f64| {
            let y = (k * k * s.sin().sq() + l * l * s.cos().sq()).sqrt();
            0.5 * k * ((k + y) / (k - y)).ln() + 0.5 * l * ((y - l) / (y + l)).ln()
        };
        let p = hc_profile(charge(3, 2), HcConfig::default()).unwrap();
        let f0 = prim(PI / 4.0);
        for (&s, &a) in p.nodes().iter().zip(p.values()).skip(1).step_by(97) {
            if s >= HALF_PI {
                continue;
            }
            let expect = 2.0 * (prim(s) - f0).exp().atan();
            assert!((a - expect).abs() < 1e-10, "{s}");
        }
        let mut last = -1.0;
        for i in 0..=500 {
            let a = p.eval(i as f64 * HALF_PI / 500.0).v;
            assert!(a > last);
            last = a;
        }
    }

    #[test]
    fn discrete_profile_validation() {
        let nodes = uniform_nodes(8);
        let vals: Vec<f64> = nodes.iter().map(|s| 2.0 * s).collect();
        let d = DiscreteProfile::new(nodes.clone(), vals.clone()).unwrap();
        assert_eq!(d.values()[8], PI);
        let mut bad = vals.clone();
        bad[8] = 3.0;
        assert!(matches!(DiscreteProfile::new(nodes.clone(), bad), Err(Error::BoundaryMismatch { .. })));
        let mut rev = nodes.clone();
        rev.swap(2, 3);
        assert!(DiscreteProfile::new(rev, vals).is_err());
    }

    #[test]
    fn numeric_hopf_charge() {
        let q = Quadrature::default();
        let v = hopf_charge_numeric(charge(1, 1), &Profile::Linear, &q).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = hopf_charge_numeric(charge(-1, 1), &Profile::Linear, &q).unwrap();
        assert!((v + 1.0).abs() < 1e-12);
        let v = hopf_charge_numeric(charge(2, 3), &sigma2_profile(charge(2, 3)), &q).unwrap();
        assert!((v - 6.0).abs() < 1e-10);
    }
}
