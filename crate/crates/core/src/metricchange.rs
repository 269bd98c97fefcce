//! Conformal and biconformal deformations of the domain metric that turn harmonic or
//! σ₂-critical ansatz maps into σ₁,₂-critical ones.
//!
//! All factors depend on `s` only. The horizontal/vertical split is taken along the
//! fibres of the ansatz map, so every change is a [`MetricFamily::frame_diagonal`] with
//! horizontal scale `A` and vertical scale `B`:
//!
//! | change | `A` | `B` |
//! |---|---|---|
//! | biconformal `g_ρ` | `ρ⁻¹` | `ρ^{(n−2)/(m−n)}` |
//! | `σ⁻²g^H + ρ⁻²g^V` | `σ⁻¹` | `ρ⁻¹` |
//! | `σ⁻²g^H + σ⁻⁴g^V` | `σ⁻¹` | `σ⁻²` |
//!
//! Criticality under a deformed metric is always checked through the geometric residuals
//! of [`criticality`](crate::criticality); the scalar predicates here only say which
//! deformations should work.

use alloc::format;
use alloc::vec::Vec;

use crate::ansatz::{hc_closed_form, pullback_spectrum_generic, Charge, Profile};
use crate::criticality::{
    check_slope, conformal_gamma_for_harmonicity, interior_grid, residual_harmonic, residual_sigma12,
    residual_system, IntegratedLog, System,
};
use crate::real::{Jet, Real};
use crate::s3geom::{constant_fn, scalar_fn, MetricFamily, ScalarFn};
use crate::{Error, Result, HALF_PI};

/// Dilation `λ(s) > 0` of a horizontally conformal map, with two derivatives.
#[derive(Clone)]
pub struct DilationProfile {
    lambda: ScalarFn,
    source: Option<Profile>,
}

impl core::fmt::Debug for DilationProfile {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DilationProfile").field("source", &self.source).finish_non_exhaustive()
    }
}

impl DilationProfile {
    pub fn new(lambda: ScalarFn) -> Self {
        Self { lambda, source: None }
    }

    pub fn constant(lambda: f64) -> Self {
        Self::new(constant_fn(lambda))
    }

    /// Dilation of the horizontally conformal profile `α′ = sin α √P` under
    /// `e^{2γ} · can(R)`: `λ = e^{−γ} sin α √P / R`. Without `gamma` the metric is `can(R)`
    /// and `λ = α′/R`.
    ///
    /// Writing `α′` through `sin α √P` gives `λ″` from the stored `α″`.
    pub fn horizontally_conformal(profile: &Profile, charge: Charge, radius: f64, gamma: Option<&IntegratedLog>) -> Self {
        let p = profile.clone();
        let gamma = gamma.map(IntegratedLog::as_fn);
        let lambda = scalar_fn(move |s| {
            let a = p.eval(s);
            let slope = a.sin() * charge.p(Jet::var(s)).sqrt() / radius;
            match &gamma {
                Some(g) => slope * (-g(s)).exp(),
                None => slope,
            }
        });
        Self {
            lambda,
            source: Some(profile.clone()),
        }
    }

    pub fn eval(&self, s: f64) -> Jet {
        (self.lambda)(s)
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s).v
    }

    pub fn as_fn(&self) -> ScalarFn {
        self.lambda.clone()
    }

    pub fn source(&self) -> Option<&Profile> {
        self.source.as_ref()
    }
}

fn check_m_not_2(m: i32) -> Result<()> {
    if m == 2 {
        Err(Error::InvalidDimension("conformal factors need m != 2".into()))
    } else {
        Ok(())
    }
}

fn check_coupling(k: f64) -> Result<()> {
    if k >= 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("coupling K must be nonnegative, got {k}")))
    }
}

/// `a² = [1 + K(n−1)λ²]^{2/(m−2)}`: a horizontally conformal map is σ₁,₂-critical for `g`
/// exactly when it is harmonic for `a² g`.
pub fn conformal_sigma12_factor(lambda: &DilationProfile, m: i32, n: i32, coupling: f64) -> Result<ScalarFn> {
    check_m_not_2(m)?;
    check_coupling(coupling)?;
    let l = lambda.as_fn();
    let c = coupling * (n - 1) as f64;
    let p = 2.0 / (m - 2) as f64;
    Ok(scalar_fn(move |s| (l(s).sq() * c + 1.0).powf(p)))
}

/// `λ^{4/(m−2)}`: σ₂-criticality for `g` is harmonicity for this multiple of `g`.
pub fn conformal_sigma2_factor(lambda: &DilationProfile, m: i32) -> Result<ScalarFn> {
    check_m_not_2(m)?;
    let l = lambda.as_fn();
    let p = 4.0 / (m - 2) as f64;
    Ok(scalar_fn(move |s| l(s).powf(p)))
}

/// `λ^{4/(4−m)}`: a harmonic morphism is σ₂-critical for this multiple of `g`. Unavailable
/// in dimension 4, where the σ₂ energy is conformally invariant.
pub fn prop_key_ii_sigma2_factor(lambda: &DilationProfile, m: i32) -> Result<ScalarFn> {
    if m == 4 {
        return Err(Error::InvalidDimension(
            "sigma2 conformal branch is unavailable for m = 4 (b drops out)".into(),
        ));
    }
    let l = lambda.as_fn();
    let p = 4.0 / (4 - m) as f64;
    Ok(scalar_fn(move |s| l(s).powf(p)))
}

/// `d/ds [b^{m−4}(b² + K(n−1)λ²)]`. A harmonic morphism is σ₁,₂-critical for `b² g` exactly
/// when this vanishes.
pub fn prop_key_ii_residual(b: &ScalarFn, lambda: &DilationProfile, m: i32, n: i32, coupling: f64, s: f64) -> f64 {
    let bj = b(s);
    let l = lambda.eval(s);
    let inner = bj.sq() + l.sq() * (coupling * (n - 1) as f64);
    let outer = if m == 4 { Jet::cst(1.0) } else { bj.powi(m - 4) };
    (outer * inner).d
}

/// The factor `b` with `b^{m−4}(b² + K(n−1)λ²) = ϑ`, for `m ∈ {3, 4}`.
///
/// For `m = 3` this is the larger root `b = (ϑ + √(ϑ² − 4K(n−1)λ²))/2`, for `m = 4`
/// `b = √(ϑ − K(n−1)λ²)`. `probe` lists latitudes where the root must be real.
pub fn prop_key_ii_factor(
    lambda: &DilationProfile,
    m: i32,
    n: i32,
    coupling: f64,
    theta: f64,
    probe: &[f64],
) -> Result<ScalarFn> {
    check_coupling(coupling)?;
    let c = coupling * (n - 1) as f64;
    let l = lambda.as_fn();
    let disc = |lam: f64| match m {
        3 => theta * theta - 4.0 * c * lam * lam,
        _ => theta - c * lam * lam,
    };
    if m != 3 && m != 4 {
        return Err(Error::InvalidDimension(format!("closed-form factor only for m = 3 or 4, got {m}")));
    }
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
    }
    for &s in probe {
        let d = disc(l(s).v);
        if !(d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "theta = {theta} too small: no real factor at s = {s}"
            )));
        }
    }
    Ok(match m {
        3 => scalar_fn(move |s| ((l(s).sq() * (-4.0 * c) + theta * theta).sqrt() + theta) * 0.5),
        _ => scalar_fn(move |s| (l(s).sq() * (-c) + theta).sqrt()),
    })
}

fn check_positive(f: &ScalarFn, what: &'static str) -> Result<()> {
    for s in interior_grid(64) {
        let v = f(s).v;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::DegenerateMetric { s, what });
        }
    }
    Ok(())
}

/// `g_ρ = ρ⁻² g^H + ρ^{(2n−4)/(m−n)} g^V` with the split along the ansatz fibres.
pub fn biconformal_metric(base: &MetricFamily, charge: Charge, rho: &ScalarFn, m: i32, n: i32) -> Result<MetricFamily> {
    if m == n {
        return Err(Error::InvalidDimension("biconformal change needs m != n".into()));
    }
    check_positive(rho, "biconformal factor is not positive")?;
    let (r1, r2) = (rho.clone(), rho.clone());
    let p = (n - 2) as f64 / (m - n) as f64;
    Ok(MetricFamily::frame_diagonal(
        base,
        charge,
        scalar_fn(move |s| r1(s).recip()),
        scalar_fn(move |s| r2(s).powf(p)),
    ))
}

/// `d/ds (σ² ρ^{2−m})`; zero means σ₂-criticality survives `σ⁻² g^H + ρ⁻² g^V`.
pub fn lemma_le_predicate(sigma: &ScalarFn, rho: &ScalarFn, m: i32, s: f64) -> f64 {
    let r = rho(s);
    let power = if m == 2 { Jet::cst(1.0) } else { r.powi(2 - m) };
    (sigma(s).sq() * power).d
}

/// `σ⁻² g^H + ρ⁻² g^V`.
pub fn lemma_le_metric(base: &MetricFamily, charge: Charge, sigma: &ScalarFn, rho: &ScalarFn) -> Result<MetricFamily> {
    check_positive(sigma, "horizontal factor is not positive")?;
    check_positive(rho, "vertical factor is not positive")?;
    let (a, b) = (sigma.clone(), rho.clone());
    Ok(MetricFamily::frame_diagonal(
        base,
        charge,
        scalar_fn(move |s| a(s).recip()),
        scalar_fn(move |s| b(s).recip()),
    ))
}

/// `σ` with `σ⁻² g^H + σ⁻⁴ g^V` making a σ₂-critical profile harmonic as well.
#[derive(Debug, Clone)]
pub struct SigmaFactor {
    log: IntegratedLog,
    radius: f64,
}

impl SigmaFactor {
    /// `ln σ` on the grid.
    pub fn log(&self) -> &IntegratedLog {
        &self.log
    }

    pub fn nodes(&self) -> &[f64] {
        self.log.nodes()
    }

    pub fn values(&self) -> Vec<f64> {
        self.log.values().iter().map(|l| libm::exp(*l)).collect()
    }

    pub fn sigma(&self) -> ScalarFn {
        self.log.exp_fn(1.0)
    }

    /// `σ⁻² g^H + σ⁻⁴ g^V` over `can(R)`.
    pub fn metric(&self, charge: Charge) -> MetricFamily {
        MetricFamily::frame_diagonal(
            &MetricFamily::canonical(self.radius),
            charge,
            self.log.exp_fn(-1.0),
            self.log.exp_fn(-2.0),
        )
    }
}

/// Solves `(ln σ)′ = ρ_h/(2α′)` from `σ(π/4) = 1` on the interior nodes of a uniform grid,
/// with `ρ_h` the harmonic ODE residual.
///
/// Under `σ⁻² g^H + σ⁻⁴ g^V` the reduced tension is `σ²(ρ_h − 2(ln σ)′ α′)/R²`, so this σ
/// makes the profile harmonic, while σ₂-criticality is untouched because `σ²(σ²)⁻¹` is
/// constant.
pub fn sigma_for_full_criticality(profile: &Profile, charge: Charge, radius: f64, intervals: usize) -> Result<SigmaFactor> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let nodes = interior_grid(intervals);
    check_slope(profile, &nodes)?;
    let p = profile.clone();
    let rate = move |s: f64| residual_harmonic(&p, charge, s).value / (2.0 * p.deriv(s));
    let log = IntegratedLog::new(nodes, rate)?;
    if log.values().iter().any(|l| !l.is_finite()) {
        return Err(Error::Quadrature("sigma is not finite on the grid".into()));
    }
    Ok(SigmaFactor { log, radius })
}

/// Kind of a metric recipe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecipeKind {
    ConformalSigma12 { coupling: f64, m: i32, n: i32 },
    ConformalSigma2 { m: i32 },
    Biconformal { m: i32, n: i32 },
    RemarkC,
}

impl RecipeKind {
    pub fn tag(self) -> &'static str {
        match self {
            Self::ConformalSigma12 { .. } => "conformal-sigma12",
            Self::ConformalSigma2 { .. } => "conformal-sigma2",
            Self::Biconformal { .. } => "biconformal",
            Self::RemarkC => "remark-c",
        }
    }
}

/// A metric change described by its kind and its parameter function: the dilation for
/// the conformal kinds, `ρ` for the biconformal kind and `σ` for the remark-c kind.
#[derive(Clone)]
pub struct MetricRecipe {
    pub kind: RecipeKind,
    pub parameter: ScalarFn,
}

impl core::fmt::Debug for MetricRecipe {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("MetricRecipe").field("kind", &self.kind).finish_non_exhaustive()
    }
}

impl MetricRecipe {
    /// `(s, parameter(s))` at `nodes`.
    pub fn samples(&self, nodes: &[f64]) -> Vec<(f64, f64)> {
        nodes.iter().map(|&s| (s, (self.parameter)(s).v)).collect()
    }

    /// Applies the recipe to `base`.
    pub fn apply(&self, base: &MetricFamily, charge: Charge) -> Result<MetricFamily> {
        let conformal = |factor: ScalarFn| {
            check_positive(&factor, "conformal factor is not positive")?;
            let f = factor.clone();
            Ok(MetricFamily::frame_diagonal(
                base,
                charge,
                scalar_fn(move |s| factor(s).sqrt()),
                scalar_fn(move |s| f(s).sqrt()),
            ))
        };
        match self.kind {
            RecipeKind::ConformalSigma12 { coupling, m, n } => {
                conformal(conformal_sigma12_factor(&DilationProfile::new(self.parameter.clone()), m, n, coupling)?)
            }
            RecipeKind::ConformalSigma2 { m } => {
                conformal(conformal_sigma2_factor(&DilationProfile::new(self.parameter.clone()), m)?)
            }
            RecipeKind::Biconformal { m, n } => biconformal_metric(base, charge, &self.parameter, m, n),
            RecipeKind::RemarkC => {
                let s1 = self.parameter.clone();
                let s2 = scalar_fn(move |s| s1(s).sq());
                lemma_le_metric(base, charge, &self.parameter, &s2)
            }
        }
    }
}

/// Sample latitudes for certificates: interior nodes of a uniform grid in
/// `[0.05, π/2 − 0.05]`.
///
/// Factors such as `σ` diverge at the ends, and once the horizontal/vertical anisotropy of
/// the deformed metric approaches `1/ε_mach` its coordinate form no longer resolves the
/// vertical part.
pub fn certificate_grid(intervals: usize) -> Vec<f64> {
    const CLEARANCE: f64 = 0.05;
    interior_grid(intervals)
        .into_iter()
        .filter(|&s| (CLEARANCE..=HALF_PI - CLEARANCE).contains(&s))
        .collect()
}

fn max_over<F: FnMut(f64) -> Result<f64>>(grid: &[f64], mut f: F) -> Result<f64> {
    let mut worst = 0.0f64;
    for &s in grid {
        let v = f(s)?;
        if !v.is_finite() {
            return Err(Error::Convergence(format!("non-finite residual at s = {s}")));
        }
        worst = worst.max(v);
    }
    Ok(worst)
}

/// Horizontally conformal profile, the conformal exponent making it a harmonic morphism,
/// and the resulting dilation.
pub struct HarmonicMorphism {
    pub charge: Charge,
    pub radius: f64,
    pub profile: Profile,
    pub gamma: IntegratedLog,
    pub lambda: DilationProfile,
}

impl HarmonicMorphism {
    /// The profile is the closed form; `intervals` sets the grid of `γ`.
    pub fn new(charge: Charge, radius: f64, intervals: usize) -> Result<Self> {
        let profile = hc_closed_form(charge);
        let gamma = conformal_gamma_for_harmonicity(&profile, charge, intervals)?;
        let lambda = DilationProfile::horizontally_conformal(&profile, charge, radius, Some(&gamma));
        Ok(Self {
            charge,
            radius,
            profile,
            gamma,
            lambda,
        })
    }

    /// `e^{2γ} · can(R)`.
    pub fn metric(&self) -> MetricFamily {
        MetricFamily::conformal(self.radius, self.gamma.as_fn())
    }
}

/// Outcome of the biconformal Riemannian-submersion check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubmersionCertificate {
    /// `max |λ̃ᵢ² − 1|`.
    pub spectrum_error: f64,
    pub sigma2_residual: f64,
    pub harmonic_residual: f64,
    /// `residual_sigma12` with `K = 1`.
    pub sigma12_residual: f64,
}

/// Applies `g_{1/λ} = λ² g^H + g^V` (`m = 3`, `n = 2`) to the harmonic morphism of
/// `charge` and evaluates the pullback spectrum and residuals under the new metric.
pub fn certify_biconformal_hc(charge: Charge, radius: f64, intervals: usize, grid: &[f64]) -> Result<SubmersionCertificate> {
    let hm = HarmonicMorphism::new(charge, radius, intervals)?;
    let l = hm.lambda.as_fn();
    let rho = scalar_fn(move |s| l(s).recip());
    let metric = biconformal_metric(&hm.metric(), charge, &rho, 3, 2)?;
    let p = &hm.profile;
    Ok(SubmersionCertificate {
        spectrum_error: max_over(grid, |s| {
            let sp = pullback_spectrum_generic(charge, p, &metric, s)?;
            Ok((sp.lambda1_sq - 1.0).abs().max((sp.lambda2_sq - 1.0).abs()))
        })?,
        sigma2_residual: max_over(grid, |s| Ok(residual_system(p, charge, &metric, System::Sigma2, s)?.eq1.relative()))?,
        harmonic_residual: max_over(grid, |s| {
            Ok(residual_system(p, charge, &metric, System::Harmonic, s)?.eq1.relative())
        })?,
        sigma12_residual: max_over(grid, |s| Ok(residual_sigma12(p, charge, &metric, 1.0, s)?.relative()))?,
    })
}

/// Outcome of the conformal σ₁,₂ construction on a harmonic morphism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalCertificate {
    pub coupling: f64,
    pub theta: f64,
    /// `max |d/ds [b⁻¹(b² + Kλ²)]|`.
    pub predicate: f64,
    /// `residual_sigma12` under `b² g`.
    pub sigma12_residual: f64,
    /// `max |a²(λ̃) b² / ϑ² − 1|`: the conformal σ₁,₂ factor of the new dilation maps it back to a
    /// constant multiple of the harmonic-morphism metric.
    pub factor_consistency: f64,
}

/// Builds `b² e^{2γ} can(R)` with `b + Kλ²/b = ϑ` (`m = 3`, `n = 2`, `ϑ = 2(1 + √K)·max λ`)
/// and checks σ₁,₂-criticality.
pub fn certify_conformal_sigma12(
    charge: Charge,
    radius: f64,
    coupling: f64,
    intervals: usize,
    grid: &[f64],
) -> Result<ConformalCertificate> {
    check_coupling(coupling)?;
    let hm = HarmonicMorphism::new(charge, radius, intervals)?;
    let probe = interior_grid(intervals);
    let lam_max = probe.iter().fold(0.0f64, |m, &s| m.max(hm.lambda.value(s)));
    let theta = 2.0 * (1.0 + coupling.sqrt()) * lam_max.max(1e-300);
    let b = prop_key_ii_factor(&hm.lambda, 3, 2, coupling, theta, &probe)?;
    let b1 = b.clone();
    let metric = MetricFamily::frame_diagonal(&hm.metric(), charge, b.clone(), b1);
    let l = hm.lambda.as_fn();
    let bq = b.clone();
    let new_lambda = DilationProfile::new(scalar_fn(move |s| l(s) / bq(s)));
    let a2 = conformal_sigma12_factor(&new_lambda, 3, 2, coupling)?;
    let p = &hm.profile;
    Ok(ConformalCertificate {
        coupling,
        theta,
        predicate: max_over(grid, |s| Ok(prop_key_ii_residual(&b, &hm.lambda, 3, 2, coupling, s).abs()))?,
        sigma12_residual: max_over(grid, |s| Ok(residual_sigma12(p, charge, &metric, coupling, s)?.relative()))?,
        factor_consistency: max_over(grid, |s| Ok((a2(s).v * b(s).v.sq() / (theta * theta) - 1.0).abs()))?,
    })
}

/// Outcome of the σ construction for a σ₂-critical profile.
#[derive(Debug, Clone, PartialEq)]
pub struct RemarkCCertificate {
    /// `(K, max residual_sigma12)` per coupling.
    pub sigma12_residuals: Vec<(f64, f64)>,
    pub sigma2_residual: f64,
    pub harmonic_residual: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

pub fn certify_remark_c(
    profile: &Profile,
    charge: Charge,
    radius: f64,
    couplings: &[f64],
    intervals: usize,
    grid: &[f64],
) -> Result<RemarkCCertificate> {
    let sigma = sigma_for_full_criticality(profile, charge, radius, intervals)?;
    let values = sigma.values();
    let metric = sigma.metric(charge);
    let mut sigma12_residuals = Vec::with_capacity(couplings.len());
    for &k in couplings {
        sigma12_residuals.push((k, max_over(grid, |s| Ok(residual_sigma12(profile, charge, &metric, k, s)?.relative()))?));
    }
    Ok(RemarkCCertificate {
        sigma12_residuals,
        sigma2_residual: max_over(grid, |s| {
            Ok(residual_system(profile, charge, &metric, System::Sigma2, s)?.eq1.relative())
        })?,
        harmonic_residual: max_over(grid, |s| {
            Ok(residual_system(profile, charge, &metric, System::Harmonic, s)?.eq1.relative())
        })?,
        sigma_min: values.iter().cloned().fold(f64::INFINITY, f64::min),
        sigma_max: values.iter().cloned().fold(0.0, f64::max),
    })
}

/// Outcome of one member of the `σ = 1 + ε sin 2s`, `ρ = σ^p` family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaCertificate {
    pub exponent: f64,
    /// `max |d/ds (σ² ρ⁻¹)|` (`m = 3`).
    pub predicate: f64,
    /// σ₂ system residual of the profile under `σ⁻² g^H + ρ⁻² g^V`.
    pub sigma2_residual: f64,
}

pub fn certify_lemma_le(
    profile: &Profile,
    charge: Charge,
    radius: f64,
    epsilon: f64,
    exponent: f64,
    grid: &[f64],
) -> Result<LemmaCertificate> {
    let sigma = scalar_fn(move |s| (Jet::var(s) * 2.0).sin() * epsilon + 1.0);
    let s1 = sigma.clone();
    let rho = scalar_fn(move |s| s1(s).powf(exponent));
    let metric = lemma_le_metric(&MetricFamily::canonical(radius), charge, &sigma, &rho)?;
    Ok(LemmaCertificate {
        exponent,
        predicate: max_over(grid, |s| Ok(lemma_le_predicate(&sigma, &rho, 3, s).abs()))?,
        sigma2_residual: max_over(grid, |s| {
            Ok(residual_system(profile, charge, &metric, System::Sigma2, s)?.eq1.relative())
        })?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{pullback_spectrum, sigma2_profile};

    fn charge(k: i64, l: i64) -> Charge {
        Charge::new(k, l).unwrap()
    }

    #[test]
    fn factor_formulas() {
        let hopf = DilationProfile::horizontally_conformal(&Profile::Linear, charge(1, 1), 1.0, None);
        assert!((hopf.value(0.3) - 2.0).abs() < 1e-14);
        let a2 = conformal_sigma12_factor(&hopf, 3, 2, 1.0).unwrap();
        assert!((a2(0.7).v - 25.0).abs() < 1e-12);
        let id = conformal_sigma12_factor(&hopf, 3, 2, 0.0).unwrap();
        assert_eq!(id(0.7).v, 1.0);
        let q = conformal_sigma2_factor(&hopf, 3).unwrap();
        assert!((q(0.7).v - 16.0).abs() < 1e-12);
        assert!(matches!(conformal_sigma12_factor(&hopf, 2, 2, 1.0), Err(Error::InvalidDimension(_))));
        assert!(matches!(prop_key_ii_sigma2_factor(&hopf, 4), Err(Error::InvalidDimension(_))));
        assert!((prop_key_ii_sigma2_factor(&hopf, 3).unwrap()(0.2).v - 16.0).abs() < 1e-12);
    }

    #[test]
    fn prop_key_ii_constructions() {
        let lam = DilationProfile::new(scalar_fn(|s| Jet::var(s).sin() + 1.0));
        let probe = interior_grid(64);
        let (k, theta) = (0.8, 5.0);
        let b3 = prop_key_ii_factor(&lam, 3, 2, k, theta, &probe).unwrap();
        let b4 = prop_key_ii_factor(&lam, 4, 2, k, theta, &probe).unwrap();
        for &s in &probe {
            assert!(prop_key_ii_residual(&b3, &lam, 3, 2, k, s).abs() < 1e-12);
            assert!(prop_key_ii_residual(&b4, &lam, 4, 2, k, s).abs() < 1e-12);
        }
        // b² = ϑ − Kλ² is the four-dimensional solution only.
        assert!(prop_key_ii_residual(&b4, &lam, 3, 2, k, 0.5).abs() > 1e-3);
        let c = constant_fn(2.0);
        assert_eq!(prop_key_ii_residual(&c, &DilationProfile::constant(3.0), 3, 2, 1.0, 0.4), 0.0);
        // σ₂ branch: b = λ² solves b⁻¹ λ² = const.
        let l = lam.as_fn();
        let b = scalar_fn(move |s| l(s).sq());
        for kk in [1e4, 1e8] {
            // d/ds[λ² + K] stays bounded while the coupling grows.
            assert!(prop_key_ii_residual(&b, &lam, 3, 2, kk, 0.5).abs() < 1e-3 * kk);
        }
        assert!(prop_key_ii_factor(&lam, 3, 2, 10.0, 1.0, &probe).is_err());
    }

    #[test]
    fn lemma_predicate_cases() {
        let sigma = scalar_fn(|s| Jet::var(s) + 1.0);
        let s2 = sigma.clone();
        let sq = scalar_fn(move |s| s2(s).sq());
        assert!(lemma_le_predicate(&sigma, &sq, 3, 0.4).abs() < 1e-15);
        assert!((lemma_le_predicate(&sigma, &sigma, 3, 0.4) - 1.0).abs() < 1e-15);
        assert_eq!(lemma_le_predicate(&constant_fn(2.0), &constant_fn(3.0), 3, 0.4), 0.0);
    }

    #[test]
    fn biconformal_scalings() {
        let c = charge(1, 1);
        let base = MetricFamily::canonical(1.0);
        let same = biconformal_metric(&base, c, &constant_fn(1.0), 3, 2).unwrap();
        let (g0, g1) = (base.jet(0.4).values(), same.jet(0.4).values());
        for i in 0..4 {
            assert!((g0[i] - g1[i]).abs() < 1e-15);
        }
        let rho = constant_fn(0.5);
        let m = biconformal_metric(&base, c, &rho, 3, 2).unwrap();
        let sp = pullback_spectrum(c, &Profile::Linear, &m, 0.6).unwrap();
        assert!((sp.lambda1_sq - 1.0).abs() < 1e-12 && (sp.lambda2_sq - 1.0).abs() < 1e-12);
        assert!(biconformal_metric(&base, c, &rho, 2, 2).is_err());
        assert!(matches!(
            biconformal_metric(&base, c, &constant_fn(-1.0), 3, 2),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn riemannian_submersion_certificate() {
        let grid = certificate_grid(100);
        for (k, l) in [(1, 1), (2, 1), (3, 2)] {
            let cert = certify_biconformal_hc(charge(k, l), 1.0, 1024, &grid).unwrap();
            assert!(cert.spectrum_error < 1e-9, "({k},{l}) {cert:?}");
            assert!(cert.sigma2_residual < 1e-7, "({k},{l}) {cert:?}");
            assert!(cert.sigma12_residual < 1e-7, "({k},{l}) {cert:?}");
        }
    }

    #[test]
    fn biconformal_changes_keep_harmonicity() {
        let c = charge(2, 1);
        let hm = HarmonicMorphism::new(c, 1.0, 1024).unwrap();
        let rho = scalar_fn(|s| (Jet::var(s) * 3.0).cos() * 0.4 + 1.2);
        let metric = biconformal_metric(&hm.metric(), c, &rho, 3, 2).unwrap();
        for s in certificate_grid(60) {
            let r = residual_system(&hm.profile, c, &metric, System::Harmonic, s).unwrap();
            assert!(r.eq1.relative() < 1e-7, "{s}: {r:?}");
        }
    }

    #[test]
    fn conformal_certificate() {
        let grid = certificate_grid(100);
        for k in [0.1, 1.0, 10.0] {
            let cert = certify_conformal_sigma12(charge(2, 1), 1.0, k, 1024, &grid).unwrap();
            assert!(cert.predicate < 1e-8, "{cert:?}");
            assert!(cert.sigma12_residual < 1e-6, "{cert:?}");
            assert!(cert.factor_consistency < 1e-12, "{cert:?}");
        }
    }

    #[test]
    fn remark_c_certificate() {
        let grid = certificate_grid(100);
        let hopf = sigma_for_full_criticality(&Profile::Linear, charge(1, 1), 1.0, 64).unwrap();
        assert!(hopf.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        for (k, l) in [(2, 1), (3, 2)] {
            let c = charge(k, l);
            let cert = certify_remark_c(&sigma2_profile(c), c, 1.0, &[0.1, 1.0, 10.0], 512, &grid).unwrap();
            for (kk, r) in &cert.sigma12_residuals {
                assert!(*r < 1e-6, "({k},{l}) K={kk}: {cert:?}");
            }
            assert!(cert.sigma_min > 0.0);
        }
    }

    #[test]
    fn lemma_dichotomy() {
        let c = charge(2, 1);
        let p = sigma2_profile(c);
        let grid = certificate_grid(100);
        let good = certify_lemma_le(&p, c, 1.0, 0.3, 2.0, &grid).unwrap();
        let bad = certify_lemma_le(&p, c, 1.0, 0.3, 1.0, &grid).unwrap();
        assert!(good.predicate < 1e-14 && good.sigma2_residual < 1e-9, "{good:?}");
        assert!(bad.predicate > 0.1, "{bad:?}");
        assert!(bad.sigma2_residual > 1e3 * good.sigma2_residual.max(1e-12), "{bad:?}");
    }
}
