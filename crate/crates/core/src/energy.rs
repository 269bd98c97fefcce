//! Energies of equivariant maps and the topological lower bound.
//!
//! On the round sphere of radius `R` the two terms of the Faddeev–Hopf energy reduce to
//!
//! ```text
//! E_σ₁ = 2π²R ∫ [α′² + sin²α P] sin s cos s ds
//! E_σ₂ = (2π²/R) ∫ w α′² sin²α ds
//! ```
//!
//! with `P = k²/cos²s + ℓ²/sin²s` and `w = k² tan s + ℓ² cot s`. Critical points of `E_σ₂`
//! satisfy `E_σ₂ ≥ 16π²|kℓ|/R`, with equality exactly when `|k| = |ℓ|`.

use alloc::format;
use core::f64::consts::PI;

use crate::ansatz::{frame_quotients, Charge, Profile};
use crate::quad::Quadrature;
#[allow(unused_imports)] // float methods come from `Real` without std
use crate::real::Real;
use crate::s3geom::{frame_from, volume_from, MetricFamily};
use crate::{Error, Result};

const RTOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 8;

/// `(a − b)/ln(a/b)`, continued by `a` on the diagonal.
pub fn log_mean(a: f64, b: f64) -> f64 {
    // a − b is exact for nearby arguments, a/b − 1 is not.
    let x = (a - b) / b;
    if x.abs() < 1e-8 {
        // (a − b)/ln(1 + x) = b(1 + x/2 − x²/12 + …)
        b * (1.0 + x / 2.0 - x * x / 12.0)
    } else {
        (a - b) / libm::log1p(x)
    }
}

/// `(2π²/R) ∫ (k² tan s + ℓ² cot s) α′² sin²α ds`.
pub fn reduced_sigma2_energy(profile: &Profile, charge: Charge, radius: f64, quad: &Quadrature) -> Result<f64> {
    check_radius(radius)?;
    let v = quad.integrate_converged(RTOL, MAX_DOUBLINGS, |s| Ok(sigma2_density(profile, charge, s)))?;
    Ok(2.0 * PI * PI / radius * v)
}

/// `w α′² sin²α`, the integrand of `E_σ₂` without the factor `2π²/R`.
pub fn sigma2_density(profile: &Profile, charge: Charge, s: f64) -> f64 {
    let a = profile.eval(s);
    charge.w(s) * (a.d * libm::sin(a.v)).powi(2)
}

/// `[α′² + sin²α P] sin s cos s`, the integrand of `E_σ₁` without the factor `2π²R`.
pub fn dirichlet_density(profile: &Profile, charge: Charge, s: f64) -> f64 {
    let a = profile.eval(s);
    let sa = libm::sin(a.v);
    // sin²α P sin s cos s = sin²α (k² tan s + ℓ² cot s)
    a.d * a.d * libm::sin(s) * libm::cos(s) + sa * sa * charge.w(s)
}

/// `16π²/R · (k² − ℓ²)/ln(k²/ℓ²)`, which is `16π²k²/R` when `|k| = |ℓ|`.
pub fn closed_form_sigma2_energy(charge: Charge, radius: f64) -> f64 {
    16.0 * PI * PI / radius * log_mean(charge.k2(), charge.l2())
}

/// `2π²R ∫ [α′² + sin²α P] sin s cos s ds`.
pub fn reduced_dirichlet_energy(profile: &Profile, charge: Charge, radius: f64, quad: &Quadrature) -> Result<f64> {
    check_radius(radius)?;
    let v = quad.integrate_converged(RTOL, MAX_DOUBLINGS, |s| Ok(dirichlet_density(profile, charge, s)))?;
    Ok(2.0 * PI * PI * radius * v)
}

/// Energies of one configuration together with the topological bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub k: i64,
    pub l: i64,
    /// Hopf charge `kℓ`.
    pub q: i64,
    /// Radius used for the bound; `None` for metrics outside the round and conformal families.
    pub radius: Option<f64>,
    pub coupling: f64,
    pub e_sigma1: f64,
    pub e_sigma2: f64,
    pub e_full: f64,
    /// `16π²|Q|/R`, with `R = 1` when no radius is known.
    pub bound: f64,
    pub bound_ratio: f64,
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl EnergyReport {
    fn assemble(charge: Charge, radius: Option<f64>, coupling: f64, e1: f64, e2: f64, quad: &Quadrature) -> Self {
        let bound = 16.0 * PI * PI * charge.hopf().unsigned_abs() as f64 / radius.unwrap_or(1.0);
        Self {
            k: charge.k(),
            l: charge.l(),
            q: charge.hopf(),
            radius,
            coupling,
            e_sigma1: e1,
            e_sigma2: e2,
            e_full: e1 + coupling * e2,
            bound,
            bound_ratio: e2 / bound,
            panels: quad.panels(),
            nodes_per_panel: quad.nodes_per_panel(),
        }
    }
}

/// `E_σ₁ + K E_σ₂` on the round sphere of radius `R`.
pub fn full_energy(profile: &Profile, charge: Charge, radius: f64, coupling: f64, quad: &Quadrature) -> Result<EnergyReport> {
    check_coupling(coupling)?;
    let e1 = reduced_dirichlet_energy(profile, charge, radius, quad)?;
    let e2 = reduced_sigma2_energy(profile, charge, radius, quad)?;
    Ok(EnergyReport::assemble(charge, Some(radius), coupling, e1, e2, quad))
}

/// Energies under an arbitrary metric of the family: `4π² ∫ ½(λ₁² + λ₂²) vol ds` and
/// `4π² ∫ ½ λ₁²λ₂² vol ds`.
///
/// The densities use the trace and determinant of `φ*h` on the adapted frame, which avoids
/// separating nearly equal eigenvalues.
pub fn generalized_energy(
    profile: &Profile,
    charge: Charge,
    metric: &MetricFamily,
    quad: &Quadrature,
    coupling: f64,
) -> Result<EnergyReport> {
    check_coupling(coupling)?;
    let density = |s: f64| -> Result<(f64, f64)> {
        let g = metric.at(s)?;
        let f = frame_from(g.values(), charge);
        let a = profile.eval(s);
        let (m11, m22, m12) = frame_quotients(charge, a.v, a.d, &f);
        let vol = volume_from(&g);
        Ok((0.5 * (m11 + m22) * vol, 0.5 * (m11 * m22 - m12 * m12) * vol))
    };
    let scale = 4.0 * PI * PI;
    let e1 = scale * quad.integrate_converged(RTOL, MAX_DOUBLINGS, |s| Ok(density(s)?.0))?;
    let e2 = scale * quad.integrate_converged(RTOL, MAX_DOUBLINGS, |s| Ok(density(s)?.1))?;
    Ok(EnergyReport::assemble(charge, metric.radius(), coupling, e1, e2, quad))
}

/// Comparison of `E_σ₂` with `16π²|Q|/R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub ratio: f64,
    /// `ratio ≥ 1 − tol`.
    pub satisfied: bool,
    /// `|ratio − 1| ≤ tol`.
    pub equality: bool,
    /// Equality is attained exactly for `|k| = |ℓ|`.
    pub equality_expected: bool,
}

pub fn bound_check(report: &EnergyReport, tol: f64) -> BoundReport {
    let ratio = report.bound_ratio;
    BoundReport {
        ratio,
        satisfied: ratio >= 1.0 - tol,
        equality: (ratio - 1.0).abs() <= tol,
        equality_expected: report.k.unsigned_abs() == report.l.unsigned_abs(),
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")))
    }
}

fn check_coupling(k: f64) -> Result<()> {
    if k >= 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("coupling K must be nonnegative, got {k}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{hc_profile, sigma2_profile, HcConfig};
    use crate::real::{Jet, Real};
    use crate::s3geom::scalar_fn;

    fn charge(k: i64, l: i64) -> Charge {
        Charge::new(k, l).unwrap()
    }

    #[test]
    fn hopf_map_energies() {
        let q = Quadrature::default();
        let c = charge(1, 1);
        let e2 = reduced_sigma2_energy(&Profile::Linear, c, 1.0, &q).unwrap();
        assert!((e2 - 16.0 * PI * PI).abs() < 1e-10 * e2);
        let e1 = reduced_dirichlet_energy(&Profile::Linear, c, 1.0, &q).unwrap();
        assert!((e1 - 8.0 * PI * PI).abs() < 1e-10 * e1);
        let r = full_energy(&Profile::Linear, c, 1.0, 1.0, &q).unwrap();
        assert!((r.e_full - 24.0 * PI * PI).abs() < 1e-9);
        assert!(bound_check(&r, 1e-10).equality);
    }

    #[test]
    fn sigma2_energy_matches_closed_form() {
        let q = Quadrature::default();
        for k in 1..=6i64 {
            for l in 1..=k {
                let c = charge(k, l);
                let e = reduced_sigma2_energy(&sigma2_profile(c), c, 1.0, &q).unwrap();
                let exact = closed_form_sigma2_energy(c, 1.0);
                assert!((e - exact).abs() < 1e-8 * exact, "({k},{l}) {e} {exact}");
            }
        }
        let c = charge(2, 1);
        assert!((closed_form_sigma2_energy(c, 1.0) - 16.0 * PI * PI * 3.0 / 4f64.ln()).abs() < 1e-10);
        let r = full_energy(&sigma2_profile(c), c, 1.0, 1.0, &q).unwrap();
        assert!((r.bound_ratio - 3.0 / (2.0 * 4f64.ln())).abs() < 1e-9);
        let c = charge(5, 1);
        let r = full_energy(&sigma2_profile(c), c, 1.0, 0.0, &q).unwrap();
        assert!((r.bound_ratio - 24.0 / (5.0 * 25f64.ln())).abs() < 1e-9);
        assert_eq!(r.e_full, r.e_sigma1);
    }

    #[test]
    fn radius_scaling() {
        let q = Quadrature::default();
        let c = charge(3, 2);
        let p = sigma2_profile(c);
        let a = reduced_sigma2_energy(&p, c, 1.0, &q).unwrap();
        let b = reduced_sigma2_energy(&p, c, 2.0, &q).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-12 * a);
        let a = reduced_dirichlet_energy(&p, c, 1.0, &q).unwrap();
        let b = reduced_dirichlet_energy(&p, c, 2.0, &q).unwrap();
        assert!((2.0 * a - b).abs() < 1e-12 * b);
    }

    #[test]
    fn log_mean_is_continuous() {
        let a: f64 = 20001.0 * 20001.0;
        let b: f64 = 20000.0 * 20000.0;
        let direct = (a - b) / (a / b).ln();
        assert!((log_mean(a, b) - direct).abs() < 1e-6 * direct);
        assert!((log_mean(b * (1.0 + 1e-9), b) - b).abs() < 1e-6 * b);
        assert_eq!(log_mean(4.0, 4.0), 4.0);
    }

    #[test]
    fn generalized_matches_reduced_on_round_metrics() {
        let q = Quadrature::default();
        for (c, p) in [(charge(2, 1), sigma2_profile(charge(2, 1))), (charge(1, 3), Profile::Linear)] {
            for r in [1.0, 1.7] {
                let g = generalized_energy(&p, c, &MetricFamily::canonical(r), &q, 1.0).unwrap();
                let e1 = reduced_dirichlet_energy(&p, c, r, &q).unwrap();
                let e2 = reduced_sigma2_energy(&p, c, r, &q).unwrap();
                assert!((g.e_sigma1 - e1).abs() < 1e-10 * e1);
                assert!((g.e_sigma2 - e2).abs() < 1e-10 * e2);
            }
        }
    }

    #[test]
    fn conformal_change_weights_sigma2_density() {
        // Under e^{2γ} can the σ₂ density picks up e^{−4γ} e^{3γ} = e^{−γ}.
        let c = charge(2, 1);
        let p = sigma2_profile(c);
        let gamma = |s: f64| 0.3 * (2.0 * s).sin();
        let m = MetricFamily::conformal(1.0, scalar_fn(move |s| (Jet::var(s) * 2.0).sin() * 0.3));
        let q = Quadrature::default();
        let g = generalized_energy(&p, c, &m, &q, 1.0).unwrap();
        let expect = 2.0 * PI * PI
            * q.integrate(|s| {
                let a = p.eval(s);
                (-gamma(s)).exp() * c.w(s) * (a.d * a.v.sin()).powi(2)
            });
        assert!((g.e_sigma2 - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn hc_profile_becomes_submersion_under_biconformal_change() {
        let c = charge(2, 1);
        let hc = Profile::Discrete(hc_profile(c, HcConfig::default()).unwrap());
        let h = hc.clone();
        let lam = scalar_fn(move |s| {
            let a = h.eval(s);
            Jet::new(a.d, a.dd, 0.0)
        });
        let m = MetricFamily::frame_diagonal(&MetricFamily::canonical(1.0), c, lam, crate::s3geom::constant_fn(1.0));
        for s in [0.3, 0.8, 1.2] {
            let g = m.at(s).unwrap();
            let f = frame_from(g.values(), c);
            let a = hc.eval(s);
            let (m11, m22, m12) = frame_quotients(c, a.v, a.d, &f);
            assert!((m11 - 1.0).abs() < 1e-8 && (m22 - 1.0).abs() < 1e-8 && m12.abs() < 1e-12);
        }
        let q = Quadrature::new(64, 16);
        let g = generalized_energy(&hc, c, &m, &q, 1.0).unwrap();
        let vol = 2.0 * PI * PI * q.integrate(|s| volume_from(&m.at(s).unwrap()));
        assert!((g.e_sigma2 - vol).abs() < 1e-8 * vol);
    }
}
