//! Geometry of `S³` in torus coordinates `(x1, x2, s)`.
//!
//! A point is `(cos s · e^{i x1}, sin s · e^{i x2})` (scaled by the radius). Every metric
//! considered here is invariant under both circle actions, so its coefficients depend on `s`
//! only, and the `ds` direction is orthogonal to the `(x1, x2)` block:
//!
//! ```text
//! g = g11 dx1² + 2 g12 dx1 dx2 + g22 dx2² + g33 ds²
//! ```
//!
//! Coordinates are indexed `0 = x1`, `1 = x2`, `2 = s` throughout.

use alloc::sync::Arc;
use core::f64::consts::PI;
use core::fmt;

use crate::ansatz::Charge;
use crate::real::{Dual, Jet, Real};
use crate::{Error, Result, HALF_PI};

/// A point of the open torus chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    pub x1: f64,
    pub x2: f64,
    pub s: f64,
}

impl TorusPoint {
    /// Angles are reduced to `[0, 2π)`; `s` must lie in `[0, π/2]`.
    pub fn new(x1: f64, x2: f64, s: f64) -> Result<Self> {
        if !(0.0..=HALF_PI).contains(&s) {
            return Err(Error::Domain { s });
        }
        Ok(Self {
            x1: wrap_angle(x1),
            x2: wrap_angle(x2),
            s,
        })
    }

    /// The point of `S³_R ⊂ ℝ⁴`.
    pub fn embed(&self, radius: f64) -> [f64; 4] {
        let (c, sn) = (self.s.cos(), self.s.sin());
        [
            radius * c * self.x1.cos(),
            radius * c * self.x1.sin(),
            radius * sn * self.x2.cos(),
            radius * sn * self.x2.sin(),
        ]
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = x - two_pi * libm::floor(x / two_pi);
    if r >= two_pi { 0.0 } else { r }
}

/// Rejects latitudes at or beyond the chart endpoints.
pub fn check_interior(s: f64) -> Result<()> {
    if s > 0.0 && s < HALF_PI {
        Ok(())
    } else {
        Err(Error::Domain { s })
    }
}

/// A scalar function of the latitude with its first two derivatives.
pub type ScalarFn = Arc<dyn Fn(f64) -> Jet + Send + Sync>;

/// Wraps a closure as a [`ScalarFn`].
pub fn scalar_fn<F: Fn(f64) -> Jet + Send + Sync + 'static>(f: F) -> ScalarFn {
    Arc::new(f)
}

/// The constant function.
pub fn constant_fn(c: f64) -> ScalarFn {
    Arc::new(move |_| Jet::new(c, 0.0, 0.0))
}

/// Metric coefficients at one latitude, each with `∂_s` and `∂²_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub g11: Jet,
    pub g12: Jet,
    pub g22: Jet,
    pub g33: Jet,
}

impl MetricJet {
    /// `[g11, g12, g22, g33]` as values with first derivatives.
    pub fn duals(&self) -> [Dual; 4] {
        [self.g11.dual(), self.g12.dual(), self.g22.dual(), self.g33.dual()]
    }

    pub fn values(&self) -> [f64; 4] {
        [self.g11.v, self.g12.v, self.g22.v, self.g33.v]
    }

    /// Full 3×3 matrix of values.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.g11.v, self.g12.v, 0.0],
            [self.g12.v, self.g22.v, 0.0],
            [0.0, 0.0, self.g33.v],
        ]
    }

    /// Full 3×3 matrix of `∂_s` derivatives.
    pub fn matrix_ds(&self) -> [[f64; 3]; 3] {
        [
            [self.g11.d, self.g12.d, 0.0],
            [self.g12.d, self.g22.d, 0.0],
            [0.0, 0.0, self.g33.d],
        ]
    }

    fn scaled(self, f: Jet) -> Self {
        Self {
            g11: self.g11 * f,
            g12: self.g12 * f,
            g22: self.g22 * f,
            g33: self.g33 * f,
        }
    }
}

/// Which constructor produced a [`MetricFamily`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricLabel {
    Canonical { radius: f64 },
    Conformal { radius: f64 },
    FrameDiagonal { radius: Option<f64> },
    General,
}

/// An `s`-dependent metric on the torus chart, with analytic derivatives.
#[derive(Clone)]
pub struct MetricFamily {
    label: MetricLabel,
    eval: Arc<dyn Fn(f64) -> MetricJet + Send + Sync>,
}

impl fmt::Debug for MetricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricFamily").field("label", &self.label).finish_non_exhaustive()
    }
}

impl MetricFamily {
    /// The round metric `R²(cos²s dx1² + sin²s dx2² + ds²)`.
    pub fn canonical(radius: f64) -> Self {
        let r2 = radius * radius;
        Self {
            label: MetricLabel::Canonical { radius },
            eval: Arc::new(move |s| {
                let s = Jet::var(s);
                MetricJet {
                    g11: s.cos().sq() * r2,
                    g12: Jet::cst(0.0),
                    g22: s.sin().sq() * r2,
                    g33: Jet::cst(r2),
                }
            }),
        }
    }

    /// `e^{2γ(s)}` times the round metric of radius `radius`.
    pub fn conformal(radius: f64, gamma: ScalarFn) -> Self {
        let base = Self::canonical(radius);
        Self {
            label: MetricLabel::Conformal { radius },
            eval: Arc::new(move |s| {
                let factor = (gamma(s) * 2.0).exp();
                (base.eval)(s).scaled(factor)
            }),
        }
    }

    /// `A² g^H + B² g^V`, splitting `base` along the fibres of the ansatz map of `charge`.
    ///
    /// The vertical direction is `V = ℓ ∂_{x1} − k ∂_{x2}` and the horizontal space is its
    /// `base`-orthogonal complement, which contains `∂_s`. In coordinates
    /// `g̃ = A² g + (B² − A²) θ⊗θ` with `θ = g(V, ·)/|V|`, which introduces a `dx1 dx2`
    /// cross term even when `base` is diagonal.
    pub fn frame_diagonal(base: &MetricFamily, charge: Charge, horizontal: ScalarFn, vertical: ScalarFn) -> Self {
        let radius = base.radius();
        let base = base.clone();
        let (k, l) = (charge.k() as f64, charge.l() as f64);
        Self {
            label: MetricLabel::FrameDiagonal { radius },
            eval: Arc::new(move |s| {
                let g = (base.eval)(s);
                let a2 = horizontal(s).sq();
                let b2 = vertical(s).sq();
                // θ_i ∝ (G V)_i with V = (ℓ, −k).
                let t1 = g.g11 * l - g.g12 * k;
                let t2 = g.g12 * l - g.g22 * k;
                let vv = t1 * l - t2 * k;
                let c = (b2 - a2) / vv;
                MetricJet {
                    g11: a2 * g.g11 + c * t1 * t1,
                    g12: a2 * g.g12 + c * t1 * t2,
                    g22: a2 * g.g22 + c * t2 * t2,
                    g33: a2 * g.g33,
                }
            }),
        }
    }

    /// Any block metric given by its coefficient jets.
    pub fn general<F: Fn(f64) -> MetricJet + Send + Sync + 'static>(f: F) -> Self {
        Self {
            label: MetricLabel::General,
            eval: Arc::new(f),
        }
    }

    pub fn label(&self) -> MetricLabel {
        self.label
    }

    /// The radius of the underlying round sphere, when there is one.
    pub fn radius(&self) -> Option<f64> {
        match self.label {
            MetricLabel::Canonical { radius } | MetricLabel::Conformal { radius } => Some(radius),
            MetricLabel::FrameDiagonal { radius } => radius,
            MetricLabel::General => None,
        }
    }

    /// Coefficients without any checks.
    pub fn jet(&self, s: f64) -> MetricJet {
        (self.eval)(s)
    }

    /// Coefficients at an interior latitude, checking positive definiteness.
    pub fn at(&self, s: f64) -> Result<MetricJet> {
        check_interior(s)?;
        let g = self.jet(s);
        let det = g.g11.v * g.g22.v - g.g12.v * g.g12.v;
        if !(g.g11.v > 0.0 && det > 0.0 && g.g33.v > 0.0) {
            return Err(Error::DegenerateMetric {
                s,
                what: "block is not positive definite",
            });
        }
        if !(g.g11.d.is_finite() && g.g12.d.is_finite() && g.g22.d.is_finite() && g.g33.d.is_finite()) {
            return Err(Error::DegenerateMetric {
                s,
                what: "non-finite derivative",
            });
        }
        Ok(g)
    }
}

/// `Γ^k_{ij}` at one latitude, indexed `gamma[k][i][j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChristoffelTable {
    pub gamma: [[[f64; 3]; 3]; 3],
}

impl ChristoffelTable {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[k][i][j]
    }
}

fn inverse3(g: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    [
        [g[1][1] / det, -g[0][1] / det, 0.0],
        [-g[1][0] / det, g[0][0] / det, 0.0],
        [0.0, 0.0, 1.0 / g[2][2]],
    ]
}

/// Christoffel symbols of the second kind from `∂_s` of the metric, the only nonzero
/// coordinate derivative.
pub fn christoffel(metric: &MetricFamily, s: f64) -> Result<ChristoffelTable> {
    let g = metric.at(s)?;
    Ok(christoffel_from(&g))
}

pub(crate) fn christoffel_from(g: &MetricJet) -> ChristoffelTable {
    let m = g.matrix();
    let dm = g.matrix_ds();
    let inv = inverse3(&m);
    // ∂_l g_ij is nonzero only for l = 2.
    let dg = |l: usize, i: usize, j: usize| if l == 2 { dm[i][j] } else { 0.0 };
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for (k, gk) in gamma.iter_mut().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for l in 0..3 {
                    acc += inv[k][l] * (dg(i, l, j) + dg(j, l, i) - dg(l, i, j));
                }
                gk[i][j] = 0.5 * acc;
            }
        }
    }
    ChristoffelTable { gamma }
}

/// `max |∂_s g_ij − (g_kj Γ^k_si + g_ik Γ^k_sj)|`.
pub fn metric_compatibility_residual(metric: &MetricFamily, s: f64) -> Result<f64> {
    let g = metric.at(s)?;
    let table = christoffel_from(&g);
    let m = g.matrix();
    let dm = g.matrix_ds();
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut rhs = 0.0;
            for k in 0..3 {
                rhs += m[k][j] * table.gamma[k][2][i] + m[i][k] * table.gamma[k][2][j];
            }
            worst = worst.max((dm[i][j] - rhs).abs());
        }
    }
    Ok(worst)
}

/// Orthonormal frame adapted to the ansatz map: `e1`, `e2` horizontal, `e3` spanning the
/// kernel of the differential. Components are coordinate components `(x1, x2, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptedFrame<T = f64> {
    pub e1: [T; 3],
    pub e2: [T; 3],
    pub e3: [T; 3],
}

/// Frame from metric coefficients `[g11, g12, g22, g33]`, generic so that it can be carried
/// through dual numbers.
///
/// `e1 = ∂_s/|∂_s|`; `e3 ∝ ℓ ∂_{x1} − k ∂_{x2}`; `e2 ∝ G⁻¹(k, ℓ)`, the metric dual of
/// `k dx1 + ℓ dx2`. On the round sphere these are the familiar closed forms.
pub fn frame_from<T: Real>(g: [T; 4], charge: Charge) -> AdaptedFrame<T> {
    let [g11, g12, g22, g33] = g;
    let (k, l) = (charge.k() as f64, charge.l() as f64);
    let zero = T::cst(0.0);
    let e1 = [zero, zero, g33.sqrt().recip()];

    let vv = g11 * (l * l) - g12 * (2.0 * k * l) + g22 * (k * k);
    let nv = vv.sqrt();
    let e3 = [T::cst(l) / nv, T::cst(-k) / nv, zero];

    let det = g11 * g22 - g12 * g12;
    let w1 = (g22 * k - g12 * l) / det;
    let w2 = (g11 * l - g12 * k) / det;
    // |w|² = (k, ℓ) G⁻¹ (k, ℓ)ᵀ.
    let nw = (w1 * k + w2 * l).sqrt();
    let e2 = [w1 / nw, w2 / nw, zero];
    AdaptedFrame { e1, e2, e3 }
}

/// The adapted orthonormal frame at `s`.
pub fn adapted_frame(metric: &MetricFamily, charge: Charge, s: f64) -> Result<AdaptedFrame> {
    let g = metric.at(s)?;
    Ok(frame_from(g.values(), charge))
}

/// `g(X, Y)` for coordinate vectors.
pub fn inner(g: &[[f64; 3]; 3], x: &[f64; 3], y: &[f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += g[i][j] * x[i] * y[j];
        }
    }
    acc
}

/// `∇_X Y` for fields whose components depend on `s` only; `dy_ds` is `∂_s Y`.
pub fn covariant(table: &ChristoffelTable, x: &[f64; 3], y: &[f64; 3], dy_ds: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = x[2] * dy_ds[k];
        for i in 0..3 {
            for j in 0..3 {
                acc += table.gamma[k][i][j] * x[i] * y[j];
            }
        }
        *o = acc;
    }
    out
}

/// Frame values together with their `∂_s` derivatives.
pub(crate) fn frame_with_derivative(g: &MetricJet, charge: Charge) -> (AdaptedFrame, AdaptedFrame) {
    let f = frame_from(g.duals(), charge);
    let split = |v: [Dual; 3]| ([v[0].v, v[1].v, v[2].v], [v[0].d, v[1].d, v[2].d]);
    let (e1, d1) = split(f.e1);
    let (e2, d2) = split(f.e2);
    let (e3, d3) = split(f.e3);
    (
        AdaptedFrame { e1, e2, e3 },
        AdaptedFrame {
            e1: d1,
            e2: d2,
            e3: d3,
        },
    )
}

/// Components of the fibre mean curvature `μ^V = ∇_{e3} e3` (one-dimensional fibres) along
/// the horizontal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCurvature {
    /// `g(μ^V, e1)`.
    pub along_e1: f64,
    /// `g(μ^V, e2)`; vanishes for every metric in the family.
    pub along_e2: f64,
}

pub(crate) fn mean_curvature_from(g: &MetricJet, charge: Charge) -> MeanCurvature {
    let table = christoffel_from(g);
    let (f, df) = frame_with_derivative(g, charge);
    let nabla = covariant(&table, &f.e3, &f.e3, &df.e3);
    let m = g.matrix();
    MeanCurvature {
        along_e1: inner(&m, &nabla, &f.e1),
        along_e2: inner(&m, &nabla, &f.e2),
    }
}

/// `g(μ^V, e1)` and `g(μ^V, e2)` at `s`, from Christoffel symbols and the adapted frame.
pub fn vertical_mean_curvature(metric: &MetricFamily, charge: Charge, s: f64) -> Result<MeanCurvature> {
    let g = metric.at(s)?;
    Ok(mean_curvature_from(&g, charge))
}

/// `√det g` of the full 3×3 metric.
pub fn volume_density(metric: &MetricFamily, s: f64) -> Result<f64> {
    let g = metric.at(s)?;
    Ok(volume_from(&g))
}

pub(crate) fn volume_from(g: &MetricJet) -> f64 {
    ((g.g11.v * g.g22.v - g.g12.v * g.g12.v) * g.g33.v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Quadrature;

    fn charge(k: i64, l: i64) -> Charge {
        Charge::new(k, l).unwrap()
    }

    #[test]
    fn canonical_christoffel_values() {
        let m = MetricFamily::canonical(1.0);
        let t = christoffel(&m, PI / 4.0).unwrap();
        assert!((t.get(2, 0, 0) - 0.5).abs() < 1e-15);
        for s in [0.1, 0.7, 1.3] {
            let t = christoffel(&m, s).unwrap();
            assert_eq!(t.get(2, 2, 2), 0.0);
            assert!((t.get(2, 0, 0) - s.cos() * s.sin()).abs() < 1e-15);
            assert!((t.get(2, 1, 1) + s.cos() * s.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn christoffel_symmetry_and_compatibility() {
        let metrics = [
            MetricFamily::canonical(1.3),
            MetricFamily::conformal(1.0, scalar_fn(Jet::var)),
            MetricFamily::frame_diagonal(
                &MetricFamily::canonical(1.0),
                charge(3, -2),
                scalar_fn(|s| (Jet::var(s) * 2.0).sin() * 0.3 + 1.0),
                scalar_fn(|s| Jet::var(s).cos() * 0.5 + 1.0),
            ),
        ];
        for m in &metrics {
            for i in 1..40 {
                let s = i as f64 * HALF_PI / 40.0;
                let t = christoffel(m, s).unwrap();
                for k in 0..3 {
                    for a in 0..3 {
                        for b in 0..3 {
                            assert_eq!(t.gamma[k][a][b], t.gamma[k][b][a]);
                        }
                    }
                }
                assert!(metric_compatibility_residual(m, s).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn conformal_derivative_matches_finite_difference() {
        let m = MetricFamily::conformal(1.0, scalar_fn(Jet::var));
        let s = PI / 4.0;
        let h = 1e-5;
        let fd = (m.jet(s + h).g11.v - m.jet(s - h).g11.v) / (2.0 * h);
        assert!((m.jet(s).g11.d - fd).abs() < 1e-9);
        assert!(metric_compatibility_residual(&m, s).unwrap() < 1e-12);
    }

    #[test]
    fn chart_endpoints_are_rejected() {
        let m = MetricFamily::canonical(1.0);
        assert!(matches!(christoffel(&m, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(adapted_frame(&m, charge(1, 1), HALF_PI), Err(Error::Domain { .. })));
        assert!(TorusPoint::new(0.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let m = MetricFamily::general(|_| MetricJet {
            g11: Jet::cst(1.0),
            g12: Jet::cst(2.0),
            g22: Jet::cst(1.0),
            g33: Jet::cst(1.0),
        });
        assert!(matches!(
            adapted_frame(&m, charge(1, 1), 0.5),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn hopf_frame_closed_forms() {
        let m = MetricFamily::canonical(1.0);
        let f = adapted_frame(&m, charge(1, 1), PI / 4.0).unwrap();
        assert!((f.e3[0] - 1.0).abs() < 1e-15 && (f.e3[1] + 1.0).abs() < 1e-15 && f.e3[2] == 0.0);
        for r in [0.5, 2.0] {
            let f = adapted_frame(&MetricFamily::canonical(r), charge(3, -1), 0.3).unwrap();
            assert_eq!(f.e1, [0.0, 0.0, 1.0 / r]);
        }
    }

    #[test]
    fn canonical_frame_matches_closed_form_components() {
        // E3 = kℓ/√(k² sin² + ℓ² cos²)(cos s/k f1 − sin s/ℓ f2), f1 = ∂1/(R cos), f2 = ∂2/(R sin)
        for &(k, l) in &[(2i64, 1i64), (-3, 2), (1, -4)] {
            for &s in &[0.2, 0.9] {
                let r = 1.7;
                let f = adapted_frame(&MetricFamily::canonical(r), charge(k, l), s).unwrap();
                let (kf, lf) = (k as f64, l as f64);
                let q = (kf * kf * s.sin().powi(2) + lf * lf * s.cos().powi(2)).sqrt();
                let e3 = [kf * lf / q / (kf * r), -kf * lf / q / (lf * r)];
                let e2 = [kf * lf / q * s.sin() / (lf * r * s.cos()), kf * lf / q * s.cos() / (kf * r * s.sin())];
                for i in 0..2 {
                    assert!((f.e3[i] - e3[i]).abs() < 1e-14);
                    assert!((f.e2[i] - e2[i]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn frame_is_orthonormal_and_vertical() {
        let m = MetricFamily::canonical(2.0);
        let c = charge(2, 1);
        let s = PI / 3.0;
        let f = adapted_frame(&m, c, s).unwrap();
        let g = m.at(s).unwrap().matrix();
        let e = [f.e1, f.e2, f.e3];
        for a in 0..3 {
            for b in 0..3 {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((inner(&g, &e[a], &e[b]) - expect).abs() < 1e-12);
            }
        }
        assert_eq!(2.0 * f.e3[0] + f.e3[1], 0.0);
    }

    #[test]
    fn hopf_fibres_are_geodesics() {
        let m = MetricFamily::canonical(1.0);
        for s in [0.1, 0.5, 1.2] {
            let mu = vertical_mean_curvature(&m, charge(1, 1), s).unwrap();
            assert!(mu.along_e1.abs() < 1e-15 && mu.along_e2.abs() < 1e-15);
        }
    }

    #[test]
    fn mean_curvature_of_21_fibre_at_quarter() {
        // |V|² = cos²s + 4 sin²s; g(μ, e1) = −½ ∂_s ln |V|² = −3 sin s cos s/(cos² + 4 sin²).
        let mu = vertical_mean_curvature(&MetricFamily::canonical(1.0), charge(2, 1), PI / 4.0).unwrap();
        assert!((mu.along_e1 + 0.6).abs() < 1e-14, "{}", mu.along_e1);
    }

    #[test]
    fn volume_density_values() {
        let r = 1.5;
        let m = MetricFamily::canonical(r);
        let s = 0.4;
        assert!((volume_density(&m, s).unwrap() - r.powi(3) * s.cos() * s.sin()).abs() < 1e-14);
        let total = 4.0 * PI * PI * Quadrature::default().integrate(|s| volume_density(&MetricFamily::canonical(1.0), s).unwrap());
        assert!((total - 2.0 * PI * PI).abs() < 1e-12);
        let c = MetricFamily::conformal(1.0, scalar_fn(Jet::var));
        assert!((volume_density(&c, s).unwrap() - (3.0 * s).exp() * s.cos() * s.sin()).abs() < 1e-14);
    }
}
