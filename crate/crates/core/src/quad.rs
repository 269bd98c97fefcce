//! Gauss–Legendre quadrature: single rules, composite rules on `[0, π/2]` and an
//! adaptive bisection integrator.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // float methods come from `Real` without std
use crate::real::Real;

use crate::{Error, Result, HALF_PI};

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Sum in a fixed binary-tree order so results do not depend on how the terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Composite Gauss–Legendre rule on `[clearance, π/2 − clearance]`.
///
/// All nodes are strictly interior, so integrands with `tan s` or `cot s` factors can be
/// evaluated directly.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    panels: usize,
    rule: GaussLegendre,
    clearance: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::new(64, 16)
    }
}

impl Quadrature {
    pub fn new(panels: usize, nodes_per_panel: usize) -> Self {
        Self::with_clearance(panels, nodes_per_panel, 0.0)
    }

    pub fn with_clearance(panels: usize, nodes_per_panel: usize, clearance: f64) -> Self {
        assert!(panels >= 1);
        assert!((0.0..HALF_PI / 2.0).contains(&clearance));
        Self {
            panels,
            rule: GaussLegendre::new(nodes_per_panel),
            clearance,
        }
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.rule.len()
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    /// Same rule with twice as many panels.
    pub fn refined(&self) -> Self {
        Self {
            panels: 2 * self.panels,
            rule: self.rule.clone(),
            clearance: self.clearance,
        }
    }

    /// The integration interval `[clearance, π/2 − clearance]`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.clearance, HALF_PI - self.clearance)
    }

    pub fn rule(&self) -> &GaussLegendre {
        &self.rule
    }

    /// Panel boundaries, `panels + 1` increasing values.
    pub fn panel_edges(&self) -> Vec<f64> {
        let (a, b) = self.bounds();
        let width = (b - a) / self.panels as f64;
        (0..=self.panels)
            .map(|p| if p == self.panels { b } else { a + width * p as f64 })
            .collect()
    }

    /// All `(s, weight)` pairs, panel by panel.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let (a, b) = self.bounds();
        let width = (b - a) / self.panels as f64;
        let mut out = Vec::with_capacity(self.panels * self.rule.len());
        for p in 0..self.panels {
            let lo = a + width * p as f64;
            let mid = lo + 0.5 * width;
            for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                out.push((mid + 0.5 * width * x, 0.5 * width * w));
            }
        }
        out
    }

    /// `∫ f ds` with panel sums combined pairwise.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let (a, b) = self.bounds();
        let width = (b - a) / self.panels as f64;
        let sums: Vec<f64> = (0..self.panels)
            .map(|p| {
                let lo = a + width * p as f64;
                self.rule.integrate(lo, lo + width, &mut f)
            })
            .collect();
        pairwise_sum(&sums)
    }

    /// Fallible version of [`integrate`](Self::integrate); the first error aborts.
    pub fn try_integrate<F: FnMut(f64) -> Result<f64>>(&self, mut f: F) -> Result<f64> {
        let mut err = None;
        let v = self.integrate(|s| {
            if err.is_some() {
                return 0.0;
            }
            match f(s) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// Integrates with this rule and with panel doubling until two successive results agree
    /// to `rtol` (at most `max_doublings` refinements).
    pub fn integrate_converged<F: FnMut(f64) -> Result<f64>>(
        &self,
        rtol: f64,
        max_doublings: usize,
        mut f: F,
    ) -> Result<f64> {
        let mut q = self.clone();
        let mut prev = q.try_integrate(&mut f)?;
        for _ in 0..=max_doublings {
            let fine = q.refined();
            let next = fine.try_integrate(&mut f)?;
            if !next.is_finite() {
                return Err(Error::Quadrature(format!("non-finite integral {next}")));
            }
            if (next - prev).abs() <= rtol * next.abs().max(f64::MIN_POSITIVE) {
                return Ok(next);
            }
            prev = next;
            q = fine;
        }
        Err(Error::Quadrature(format!(
            "no agreement to rtol {rtol:e} after {max_doublings} panel doublings (last value {prev})"
        )))
    }
}

/// Adaptive bisection with a 10-point Gauss–Legendre rule.
///
/// Intervals are split until the rule on an interval agrees with the sum over its halves to
/// `tol` (absolute, distributed in proportion to interval length).
pub fn adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, tol: f64, mut f: F) -> Result<f64> {
    const MAX_DEPTH: u32 = 100;
    if a == b {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(10);
    let total = (b - a).abs();
    let mut stack: Vec<(f64, f64, f64, u32)> = alloc::vec![(a, b, rule.integrate(a, b, &mut f), 0)];
    let mut parts: Vec<f64> = Vec::new();
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f);
        let right = rule.integrate(mid, hi, &mut f);
        let local_tol = tol * ((hi - lo).abs() / total).max(1e-3);
        if (left + right - whole).abs() <= local_tol {
            parts.push(left + right);
        } else if depth >= MAX_DEPTH {
            return Err(Error::Quadrature(format!(
                "adaptive quadrature exceeded depth {MAX_DEPTH} on [{lo}, {hi}]"
            )));
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    let v = pairwise_sum(&parts);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Quadrature(format!("non-finite integral on [{a}, {b}]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_polynomials() {
        for n in 1..=20 {
            let r = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let got = r.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n={n}");
            let wsum: f64 = r.weights().iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn composite_sine_integral() {
        let q = Quadrature::default();
        let v = q.integrate(|s| s.sin() * s.cos());
        assert!((v - 0.5).abs() < 1e-15);
        assert!(q.points().iter().all(|&(s, _)| s > 0.0 && s < HALF_PI));
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = adaptive(0.0, 1.0, 1e-10, |x| 1.0 / x.sqrt()).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn converged_detects_nonconvergence() {
        let q = Quadrature::new(1, 2);
        let r = q.integrate_converged(1e-14, 1, |s| Ok((200.0 * s).sin().abs()));
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}
