//! Piecewise-polynomial interpolation returning values with two derivatives.

use alloc::vec::Vec;

use crate::linalg::SymTridiagonal;
use crate::real::Jet;

/// Interpolant over strictly increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Interpolant {
    /// Natural cubic spline (zero second derivative at both ends).
    NaturalCubic { x: Vec<f64>, y: Vec<f64>, m: Vec<f64> },
    /// Cubic Hermite from values and first derivatives.
    CubicHermite { x: Vec<f64>, y: Vec<f64>, dy: Vec<f64> },
    /// Quintic Hermite from values, first and second derivatives.
    QuinticHermite {
        x: Vec<f64>,
        y: Vec<f64>,
        dy: Vec<f64>,
        ddy: Vec<f64>,
    },
}

impl Interpolant {
    pub fn natural_cubic(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let mut m = alloc::vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = Vec::with_capacity(k);
            let mut off = Vec::with_capacity(k.saturating_sub(1));
            let mut rhs = Vec::with_capacity(k);
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                diag.push((h0 + h1) / 3.0);
                if i < n - 2 {
                    off.push(h1 / 6.0);
                }
                rhs.push((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            let sol = SymTridiagonal::new(diag, off)
                .solve_positive(0.0, &rhs)
                .expect("spline system is diagonally dominant");
            m[1..n - 1].copy_from_slice(&sol);
        }
        Self::NaturalCubic { x, y, m }
    }

    pub fn cubic_hermite(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && y.len() == x.len() && dy.len() == x.len());
        Self::CubicHermite { x, y, dy }
    }

    pub fn quintic_hermite(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>, ddy: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && y.len() == x.len() && dy.len() == x.len() && ddy.len() == x.len());
        Self::QuinticHermite { x, y, dy, ddy }
    }

    pub fn nodes(&self) -> &[f64] {
        match self {
            Self::NaturalCubic { x, .. } | Self::CubicHermite { x, .. } | Self::QuinticHermite { x, .. } => x,
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Self::NaturalCubic { y, .. } | Self::CubicHermite { y, .. } | Self::QuinticHermite { y, .. } => y,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        let x = self.nodes();
        (x[0], x[x.len() - 1])
    }

    /// Value and derivatives at `t`; `t` is clamped to the node range.
    pub fn eval(&self, t: f64) -> Jet {
        let x = self.nodes();
        let n = x.len();
        let t = t.clamp(x[0], x[n - 1]);
        let i = (x.partition_point(|&xi| xi <= t).max(1) - 1).min(n - 2);
        let h = x[i + 1] - x[i];
        let u = (t - x[i]) / h;
        match self {
            Self::NaturalCubic { y, m, .. } => {
                let a = 1.0 - u;
                let v = a * y[i] + u * y[i + 1] + h * h / 6.0 * ((a * a * a - a) * m[i] + (u * u * u - u) * m[i + 1]);
                let d = (y[i + 1] - y[i]) / h + h / 6.0 * (-(3.0 * a * a - 1.0) * m[i] + (3.0 * u * u - 1.0) * m[i + 1]);
                let dd = a * m[i] + u * m[i + 1];
                Jet::new(v, d, dd)
            }
            Self::CubicHermite { y, dy, .. } => {
                let c = [
                    (y[i], [1.0, 0.0, -3.0, 2.0]),
                    (h * dy[i], [0.0, 1.0, -2.0, 1.0]),
                    (y[i + 1], [0.0, 0.0, 3.0, -2.0]),
                    (h * dy[i + 1], [0.0, 0.0, -1.0, 1.0]),
                ];
                combine(&c, u, h)
            }
            Self::QuinticHermite { y, dy, ddy, .. } => {
                let c = [
                    (y[i], [1.0, 0.0, 0.0, -10.0, 15.0, -6.0]),
                    (h * dy[i], [0.0, 1.0, 0.0, -6.0, 8.0, -3.0]),
                    (h * h * ddy[i], [0.0, 0.0, 0.5, -1.5, 1.5, -0.5]),
                    (y[i + 1], [0.0, 0.0, 0.0, 10.0, -15.0, 6.0]),
                    (h * dy[i + 1], [0.0, 0.0, 0.0, -4.0, 7.0, -3.0]),
                    (h * h * ddy[i + 1], [0.0, 0.0, 0.0, 0.5, -1.0, 0.5]),
                ];
                combine(&c, u, h)
            }
        }
    }
}

fn combine<const D: usize>(terms: &[(f64, [f64; D])], u: f64, h: f64) -> Jet {
    let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
    for (w, coeffs) in terms {
        let (p, dp, ddp) = poly(coeffs, u);
        v += w * p;
        d += w * dp;
        dd += w * ddp;
    }
    Jet::new(v, d / h, dd / (h * h))
}

/// Polynomial with ascending coefficients and its first two derivatives.
fn poly(c: &[f64], u: f64) -> (f64, f64, f64) {
    let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
    for &cj in c.iter().rev() {
        ddp = ddp * u + 2.0 * dp;
        dp = dp * u + p;
        p = p * u + cj;
    }
    (p, dp, ddp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_polynomials() {
        let x: Vec<f64> = (0..6).map(|i| i as f64 * 0.3).collect();
        let f = |t: f64| (t * t * t - 2.0 * t * t + 0.5 * t + 1.0, 3.0 * t * t - 4.0 * t + 0.5, 6.0 * t - 4.0);
        let (y, dy, ddy): (Vec<f64>, Vec<f64>, Vec<f64>) = {
            let v: Vec<_> = x.iter().map(|&t| f(t)).collect();
            (v.iter().map(|t| t.0).collect(), v.iter().map(|t| t.1).collect(), v.iter().map(|t| t.2).collect())
        };
        let c = Interpolant::cubic_hermite(x.clone(), y.clone(), dy.clone());
        let q = Interpolant::quintic_hermite(x, y, dy, ddy);
        for t in [0.05, 0.41, 1.17, 1.5] {
            let (v, d, dd) = f(t);
            for j in [c.eval(t), q.eval(t)] {
                assert!((j.v - v).abs() < 1e-13);
                assert!((j.d - d).abs() < 1e-12);
                assert!((j.dd - dd).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn natural_spline_is_exact_for_lines_and_interpolates() {
        let x: Vec<f64> = (0..10).map(|i| (i as f64).sqrt()).collect();
        let y: Vec<f64> = x.iter().map(|t| 2.0 * t - 1.0).collect();
        let s = Interpolant::natural_cubic(x.clone(), y.clone());
        for t in [0.1, 1.3, 2.9] {
            let j = s.eval(t);
            assert!((j.v - (2.0 * t - 1.0)).abs() < 1e-13);
            assert!((j.d - 2.0).abs() < 1e-12);
        }
        let y2: Vec<f64> = x.iter().map(|t| libm::sin(*t)).collect();
        let s2 = Interpolant::natural_cubic(x.clone(), y2.clone());
        for (xi, yi) in x.iter().zip(&y2) {
            assert!((s2.eval(*xi).v - yi).abs() < 1e-14);
        }
        assert_eq!(s2.eval(x[0]).dd, 0.0);
    }
}
