//! Scalar types used for forward-mode differentiation in the latitude `s`.
//!
//! [`Dual`] carries a first derivative, [`Jet`] carries first and second derivatives.
//! Both implement [`Real`], as does `f64`, so geometric formulas can be written once and
//! evaluated either for values or for their `s`-derivatives.

use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Elementary functions shared by `f64`, [`Dual`] and [`Jet`].
pub trait Real:
    Copy
    + core::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(x: f64) -> Self;
    /// The value part.
    fn re(self) -> f64;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn ln_1p(self) -> Self;
    fn asin(self) -> Self;
    fn atan(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn powi(self, n: i32) -> Self;
    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
    fn sq(self) -> Self {
        self * self
    }
}

impl Real for f64 {
    fn cst(x: f64) -> Self {
        x
    }
    fn re(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }
    fn sin(self) -> Self {
        libm::sin(self)
    }
    fn cos(self) -> Self {
        libm::cos(self)
    }
    fn tan(self) -> Self {
        libm::tan(self)
    }
    fn exp(self) -> Self {
        libm::exp(self)
    }
    fn ln(self) -> Self {
        libm::log(self)
    }
    fn ln_1p(self) -> Self {
        libm::log1p(self)
    }
    fn asin(self) -> Self {
        libm::asin(self)
    }
    fn atan(self) -> Self {
        libm::atan(self)
    }
    fn powf(self, p: f64) -> Self {
        libm::pow(self, p)
    }
    fn powi(self, n: i32) -> Self {
        libm::pow(self, n as f64)
    }
}

/// A value with its first derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub const fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }

    fn chain(self, f: f64, df: f64) -> Self {
        Self::new(f, df * self.d)
    }
}

/// A value with its first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Jet {
    pub const fn new(v: f64, d: f64, dd: f64) -> Self {
        Self { v, d, dd }
    }

    /// The independent variable at `s`.
    pub const fn var(s: f64) -> Self {
        Self::new(s, 1.0, 0.0)
    }

    /// Drops the second derivative.
    pub const fn dual(self) -> Dual {
        Dual::new(self.v, self.d)
    }

    /// The jet of the derivative, given the third derivative `ddd`.
    pub const fn derivative(self, ddd: f64) -> Self {
        Self::new(self.d, self.dd, ddd)
    }

    fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        Self::new(f, df * self.d, d2f * self.d * self.d + df * self.dd)
    }
}

macro_rules! scalar_ops {
    ($t:ty) => {
        impl Add<f64> for $t {
            type Output = $t;
            fn add(mut self, rhs: f64) -> $t {
                self.v += rhs;
                self
            }
        }
        impl Sub<f64> for $t {
            type Output = $t;
            fn sub(mut self, rhs: f64) -> $t {
                self.v -= rhs;
                self
            }
        }
        impl Add<$t> for f64 {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                rhs + self
            }
        }
        impl Sub<$t> for f64 {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                -rhs + self
            }
        }
        impl Mul<$t> for f64 {
            type Output = $t;
            fn mul(self, rhs: $t) -> $t {
                rhs * self
            }
        }
        impl Div<$t> for f64 {
            type Output = $t;
            fn div(self, rhs: $t) -> $t {
                rhs.recip() * self
            }
        }
        impl AddAssign for $t {
            fn add_assign(&mut self, rhs: $t) {
                *self = *self + rhs;
            }
        }
        impl SubAssign for $t {
            fn sub_assign(&mut self, rhs: $t) {
                *self = *self - rhs;
            }
        }
        impl MulAssign for $t {
            fn mul_assign(&mut self, rhs: $t) {
                *self = *self * rhs;
            }
        }
        impl From<f64> for $t {
            fn from(x: f64) -> $t {
                <$t as Real>::cst(x)
            }
        }
    };
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, r: Dual) -> Dual {
        Dual::new(self.v + r.v, self.d + r.d)
    }
}
impl Sub for Dual {
    type Output = Dual;
    fn sub(self, r: Dual) -> Dual {
        Dual::new(self.v - r.v, self.d - r.d)
    }
}
impl Mul for Dual {
    type Output = Dual;
    fn mul(self, r: Dual) -> Dual {
        Dual::new(self.v * r.v, self.d * r.v + self.v * r.d)
    }
}
impl Div for Dual {
    type Output = Dual;
    fn div(self, r: Dual) -> Dual {
        let q = self.v / r.v;
        Dual::new(q, (self.d - q * r.d) / r.v)
    }
}
impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}
impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, r: f64) -> Dual {
        Dual::new(self.v * r, self.d * r)
    }
}
impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, r: f64) -> Dual {
        Dual::new(self.v / r, self.d / r)
    }
}
scalar_ops!(Dual);

impl Real for Dual {
    fn cst(x: f64) -> Self {
        Dual::new(x, 0.0)
    }
    fn re(self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let r = libm::sqrt(self.v);
        self.chain(r, 0.5 / r)
    }
    fn sin(self) -> Self {
        self.chain(libm::sin(self.v), libm::cos(self.v))
    }
    fn cos(self) -> Self {
        self.chain(libm::cos(self.v), -libm::sin(self.v))
    }
    fn tan(self) -> Self {
        let t = libm::tan(self.v);
        self.chain(t, 1.0 + t * t)
    }
    fn exp(self) -> Self {
        let e = libm::exp(self.v);
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(libm::log(self.v), 1.0 / self.v)
    }
    fn ln_1p(self) -> Self {
        self.chain(libm::log1p(self.v), 1.0 / (1.0 + self.v))
    }
    fn asin(self) -> Self {
        self.chain(libm::asin(self.v), 1.0 / libm::sqrt(1.0 - self.v * self.v))
    }
    fn atan(self) -> Self {
        self.chain(libm::atan(self.v), 1.0 / (1.0 + self.v * self.v))
    }
    fn powf(self, p: f64) -> Self {
        let y = libm::pow(self.v, p);
        self.chain(y, p * libm::pow(self.v, p - 1.0))
    }
    fn powi(self, n: i32) -> Self {
        self.powf(n as f64)
    }
    fn recip(self) -> Self {
        self.chain(1.0 / self.v, -1.0 / (self.v * self.v))
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, r: Jet) -> Jet {
        Jet::new(self.v + r.v, self.d + r.d, self.dd + r.dd)
    }
}
impl Sub for Jet {
    type Output = Jet;
    fn sub(self, r: Jet) -> Jet {
        Jet::new(self.v - r.v, self.d - r.d, self.dd - r.dd)
    }
}
impl Mul for Jet {
    type Output = Jet;
    fn mul(self, r: Jet) -> Jet {
        Jet::new(
            self.v * r.v,
            self.d * r.v + self.v * r.d,
            self.dd * r.v + 2.0 * self.d * r.d + self.v * r.dd,
        )
    }
}
impl Div for Jet {
    type Output = Jet;
    fn div(self, r: Jet) -> Jet {
        self * r.recip()
    }
}
impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d, -self.dd)
    }
}
impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, r: f64) -> Jet {
        Jet::new(self.v * r, self.d * r, self.dd * r)
    }
}
impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, r: f64) -> Jet {
        Jet::new(self.v / r, self.d / r, self.dd / r)
    }
}
scalar_ops!(Jet);

impl Real for Jet {
    fn cst(x: f64) -> Self {
        Jet::new(x, 0.0, 0.0)
    }
    fn re(self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let r = libm::sqrt(self.v);
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }
    fn sin(self) -> Self {
        let (s, c) = (libm::sin(self.v), libm::cos(self.v));
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = (libm::sin(self.v), libm::cos(self.v));
        self.chain(c, -s, -c)
    }
    fn tan(self) -> Self {
        let t = libm::tan(self.v);
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }
    fn exp(self) -> Self {
        let e = libm::exp(self.v);
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(libm::log(self.v), inv, -inv * inv)
    }
    fn ln_1p(self) -> Self {
        let inv = 1.0 / (1.0 + self.v);
        self.chain(libm::log1p(self.v), inv, -inv * inv)
    }
    fn asin(self) -> Self {
        let q = 1.0 - self.v * self.v;
        let r = libm::sqrt(q);
        self.chain(libm::asin(self.v), 1.0 / r, self.v / (q * r))
    }
    fn atan(self) -> Self {
        let q = 1.0 / (1.0 + self.v * self.v);
        self.chain(libm::atan(self.v), q, -2.0 * self.v * q * q)
    }
    fn powf(self, p: f64) -> Self {
        let y = libm::pow(self.v, p);
        self.chain(
            y,
            p * libm::pow(self.v, p - 1.0),
            p * (p - 1.0) * libm::pow(self.v, p - 2.0),
        )
    }
    fn powi(self, n: i32) -> Self {
        self.powf(n as f64)
    }
    fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd<F: Fn(f64) -> f64>(f: F, x: f64) -> (f64, f64) {
        let h = 1e-3;
        let d = (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h);
        let dd = (16.0 * (f(x + h) + f(x - h)) - (f(x + 2.0 * h) + f(x - 2.0 * h)) - 30.0 * f(x)) / (12.0 * h * h);
        (d, dd)
    }

    #[test]
    fn jet_chain_rule_matches_finite_differences() {
        let x = 0.37;
        let f = |s: Jet| (s.sin().sq() * 3.0 + s.exp()).sqrt() / (1.0 + s.tan()).ln()
            + (s * 0.5).asin().atan()
            + s.powf(2.5)
            + s.ln_1p();
        let g = |s: f64| {
            (3.0 * libm::sin(s).powi(2) + libm::exp(s)).sqrt() / libm::log(1.0 + libm::tan(s))
                + libm::atan(libm::asin(0.5 * s))
                + libm::pow(s, 2.5)
                + libm::log1p(s)
        };
        let j = f(Jet::var(x));
        let (d, dd) = fd(g, x);
        assert!((j.v - g(x)).abs() < 1e-14);
        assert!((j.d - d).abs() < 1e-7, "{} vs {}", j.d, d);
        assert!((j.dd - dd).abs() < 1e-5, "{} vs {}", j.dd, dd);

        let du = {
            let s = Dual::new(x, 1.0);
            (s.sin().sq() * 3.0 + s.exp()).sqrt() / (1.0 + s.tan()).ln()
                + (s * 0.5).asin().atan()
                + s.powf(2.5)
                + s.ln_1p()
        };
        assert!((du.d - j.d).abs() < 1e-13);
    }

    #[test]
    fn scalar_left_operations() {
        let j = Jet::var(2.0);
        assert_eq!((1.0 - j).v, -1.0);
        assert_eq!((1.0 - j).d, -1.0);
        let r = 1.0 / j;
        assert!((r.dd - 2.0 / 8.0).abs() < 1e-15);
    }
}
