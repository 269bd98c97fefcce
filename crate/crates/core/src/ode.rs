//! Adaptive Dormand–Prince 5(4) integration for small first-order systems.

use alloc::format;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; `0` picks `1e-3 × |t1 − t0|`.
    pub first_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            first_step: 0.0,
            min_step: 1e-16,
            max_steps: 1_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Stepper state that can be advanced repeatedly, keeping its step size between targets.
#[derive(Debug, Clone)]
pub struct Integrator<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    h: f64,
    opts: OdeOptions,
    pub steps: usize,
}

/// Outcome of [`Integrator::advance_to`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Advance {
    Reached,
    /// The stop predicate fired after an accepted step; the state is at that step.
    Stopped,
}

impl<const N: usize> Integrator<N> {
    pub fn new(t0: f64, y0: [f64; N], opts: OdeOptions) -> Self {
        Self {
            t: t0,
            y: y0,
            h: opts.first_step,
            opts,
            steps: 0,
        }
    }

    /// Advances to `t1` (in either direction). `stop` is checked after each accepted step.
    pub fn advance_to<F, S>(&mut self, t1: f64, f: &mut F, stop: &mut S) -> Result<Advance>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        S: FnMut(f64, &[f64; N]) -> bool,
    {
        let dir = if t1 >= self.t { 1.0 } else { -1.0 };
        if self.h == 0.0 {
            self.h = 1e-3 * (t1 - self.t).abs();
        }
        let mut h = self.h.abs().max(self.opts.min_step);
        while (t1 - self.t) * dir > 0.0 {
            if self.steps >= self.opts.max_steps {
                return Err(Error::Convergence(format!(
                    "ODE step budget {} exhausted at t = {}",
                    self.opts.max_steps, self.t
                )));
            }
            let remaining = (t1 - self.t).abs();
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let (ynew, err) = self.trial(step * dir, f);
            if err.is_finite() && err <= 1.0 {
                self.t = if last { t1 } else { self.t + step * dir };
                self.y = ynew;
                self.steps += 1;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0) };
                if !last {
                    h = step * grow;
                }
                self.h = h;
                if stop(self.t, &self.y) {
                    return Ok(Advance::Stopped);
                }
            } else {
                let shrink = if err.is_finite() { (0.9 * libm::pow(err, -0.25)).clamp(0.1, 0.9) } else { 0.25 };
                h = step * shrink;
                if h < self.opts.min_step {
                    return Err(Error::Convergence(format!(
                        "ODE step size underflow at t = {} (h = {h:e})",
                        self.t
                    )));
                }
            }
        }
        Ok(Advance::Reached)
    }

    fn trial<F>(&self, h: f64, f: &mut F) -> ([f64; N], f64)
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let mut k = [[0.0; N]; 7];
        for stage in 0..7 {
            let mut y = self.y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    for i in 0..N {
                        y[i] += h * a * kj[i];
                    }
                }
            }
            k[stage] = f(self.t + C[stage] * h, &y);
        }
        let mut y5 = self.y;
        let mut acc = 0.0;
        for i in 0..N {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let scale = self.opts.atol + self.opts.rtol * self.y[i].abs().max(y5[i].abs());
            let e = h * (d5 - d4) / scale;
            acc += e * e;
        }
        (y5, libm::sqrt(acc / N as f64))
    }
}
