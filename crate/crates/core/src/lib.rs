//! Equivariant field configurations `S³ → S²` for the strongly coupled
//! Faddeev–Hopf model.
//!
//! Maps are built by the α-Hopf construction
//!
//! ```text
//! (R cos s e^{i x1}, R sin s e^{i x2}) ↦ (cos α(s), sin α(s) e^{i(k x1 + ℓ x2)})
//! ```
//!
//! so every geometric quantity reduces to a function of the latitude `s ∈ [0, π/2]`
//! and the profile `α` with `α(0) = 0`, `α(π/2) = π`. The crate covers
//!
//! - [`s3geom`]: torus-coordinate geometry of `S³` under an `s`-dependent metric family
//!   (Christoffel symbols, adapted frames, fibre mean curvature, volume density),
//! - [`ansatz`]: charges, closed-form and discrete profiles, pullback spectra, Hopf charge,
//! - [`criticality`]: residuals of the reduced and frame-level Euler–Lagrange equations and
//!   boundary-value solvers,
//! - [`energy`]: reduced and generalized energies and the topological bound,
//! - [`variation`]: discrete first and second variations, Hessian spectra, gradient flow,
//! - [`metricchange`]: conformal and biconformal deformations of the domain metric.
//!
//! The crate is `no_std` and only needs `alloc`. Numerical building blocks live in
//! [`quad`], [`ode`], [`interp`], [`linalg`] and [`real`].
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN
// The test harness links `std`, whose inherent float methods shadow `Real`.
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

pub mod ansatz;
pub mod criticality;
pub mod energy;
mod error;
pub mod interp;
pub mod linalg;
pub mod metricchange;
pub mod ode;
pub mod quad;
pub mod real;
pub mod s3geom;
pub mod variation;

pub use ansatz::{Charge, DiscreteProfile, Profile, PullbackSpectrum, TargetPoint};
pub use error::{Error, Result};
pub use real::{Dual, Jet, Real};
pub use s3geom::{MetricFamily, TorusPoint};

/// `π/2`, the right end of the latitude interval.
pub const HALF_PI: f64 = core::f64::consts::FRAC_PI_2;
