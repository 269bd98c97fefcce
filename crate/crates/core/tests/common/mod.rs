//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use hopf_core::s3geom::scalar_fn;
use hopf_core::{Charge, Jet, MetricFamily, Profile, Real};

pub fn charge(k: i64, l: i64) -> Charge {
    Charge::new(k, l).unwrap()
}

/// `α = 2s + Σ c_j sin(2js)`; admissible and monotone for `Σ j|c_j| < 1`.
pub fn perturbed_profile(coeffs: &[f64]) -> Profile {
    let c = coeffs.to_vec();
    Profile::custom(move |s| {
        let mut j = Jet::new(2.0 * s, 2.0, 0.0);
        for (i, &cj) in c.iter().enumerate() {
            let m = 2.0 * (i + 1) as f64;
            let (sn, cs) = ((m * s).sin(), (m * s).cos());
            j = j + Jet::new(cj * sn, cj * m * cs, -cj * m * m * sn);
        }
        j
    })
}

/// A conformal change of `can(R)` followed by a frame split along `split`.
pub fn random_metric(radius: f64, split: Charge, p: [f64; 4]) -> MetricFamily {
    let gamma = scalar_fn(move |s| {
        let x = Jet::var(s);
        (x * 2.0).sin() * p[0] + x.cos() * p[1]
    });
    let base = MetricFamily::conformal(radius, gamma);
    MetricFamily::frame_diagonal(
        &base,
        split,
        scalar_fn(move |s| (Jet::var(s).sin() * p[2]).exp()),
        scalar_fn(move |s| ((Jet::var(s) * 2.0).cos() * p[3]).exp()),
    )
}
