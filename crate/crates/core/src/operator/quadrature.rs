use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gauss;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum QuadratureSpec {
    /// Gauss–Legendre in `|z|²` times a uniform trapezoid in the angle, per disc.
    TensorGaussPolar { n_radial: usize, n_angular: usize },
    MonteCarlo { n_samples: usize, seed: u64 },
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::TensorGaussPolar { n_radial: 32, n_angular: 64 }
    }
}

/// Nodes and weights for `∫_𝔻 f (1−|z|²)^β dA` with normalized `dA`.
pub(crate) fn disc_rule(n_radial: usize, n_angular: usize, beta: f64) -> Vec<(Complex64, f64)> {
    let radial = gauss::on_interval(n_radial, 0.0, 1.0);
    let mut out = Vec::with_capacity(n_radial * n_angular);
    for (x, w) in radial {
        let wx = w * (1.0 - x).powf(beta) / n_angular as f64;
        for j in 0..n_angular {
            let theta = 2.0 * PI * j as f64 / n_angular as f64;
            out.push((Complex64::from_polar(x.sqrt(), theta), wx));
        }
    }
    out
}
