//! Łojasiewicz exponents of `p` at an isolated torus zero, and the upper
//! bound `|φ(z) − v| ≤ Cε / |z − τ|^q` near a singularity.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::dist2;
use crate::error::{Error, Result};
use crate::measure::{fit_power_law, PowerLawFit, MIN_R_SQUARED};
use crate::poly::{torus, Poly2};
use crate::rif::{find_torus_zeros, RationalInnerFunction, TorusPoint};
use crate::C2;

#[derive(Clone, Debug, Serialize)]
pub struct LojaFit {
    pub q: f64,
    pub c: f64,
    pub fit: PowerLawFit,
    pub shell_range: (f64, f64),
    pub tau: TorusPoint,
}

const MIN_SHELLS: usize = 6;
const SHELL_WIDTH: f64 = 1.05;

pub(crate) fn shell_rng(seed: u64, shell: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shell as u64);
    rng
}

/// Uniform direction in ℂ² ≅ ℝ⁴.
fn sphere_direction(rng: &mut ChaCha8Rng) -> C2 {
    let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    [Complex64::new(g[0] / n, g[1] / n), Complex64::new(g[2] / n, g[3] / n)]
}

/// Torus point at Euclidean distance `d` from `τ`, chords split by `ψ`.
fn torus_at(tau: &TorusPoint, d: f64, psi: f64) -> C2 {
    let [t1, t2] = tau.angles();
    let c1 = (d * psi.cos()).clamp(-2.0, 2.0);
    let c2 = (d * psi.sin()).clamp(-2.0, 2.0);
    torus(t1 + 2.0 * (c1 / 2.0).asin(), t2 + 2.0 * (c2 / 2.0).asin())
}

/// Points of the closed bidisc with `s ≤ |z − τ| ≤ 1.05 s`, paired with `f(z)`.
/// Half are drawn from the 4-ball shell, half on the torus; the smallest
/// torus value is then polished in the chord angle.
pub(crate) fn shell_samples<F>(f: &F, tau: &TorusPoint, s: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<(C2, f64)>
where
    F: Fn(&C2) -> f64,
{
    let t = tau.point();
    let mut out = Vec::with_capacity(n + 1);
    let n_ball = n / 2;
    let mut attempts = 0;
    while out.len() < n_ball && attempts < 200 * n {
        attempts += 1;
        let u = sphere_direction(rng);
        let r = s * rng.random_range(1.0..SHELL_WIDTH);
        let z = [t[0] + r * u[0], t[1] + r * u[1]];
        if z[0].norm() <= 1.0 && z[1].norm() <= 1.0 {
            out.push((z, f(&z)));
        }
    }
    let mut best: Option<(f64, f64, f64)> = None;
    while out.len() < n {
        let d = s * rng.random_range(1.0..SHELL_WIDTH);
        let psi = rng.random_range(0.0..2.0 * PI);
        let z = torus_at(tau, d, psi);
        let v = f(&z);
        if best.is_none_or(|b| v < b.0) {
            best = Some((v, d, psi));
        }
        out.push((z, v));
    }
    if let Some((_, d, psi)) = best {
        let h = 4.0 * PI / (n - n_ball).max(1) as f64;
        let g = |x: f64| f(&torus_at(tau, d, x));
        let psi = golden_min(g, psi - h, psi + h);
        let z = torus_at(tau, d, psi);
        out.push((z, f(&z)));
    }
    out
}

fn golden_min<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = g(x2);
        }
    }
    0.5 * (a + b)
}

fn check_shells(shells: &[f64]) -> Result<()> {
    if shells.len() < MIN_SHELLS {
        return Err(Error::InvalidInput(format!("need at least {MIN_SHELLS} shells, got {}", shells.len())));
    }
    if shells.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("shells must be strictly descending".into()));
    }
    if let Some(&s) = shells.iter().find(|&&s| !(s > 0.0 && s <= 0.5)) {
        return Err(Error::OutOfRange { name: "shell", value: s, range: "(0, 0.5]" });
    }
    Ok(())
}

/// Fits `min_{shell} f ≈ c·sᵠ` for an arbitrary nonnegative `f`.
pub fn fit_exponent_for_fn<F>(f: F, tau: &TorusPoint, shells: &[f64], samples_per_shell: usize, seed: u64) -> Result<LojaFit>
where
    F: Fn(&C2) -> f64,
{
    check_shells(shells)?;
    if samples_per_shell < 4 {
        return Err(Error::InvalidInput("need at least 4 samples per shell".into()));
    }
    let t = tau.point();
    let mut points = Vec::with_capacity(shells.len());
    let mut samples = Vec::new();
    for (k, &s) in shells.iter().enumerate() {
        let mut rng = shell_rng(seed, k);
        let shell = shell_samples(&f, tau, s, samples_per_shell, &mut rng);
        let min = shell.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        points.push((s, min));
        samples.extend(shell);
    }
    let fit = fit_power_law(&points)?;
    if fit.r_squared < MIN_R_SQUARED {
        return Err(Error::BadFit(fit.r_squared));
    }
    let q = fit.exponent;
    // Largest c for which the lower bound holds on every sample.
    let c_samples = samples.iter().map(|(z, v)| v / dist2(z, &t).powf(q)).fold(f64::INFINITY, f64::min);
    let c = fit.log_constant.exp().min(c_samples);
    Ok(LojaFit { q, c, fit, shell_range: (shells[shells.len() - 1], shells[0]), tau: *tau })
}

/// Łojasiewicz exponent of `p` at the isolated torus zero `τ`, with distance
/// to the zero set taken as `|z − τ|`.
pub fn fit_lojasiewicz_exponent(
    p: &Poly2,
    tau: &TorusPoint,
    shells: &[f64],
    samples_per_shell: usize,
    seed: u64,
) -> Result<LojaFit> {
    check_shells(shells)?;
    let t = tau.point();
    let zeros = find_torus_zeros(p, 128, 1e-10);
    let own = zeros.iter().map(|z| dist2(&z.point(), &t)).fold(f64::INFINITY, f64::min);
    if own > 1e-4 {
        return Err(Error::InvalidInput(format!("tau is not a torus zero of p (nearest zero at {own:.3e})")));
    }
    let nearest_other = zeros
        .iter()
        .map(|z| dist2(&z.point(), &t))
        .filter(|&d| d > 1e-4)
        .fold(f64::INFINITY, f64::min);
    if nearest_other < 0.2 {
        return Err(Error::NotIsolatedZero(nearest_other));
    }
    fit_exponent_for_fn(|z| p.eval(z).norm(), tau, shells, samples_per_shell, seed)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LemmaCheck {
    pub holds: bool,
    pub worst_ratio: f64,
    pub argmax: C2,
    pub n_samples: usize,
}

/// Maximum of `|φ(z) − v|·|z − τ|^q / ε` over seeded points of the closed
/// bidisc within `neighborhood_radius` of `τ`.
#[allow(clippy::too_many_arguments)]
pub fn check_upper_bound_lemma(
    phi: &RationalInnerFunction,
    tau: &TorusPoint,
    v: Complex64,
    epsilon: f64,
    q: f64,
    neighborhood_radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<LemmaCheck> {
    if (v.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("target value must be unimodular, |v| = {}", v.norm())));
    }
    if !(epsilon > 0.0) {
        return Err(Error::OutOfRange { name: "epsilon", value: epsilon, range: "(0, inf)" });
    }
    if !(neighborhood_radius > 0.0) {
        return Err(Error::OutOfRange { name: "neighborhood_radius", value: neighborhood_radius, range: "(0, inf)" });
    }
    let t = tau.point();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut argmax, mut taken) = (0.0f64, t, 0);
    let mut attempts = 0usize;
    while taken < n_samples && attempts < 1000 * n_samples.max(1) {
        attempts += 1;
        let u = sphere_direction(&mut rng);
        let r = neighborhood_radius * rng.random::<f64>().powf(0.25);
        let z = [t[0] + r * u[0], t[1] + r * u[1]];
        if z[0].norm() > 1.0 || z[1].norm() > 1.0 {
            continue;
        }
        let Ok(w) = phi.eval(&z) else { continue };
        taken += 1;
        let ratio = (w - v).norm() * dist2(&z, &t).powf(q) / epsilon;
        if ratio > worst {
            worst = ratio;
            argmax = z;
        }
    }
    Ok(LemmaCheck { holds: taken > 0 && worst.is_finite(), worst_ratio: worst, argmax, n_samples: taken })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BiannulusCheck {
    pub tested: usize,
    pub violations: usize,
    pub max_deviation: f64,
    pub worst_point: C2,
}

/// Tests `|φ(z) − v| < δ` on seeded points of `𝔻²` with
/// `(ε/2δ)^{1/q} < |zₖ − τₖ| < ε^{1/q}` for both `k`.
#[allow(clippy::too_many_arguments)]
pub fn check_biannulus_implication(
    phi: &RationalInnerFunction,
    tau: &TorusPoint,
    v: Complex64,
    epsilon: f64,
    delta: f64,
    q: f64,
    n_samples: usize,
    seed: u64,
) -> Result<BiannulusCheck> {
    // validates the parameters
    crate::measure::annulus_lower_bound(epsilon, delta, q)?;
    let r_in = (epsilon / (2.0 * delta)).powf(1.0 / q);
    let r_out = epsilon.powf(1.0 / q);
    let t = tau.point();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coord = |c: Complex64| loop {
        let r = rng.random_range(r_in * r_in..r_out * r_out).sqrt();
        let z = c + Complex64::from_polar(r, rng.random_range(0.0..2.0 * PI));
        if z.norm() < 1.0 {
            return z;
        }
    };
    let mut out = BiannulusCheck { tested: 0, violations: 0, max_deviation: 0.0, worst_point: t };
    while out.tested < n_samples {
        let z = [coord(t[0]), coord(t[1])];
        let Ok(w) = phi.eval(&z) else { continue };
        out.tested += 1;
        let dev = (w - v).norm();
        if dev >= delta {
            out.violations += 1;
        }
        if dev > out.max_deviation {
            out.max_deviation = dev;
            out.worst_point = z;
        }
    }
    Ok(out)
}
