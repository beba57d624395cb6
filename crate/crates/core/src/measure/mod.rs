//! Weighted volumes `V_β` on the bidisc.
//!
//! The area measure on each disc is normalized, `dA = dx dy / π`, so
//! `V_β(𝔻²) = 1/(β+1)²`.

mod fit;
pub(crate) mod sampler;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use fit::{fit_power_law, PowerLawFit};

use crate::error::{Error, Result};
use crate::gauss;
use crate::rif::{SymbolMap, TorusPoint};
use crate::C2;

/// `S(ζ, δ) = {z ∈ 𝔻² : |zₖ − ζₖ| < δₖ}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CarlesonBox {
    center: TorusPoint,
    radii: [f64; 2],
}

impl CarlesonBox {
    pub fn new(center: TorusPoint, radii: [f64; 2]) -> Result<Self> {
        for &d in &radii {
            if !(d > 0.0 && d < 2.0) {
                return Err(Error::OutOfRange { name: "box radius", value: d, range: "(0, 2)" });
            }
        }
        Ok(Self { center, radii })
    }

    pub fn square(center: TorusPoint, delta: f64) -> Result<Self> {
        Self::new(center, [delta, delta])
    }

    /// Box with `δ = 2` in both coordinates, which is all of `𝔻²`.
    pub fn everything() -> Self {
        Self { center: TorusPoint::one(), radii: [2.0, 2.0] }
    }

    pub fn center(&self) -> TorusPoint {
        self.center
    }

    pub fn radii(&self) -> [f64; 2] {
        self.radii
    }

    pub fn contains(&self, w: &C2) -> bool {
        let c = self.center.point();
        (w[0] - c[0]).norm() < self.radii[0] && (w[1] - c[1]).norm() < self.radii[1]
    }

    /// Normalized measure of the box.
    pub fn area(&self) -> f64 {
        lens_area(self.radii[0]) * lens_area(self.radii[1])
    }
}

/// Normalized area of `𝔻 ∩ {|z − ζ| < ρ}` for `|ζ| = 1`.
pub fn lens_area(rho: f64) -> f64 {
    if rho >= 2.0 {
        return 1.0;
    }
    if rho <= 0.0 {
        return 0.0;
    }
    let a = rho * rho * (rho / 2.0).acos() + (1.0 - rho * rho / 2.0).acos() - 0.5 * rho * (4.0 - rho * rho).sqrt();
    a / PI
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub center: TorusPoint,
    pub fraction: f64,
    pub radius: f64,
}

/// Sample budget and seed. The optional stratum draws `fraction` of the
/// samples from the product of lenses `|zₖ − ζₖ| < radius`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub seed: u64,
    pub n_samples: usize,
    pub stratum: Option<Stratum>,
}

impl SamplerSpec {
    pub fn new(seed: u64, n_samples: usize) -> Self {
        Self { seed, n_samples, stratum: None }
    }

    pub fn with_stratum(mut self, center: TorusPoint, fraction: f64, radius: f64) -> Self {
        self.stratum = Some(Stratum { center, fraction, radius });
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub beta: f64,
    pub seed: u64,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > -1.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { name: "beta", value: beta, range: "(-1, inf)" })
    }
}

#[inline]
fn weight(beta: f64, z: &C2) -> f64 {
    let w = (1.0 - z[0].norm_sqr()) * (1.0 - z[1].norm_sqr());
    if beta == 0.0 {
        1.0
    } else {
        w.powf(beta)
    }
}

fn estimate<P>(beta: f64, sampler: &SamplerSpec, known_nonempty: bool, inside: P) -> Result<VolumeEstimate>
where
    P: Fn(&C2) -> bool + Sync,
{
    check_beta(beta)?;
    let integral = sampler::integrate(sampler, |z| if inside(z) { weight(beta, z) } else { 0.0 })?;
    if known_nonempty && integral.hits == 0 {
        return Err(Error::EmptyRegion);
    }
    Ok(VolumeEstimate {
        value: integral.value,
        std_error: integral.std_error,
        n_samples: sampler.n_samples,
        beta,
        seed: sampler.seed,
    })
}

/// Monte-Carlo estimate of `V_β(S)`.
pub fn vbeta_box(beta: f64, bx: &CarlesonBox, sampler: &SamplerSpec) -> Result<VolumeEstimate> {
    estimate(beta, sampler, true, |z| bx.contains(z))
}

/// `V_β({z : f(z) < threshold})`.
pub fn vbeta_sublevel<F>(beta: f64, f: F, threshold: f64, sampler: &SamplerSpec) -> Result<VolumeEstimate>
where
    F: Fn(&C2) -> f64 + Sync,
{
    estimate(beta, sampler, false, |z| f(z) < threshold)
}

/// `V_β(Φ⁻¹(S))`. Points where a component cannot be evaluated are outside.
pub fn pullback_volume(map: &SymbolMap, bx: &CarlesonBox, beta: f64, sampler: &SamplerSpec) -> Result<VolumeEstimate> {
    estimate(beta, sampler, false, |z| map.eval(z).is_ok_and(|w| bx.contains(&w)))
}

/// `π² (ε^{2/q} − (ε/2δ)^{2/q})²`, defined for `1/2 < δ < 1`.
pub fn annulus_lower_bound(epsilon: f64, delta: f64, q: f64) -> Result<f64> {
    if !(delta > 0.5 && delta < 1.0) {
        return Err(Error::OutOfRange { name: "delta", value: delta, range: "(1/2, 1)" });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::OutOfRange { name: "epsilon", value: epsilon, range: "(0, 1)" });
    }
    if !(q >= 1.0) {
        return Err(Error::OutOfRange { name: "q", value: q, range: "[1, inf)" });
    }
    let e = 2.0 / q;
    let d = epsilon.powf(e) - (epsilon / (2.0 * delta)).powf(e);
    Ok(PI * PI * d * d)
}

fn band_threshold(beta: f64, s: f64, m: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::OutOfRange { name: "s", value: s, range: "(0, 1]" });
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::OutOfRange { name: "M", value: m, range: "(0, inf)" });
    }
    Ok(2.0 * m * m * s)
}

/// Monte-Carlo `V_β` of the band `(1−|z₁|²)(1−|z₂|²) ≤ 2M²s`.
pub fn band_volume(beta: f64, s: f64, m: f64, sampler: &SamplerSpec) -> Result<VolumeEstimate> {
    let t = band_threshold(beta, s, m)?;
    estimate(beta, sampler, true, |z| (1.0 - z[0].norm_sqr()) * (1.0 - z[1].norm_sqr()) <= t)
}

/// The band volume by nested Gauss–Legendre quadrature.
///
/// With `uₖ = 1 − |zₖ|²` the volume is `∫∫_{u₁u₂ ≤ t} u₁^β u₂^β du₁ du₂`;
/// substituting `aₖ = uₖ^{β+1}` removes the endpoint singularity and turns it
/// into `(β+1)⁻²` times the area of `{a₁a₂ ≤ t^{β+1}}` in the unit square.
pub fn band_volume_quadrature(beta: f64, s: f64, m: f64) -> Result<f64> {
    let t = band_threshold(beta, s, m)?;
    let norm = 1.0 / ((beta + 1.0) * (beta + 1.0));
    if t >= 1.0 {
        return Ok(norm);
    }
    let big_t = t.powf(beta + 1.0);
    let inner = |a: f64| -> f64 {
        let top = (big_t / a).min(1.0);
        gauss::on_interval(8, 0.0, top).iter().map(|(_, w)| w).sum()
    };
    // a ∈ [0, T]: inner length 1; a ∈ [T, 1] with a = e^y.
    let lower: f64 = gauss::on_interval(32, 0.0, big_t).iter().map(|&(a, w)| w * inner(a)).sum();
    let upper: f64 = gauss::on_interval(64, big_t.ln(), 0.0).iter().map(|&(y, w)| w * y.exp() * inner(y.exp())).sum();
    Ok(norm * (lower + upper))
}

/// Closed form of [`band_volume_quadrature`]:
/// `t^{β+1}(1/(β+1)² − ln t/(β+1))` for `t = 2M²s < 1`.
pub fn band_volume_exact(beta: f64, s: f64, m: f64) -> Result<f64> {
    let t = band_threshold(beta, s, m)?;
    let b1 = beta + 1.0;
    if t >= 1.0 {
        return Ok(1.0 / (b1 * b1));
    }
    Ok(t.powf(b1) * (1.0 / (b1 * b1) - t.ln() / b1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanVerdict {
    Fails,
    Passes,
    Inconclusive,
}

impl std::fmt::Display for ScanVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScanVerdict::Fails => "Carleson test FAILS",
            ScanVerdict::Passes => "Carleson test passes on scanned boxes",
            ScanVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanRow {
    pub delta: f64,
    pub volume: f64,
    pub std_error: f64,
    pub reference: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CarlesonScan {
    pub center: TorusPoint,
    pub beta_src: f64,
    pub beta_tgt: f64,
    pub rows: Vec<ScanRow>,
    pub fit: Option<PowerLawFit>,
    pub target_exponent: f64,
    pub verdict: ScanVerdict,
}

pub const MIN_R_SQUARED: f64 = 0.98;

/// Smallest exponent margin a scan verdict may rely on. Exact box volumes
/// are not pure power laws at moderate δ (lens areas carry a δ³ term), so a
/// noiseless fit can sit slightly off the limiting exponent.
pub const EXPONENT_TOLERANCE: f64 = 0.2;

/// Pullback volumes of `S(ζ, (δ, δ))` against the reference `δ^{2β_src+4}`.
///
/// When the sampler carries a stratum, its radius is replaced by `δ` in each
/// row so the stratum tracks the box.
pub fn carleson_scan(
    map: &SymbolMap,
    beta_src: f64,
    beta_tgt: f64,
    center: TorusPoint,
    deltas: &[f64],
    sampler: &SamplerSpec,
) -> Result<CarlesonScan> {
    check_beta(beta_src)?;
    check_beta(beta_tgt)?;
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("deltas must be strictly descending".into()));
    }
    let target = 2.0 * beta_src + 4.0;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let bx = CarlesonBox::square(center, delta)?;
        let mut spec = sampler.clone();
        if let Some(st) = spec.stratum.as_mut() {
            st.radius = delta;
        }
        let v = pullback_volume(map, &bx, beta_tgt, &spec)?;
        let reference = delta.powf(target);
        rows.push(ScanRow { delta, volume: v.value, std_error: v.std_error, reference, ratio: v.value / reference });
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.delta, r.volume)).collect();
    let fit = fit_power_law(&points).ok();
    let margin = |f: &PowerLawFit| (3.0 * f.exponent_std_error).max(EXPONENT_TOLERANCE);
    let verdict = match &fit {
        None => ScanVerdict::Inconclusive,
        Some(f) if f.r_squared < MIN_R_SQUARED => ScanVerdict::Inconclusive,
        Some(f) if f.exponent + margin(f) < target => ScanVerdict::Fails,
        Some(f) => {
            let (last, earlier) = rows.split_last().expect("fit implies rows");
            let max_earlier = earlier.iter().map(|r| r.ratio).fold(0.0, f64::max);
            if f.exponent >= target - margin(f) && last.ratio <= 4.0 * max_earlier {
                ScanVerdict::Passes
            } else {
                ScanVerdict::Inconclusive
            }
        }
    };
    Ok(CarlesonScan { center, beta_src, beta_tgt, rows, fit, target_exponent: target, verdict })
}

/// Dyadic grid `2^{-from}, …, 2^{-to}`.
pub fn dyadic(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}
