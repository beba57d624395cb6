//! Zero-freeness certification, the gap form `|p|² − |p̃|²`, Agler
//! sum-of-squares certificate checks and the Bickel stability ratio.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::sampler::map_chunks;
use crate::measure::SamplerSpec;
use crate::poly::{newton_zero, HermitianForm, Poly2};
use crate::rif::{find_torus_zeros, refine_torus_zero, TorusPoint};
use crate::C2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedStableClosed,
    CertifiedStableOpen,
    ZeroFound,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityResult {
    pub verdict: Verdict,
    pub witness: Option<C2>,
    pub cells_checked: usize,
    pub min_modulus_seen: f64,
}

/// Polar cell `[r₁] × [θ₁] × [r₂] × [θ₂]`.
#[derive(Clone, Copy, Debug)]
struct Cell {
    r: [[f64; 2]; 2],
    t: [[f64; 2]; 2],
}

impl Cell {
    fn center(&self) -> C2 {
        let pt = |k: usize| {
            let r = 0.5 * (self.r[k][0] + self.r[k][1]);
            let t = 0.5 * (self.t[k][0] + self.t[k][1]);
            Complex64::from_polar(r, t)
        };
        [pt(0), pt(1)]
    }

    /// Bound on `|z_k − center_k|` over the cell.
    fn radius(&self, k: usize) -> f64 {
        let [ra, rb] = self.r[k];
        let [ta, tb] = self.t[k];
        0.5 * (rb - ra) + 0.5 * rb * (tb - ta)
    }

    fn touches_torus(&self) -> bool {
        self.r[0][1] >= 1.0 && self.r[1][1] >= 1.0
    }

    /// Lower bound on `|z_k − b_k|` for `|b_k| = 1` at angle `beta`.
    fn distance_lower_bound(&self, k: usize, beta: f64) -> f64 {
        let [ta, tb] = self.t[k];
        let d = if (ta..=tb).contains(&beta) || (ta..=tb).contains(&(beta + 2.0 * PI)) {
            0.0
        } else {
            let gap = |x: f64| {
                let y = (x - beta).rem_euclid(2.0 * PI);
                y.min(2.0 * PI - y)
            };
            gap(ta).min(gap(tb))
        };
        (1.0 - self.r[k][1]).max(d.min(PI / 2.0).sin())
    }

    fn split(&self, dim: usize) -> [Cell; 2] {
        let (k, radial) = (dim / 2, dim.is_multiple_of(2));
        let (mut a, mut b) = (*self, *self);
        if radial {
            let mid = 0.5 * (self.r[k][0] + self.r[k][1]);
            a.r[k][1] = mid;
            b.r[k][0] = mid;
        } else {
            let mid = 0.5 * (self.t[k][0] + self.t[k][1]);
            a.t[k][1] = mid;
            b.t[k][0] = mid;
        }
        [a, b]
    }
}

/// Local data for the half-plane test near a torus zero `b`.
struct TorusZeroModel {
    angles: [f64; 2],
    mu: [f64; 2],
    p_b: f64,
    lambda: f64,
}

impl TorusZeroModel {
    fn new(p: &Poly2, zero: &TorusPoint, hess: (f64, f64, f64)) -> Option<Self> {
        let b = zero.point();
        let g = p.gradient(&b);
        let s = [g[0] * b[0], g[1] * b[1]];
        let sum = s[0] + s[1];
        if sum.norm() < 1e-14 {
            return None;
        }
        let u_bar = -sum.conj() / sum.norm();
        let t = [u_bar * s[0], u_bar * s[1]];
        let kappa = [(-t[0].re).max(0.0), (-t[1].re).max(0.0)];
        let mut mu = [t[0].im, t[1].im];
        let mut p_b = p.eval(&b).norm();
        // Treat b as an exact zero when the residuals are at rounding level.
        let scale = 1.0 + p.max_abs_coeff();
        if p_b <= 1e-13 * scale && mu[0].abs().max(mu[1].abs()) <= 1e-7 * (kappa[0] + kappa[1]) {
            p_b = 0.0;
            mu = [0.0, 0.0];
        }
        let (h11, h12, h22) = hess;
        let (a, c, bb) = (kappa[0] - h11, kappa[1] - h22, h12);
        let lambda = 0.5 * (0.5 * (a + c) - (0.25 * (a - c) * (a - c) + bb * bb).sqrt());
        (lambda > 0.0).then_some(Self { angles: zero.angles(), mu, p_b, lambda })
    }

    /// True when `Re(ū p) > 0` on the whole cell intersected with the open bidisc.
    fn clears(&self, cell: &Cell) -> bool {
        let d1 = cell.distance_lower_bound(0, self.angles[0]);
        let d2 = cell.distance_lower_bound(1, self.angles[1]);
        let dmin = d1.hypot(d2);
        let m = self.mu[0].hypot(self.mu[1]);
        // λ|d|² − |μ||d| − |p(b)| > 0 beyond r₀
        let r0 = (m + (m * m + 4.0 * self.lambda * self.p_b).sqrt()) / (2.0 * self.lambda);
        if r0 == 0.0 {
            return true;
        }
        dmin > r0 * (1.0 + 1e-12)
    }
}

/// Adaptive subdivision of the closed (or open) bidisc in polar cells.
///
/// A cell is cleared when `|p(center)| > L₁ρ₁ + L₂ρ₂`, with `Lₖ` the
/// coefficient bounds on `|∂ₖp|` and `ρₖ` the cell radius in coordinate `k`.
/// In open mode, cells touching a torus zero are cleared by a first-order
/// half-plane bound around that zero.
pub fn certify_stable(p: &Poly2, closed: bool, max_cells: usize) -> StabilityResult {
    let (l1, l2) = p.derivative_bound();
    let hess = p.second_derivative_bound();
    let scale = 1.0 + p.max_abs_coeff();
    let mut models: Option<Vec<TorusZeroModel>> = None;

    let in_region = |z: &C2| {
        if closed {
            z[0].norm() <= 1.0 + 1e-12 && z[1].norm() <= 1.0 + 1e-12
        } else {
            z[0].norm() < 1.0 - 1e-9 && z[1].norm() < 1.0 - 1e-9
        }
    };

    let mut queue = VecDeque::new();
    for a in 0..4 {
        for b in 0..4 {
            let q = PI / 2.0;
            queue.push_back(Cell {
                r: [[0.0, 1.0], [0.0, 1.0]],
                t: [[a as f64 * q, (a + 1) as f64 * q], [b as f64 * q, (b + 1) as f64 * q]],
            });
        }
    }

    let mut checked = 0;
    let mut min_seen = f64::INFINITY;
    let result = |verdict, witness, checked, min_seen| StabilityResult {
        verdict,
        witness,
        cells_checked: checked,
        min_modulus_seen: min_seen,
    };

    while let Some(cell) = queue.pop_front() {
        if checked >= max_cells {
            return result(Verdict::Unknown, None, checked, min_seen);
        }
        checked += 1;
        let center = cell.center();
        let v = p.eval(&center).norm();
        min_seen = min_seen.min(v);
        let (rho1, rho2) = (cell.radius(0), cell.radius(1));
        if v > (l1 * rho1 + l2 * rho2) * (1.0 + 1e-12) + 1e-15 * scale {
            continue;
        }

        if !closed {
            let ms = models.get_or_insert_with(|| {
                find_torus_zeros(p, 64, 1e-10).iter().filter_map(|z| TorusZeroModel::new(p, z, hess)).collect()
            });
            if ms.iter().any(|m| m.clears(&cell)) {
                continue;
            }
        }

        if let Some(w) = newton_zero(p, center, 60, 1e-13 * scale) {
            if in_region(&w) && p.eval(&w).norm() < 1e-8 {
                return result(Verdict::ZeroFound, Some(w), checked, min_seen.min(p.eval(&w).norm()));
            }
        }
        if closed && cell.touches_torus() {
            let t1 = 0.5 * (cell.t[0][0] + cell.t[0][1]);
            let t2 = 0.5 * (cell.t[1][0] + cell.t[1][1]);
            if let Ok((pt, modulus)) = refine_torus_zero(p, t1, t2, 1e-10) {
                if modulus < 1e-8 {
                    return result(Verdict::ZeroFound, Some(pt.point()), checked, min_seen.min(modulus));
                }
            }
        }

        let contrib = [
            l1 * 0.5 * (cell.r[0][1] - cell.r[0][0]),
            l1 * 0.5 * cell.r[0][1] * (cell.t[0][1] - cell.t[0][0]),
            l2 * 0.5 * (cell.r[1][1] - cell.r[1][0]),
            l2 * 0.5 * cell.r[1][1] * (cell.t[1][1] - cell.t[1][0]),
        ];
        let dim = (0..4).fold(0, |best, k| if contrib[k] > contrib[best] { k } else { best });
        queue.extend(cell.split(dim));
    }

    let verdict = if closed { Verdict::CertifiedStableClosed } else { Verdict::CertifiedStableOpen };
    result(verdict, None, checked, min_seen)
}

/// `|p|² − |p̃|²` as a Hermitian form.
pub fn gap_form(p: &Poly2) -> HermitianForm {
    p.mod2_form().sub(&p.reflect().mod2_form())
}

/// Agler decomposition data: `SOSⱼ = Σₖ |q_{j,k}|²` for `j = 1, 2`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SOSCertificate {
    pub sos1: Vec<Poly2>,
    pub sos2: Vec<Poly2>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SosCheck {
    pub valid: bool,
    pub max_residual: f64,
}

/// Expands `(1−|z₁|²)·SOS₁ + (1−|z₂|²)·SOS₂`, subtracts the gap form and
/// accepts when every residual coefficient is within `1e-9·(1 + max |gap|)`.
pub fn verify_sos_certificate(p: &Poly2, cert: &SOSCertificate) -> SosCheck {
    let gap = gap_form(p);
    let mut rhs = HermitianForm::zeros(0, 0);
    for (v, list) in [(0, &cert.sos1), (1, &cert.sos2)] {
        for q in list {
            rhs = rhs.add(&q.mod2_form().times_one_minus_abs2(v));
        }
    }
    let max_residual = rhs.sub(&gap).max_abs_coeff();
    SosCheck { valid: max_residual <= 1e-9 * (1.0 + gap.max_abs_coeff()), max_residual }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BickelEstimate {
    pub inf_ratio: f64,
    pub argmin: C2,
}

/// `(|p(z)|² − |p̃(z)|²) / ((1−|z₁|²)(1−|z₂|²))`.
pub fn bickel_ratio(p: &Poly2, p_tilde: &Poly2, z: &C2) -> f64 {
    let (a, b) = (p.eval(z).norm(), p_tilde.eval(z).norm());
    let gap = (a - b) * (a + b);
    gap / ((1.0 - z[0].norm_sqr()) * (1.0 - z[1].norm_sqr()))
}

/// Infimum of the Bickel ratio over the seeded sample described by `sampler`.
pub fn estimate_bickel_constant(p: &Poly2, sampler: &SamplerSpec) -> Result<BickelEstimate> {
    let pt = p.reflect();
    let chunks = map_chunks(sampler, |_, points| {
        let mut best = (f64::INFINITY, [Complex64::ZERO; 2]);
        let mut worst_gap = (0.0, [Complex64::ZERO; 2]);
        for z in points {
            let w = (1.0 - z[0].norm_sqr()) * (1.0 - z[1].norm_sqr());
            if w <= 0.0 {
                continue;
            }
            let (a, b) = (p.eval(z).norm(), pt.eval(z).norm());
            let gap = (a - b) * (a + b);
            if gap < worst_gap.0 {
                worst_gap = (gap, *z);
            }
            let ratio = gap / w;
            if ratio < best.0 {
                best = (ratio, *z);
            }
        }
        (best, worst_gap)
    })?;
    let mut best = (f64::INFINITY, [Complex64::ZERO; 2]);
    for (_, ((ratio, z), (gap, at))) in chunks {
        if gap < -1e-9 {
            return Err(Error::DivergentRatio { value: gap, at });
        }
        if ratio < best.0 {
            best = (ratio, z);
        }
    }
    Ok(BickelEstimate { inf_ratio: best.0.max(0.0), argmin: best.1 })
}
