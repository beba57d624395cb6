//! Rational inner functions `φ = λ z₁ᴹ z₂ᴺ p̃ / p` on the bidisc.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{newton_zero, torus, Poly2};
use crate::stability::{certify_stable, Verdict};
use crate::C2;

const TWO_PI: f64 = 2.0 * PI;

/// Point `(e^{iθ₁}, e^{iθ₂})` of the torus, angles kept in `[0, 2π)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TorusPoint {
    angles: [f64; 2],
}

impl TorusPoint {
    pub const ANGLE_TOL: f64 = 1e-8;

    pub fn new(theta1: f64, theta2: f64) -> Self {
        Self { angles: [theta1.rem_euclid(TWO_PI), theta2.rem_euclid(TWO_PI)] }
    }

    /// Projects both coordinates of `z` radially onto the unit circle.
    pub fn from_point(z: &C2) -> Self {
        Self::new(z[0].arg(), z[1].arg())
    }

    pub fn one() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn angles(&self) -> [f64; 2] {
        self.angles
    }

    pub fn point(&self) -> C2 {
        torus(self.angles[0], self.angles[1])
    }

    /// Euclidean distance between the wrapped angle differences.
    pub fn angular_distance(&self, other: &TorusPoint) -> f64 {
        let d = |a: f64, b: f64| {
            let x = (a - b).rem_euclid(TWO_PI);
            x.min(TWO_PI - x)
        };
        d(self.angles[0], other.angles[0]).hypot(d(self.angles[1], other.angles[1]))
    }
}

impl PartialEq for TorusPoint {
    fn eq(&self, other: &Self) -> bool {
        self.angular_distance(other) <= Self::ANGLE_TOL
    }
}

/// `λ z₁ᴹ z₂ᴺ p̃ / p` with validated denominator and cached torus zeros.
#[derive(Clone, Debug)]
pub struct RationalInnerFunction {
    lambda: Complex64,
    monomial_powers: (u32, u32),
    denom: Poly2,
    numer: Poly2,
    singularities: Vec<TorusPoint>,
}

const VALIDATION_SEED: u64 = 0x5249_465f_7661_6c31;
const VALIDATION_SAMPLES: usize = 2000;
const FALLBACK_SAMPLES: usize = 100_000;
const CERTIFY_BUDGET: usize = 20_000;

impl RationalInnerFunction {
    /// Builds and validates the RIF.
    ///
    /// Fails with [`Error::ZeroInOpenBidisc`] when `p` vanishes at some `z`
    /// with `|z₁|, |z₂| < 1 − 1e-6`, and with [`Error::NotInner`] when `λ` is
    /// not unimodular or the sampled modulus checks fail.
    pub fn new(lambda: Complex64, monomial_powers: (u32, u32), p: Poly2) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::InvalidInput("denominator is identically zero".into()));
        }
        if (lambda.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::NotInner(format!("|lambda| = {} is not 1", lambda.norm())));
        }
        check_open_bidisc_zero_free(&p)?;

        let numer = p.reflect();
        let singularities = find_torus_zeros(&p, 128, 1e-10);
        let rif = Self { lambda, monomial_powers, denom: p, numer, singularities };
        rif.validate_modulus()?;
        Ok(rif)
    }

    /// The standard singular example `(2z₁z₂ − z₁ − z₂) / (2 − z₁ − z₂)`.
    pub fn favorite() -> Self {
        Self::new(Complex64::ONE, (0, 0), Poly2::affine_diagonal(2.0)).expect("valid RIF")
    }

    /// `z₁ᴹ z₂ᴺ`.
    pub fn monomial(m: u32, n: u32) -> Self {
        Self::new(Complex64::ONE, (m, n), Poly2::constant(Complex64::ONE)).expect("valid RIF")
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn monomial_powers(&self) -> (u32, u32) {
        self.monomial_powers
    }

    pub fn denom(&self) -> &Poly2 {
        &self.denom
    }

    pub fn numer(&self) -> &Poly2 {
        &self.numer
    }

    pub fn singularities(&self) -> &[TorusPoint] {
        &self.singularities
    }

    /// Same function multiplied by the unimodular `u`.
    pub fn rotated_by(&self, u: Complex64) -> Result<Self> {
        if (u.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::NotInner(format!("|u| = {} is not 1", u.norm())));
        }
        Ok(Self { lambda: self.lambda * u, ..self.clone() })
    }

    pub fn negated(&self) -> Self {
        Self { lambda: -self.lambda, ..self.clone() }
    }

    pub fn eval(&self, z: &C2) -> Result<Complex64> {
        let d = self.denom.eval(z);
        if d.norm() <= 1e-14 {
            return Err(Error::NearSingularity { modulus: d.norm() });
        }
        let (m, n) = self.monomial_powers;
        Ok(self.lambda * z[0].powu(m) * z[1].powu(n) * self.numer.eval(z) / d)
    }

    /// Distance (angular) from `tau` to the nearest singularity.
    pub fn distance_to_singularity(&self, tau: &TorusPoint) -> f64 {
        self.singularities.iter().map(|s| s.angular_distance(tau)).fold(f64::INFINITY, f64::min)
    }

    /// Limit of `φ((1−t)τ)` as `t → 0`, by Richardson extrapolation of the
    /// values at `t = 2⁻³, …, 2⁻²⁰`.
    pub fn nontangential_value(&self, tau: &TorusPoint) -> Result<Complex64> {
        let zeta = tau.point();
        let mut table: Vec<Vec<Complex64>> = Vec::new();
        let mut best: Option<(f64, Complex64)> = None;
        let mut prev_diag: Option<Complex64> = None;
        for k in 3..=20 {
            let s = 1.0 - 2f64.powi(-k);
            let v = self.eval(&[zeta[0] * s, zeta[1] * s])?;
            let mut row = vec![v];
            if let Some(last) = table.last() {
                for j in 1..=last.len().min(7) {
                    let f = 2f64.powi(j as i32) - 1.0;
                    let next = row[j - 1] + (row[j - 1] - last[j - 1]) / f;
                    row.push(next);
                }
            }
            let diag = *row.last().expect("row is nonempty");
            if let Some(p) = prev_diag {
                let err = (diag - p).norm();
                if best.is_none_or(|(e, _)| err < e) {
                    best = Some((err, diag));
                }
            }
            prev_diag = Some(diag);
            table.push(row);
        }
        let (err, value) = best.expect("at least two extrapolants");
        if err > 1e-4 {
            return Err(Error::NoStableLimit(err));
        }
        Ok(value)
    }

    fn validate_modulus(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        for _ in 0..VALIDATION_SAMPLES {
            let zeta = torus(rng.random_range(0.0..TWO_PI), rng.random_range(0.0..TWO_PI));
            if self.denom.eval(&zeta).norm() <= 1e-6 {
                continue;
            }
            let v = self.eval(&zeta)?;
            if (v.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::NotInner(format!("|phi| = {} on the torus at ({:.6}, {:.6})", v.norm(), zeta[0], zeta[1])));
            }
        }
        for _ in 0..VALIDATION_SAMPLES {
            let z = uniform_bidisc(&mut rng);
            if let Ok(v) = self.eval(&z) {
                if v.norm() > 1.0 + 1e-9 {
                    return Err(Error::NotInner(format!("|phi| = {} inside the bidisc at ({:.6}, {:.6})", v.norm(), z[0], z[1])));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn uniform_disc(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(rng.random::<f64>().sqrt(), rng.random_range(0.0..TWO_PI))
}

pub(crate) fn uniform_bidisc(rng: &mut impl Rng) -> C2 {
    [uniform_disc(rng), uniform_disc(rng)]
}

fn check_open_bidisc_zero_free(p: &Poly2) -> Result<()> {
    const INNER: f64 = 1.0 - 1e-6;
    let inside = |z: &C2| z[0].norm() < INNER && z[1].norm() < INNER;
    let cert = certify_stable(p, false, CERTIFY_BUDGET);
    match (cert.verdict, cert.witness) {
        (Verdict::CertifiedStableOpen | Verdict::CertifiedStableClosed, _) => return Ok(()),
        (Verdict::ZeroFound, Some(w)) if inside(&w) => return Err(Error::ZeroInOpenBidisc { witness: w }),
        _ => {}
    }

    // Rejection-sampling fallback: polish the smallest sampled values.
    let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED ^ 0xfa11);
    let mut samples: Vec<(f64, C2)> = (0..FALLBACK_SAMPLES)
        .map(|_| {
            let z = uniform_bidisc(&mut rng);
            (p.eval(&z).norm(), z)
        })
        .collect();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tol = 1e-12 * (1.0 + p.max_abs_coeff());
    for &(_, z) in samples.iter().take(16) {
        if let Some(w) = newton_zero(p, z, 60, tol) {
            if inside(&w) {
                return Err(Error::ZeroInOpenBidisc { witness: w });
            }
        }
    }
    Ok(())
}

/// Torus zeros of `p`: grid scan of `|p(e^{iθ₁}, e^{iθ₂})|` followed by damped
/// Newton refinement of `Re p = Im p = 0` in the angles. Points closer than
/// 1e-6 are merged; every returned point satisfies `|p(ζ)| < tol`.
pub fn find_torus_zeros(p: &Poly2, grid_n: usize, tol: f64) -> Vec<TorusPoint> {
    let grid_n = grid_n.max(8);
    let h = TWO_PI / grid_n as f64;
    let (l1, l2) = p.derivative_bound();
    let threshold = (l1 + l2) * h;
    let vals: Vec<f64> = (0..grid_n * grid_n)
        .map(|k| p.eval(&torus((k / grid_n) as f64 * h, (k % grid_n) as f64 * h)).norm())
        .collect();
    let at = |a: isize, b: isize| {
        let n = grid_n as isize;
        vals[(a.rem_euclid(n) * n + b.rem_euclid(n)) as usize]
    };

    let mut candidates = Vec::new();
    for a in 0..grid_n as isize {
        for b in 0..grid_n as isize {
            let v = at(a, b);
            if v > threshold {
                continue;
            }
            let is_min = (-1..=1).all(|da| (-1..=1).all(|db| (da == 0 && db == 0) || v <= at(a + da, b + db)));
            if is_min {
                candidates.push((v, a as f64 * h, b as f64 * h));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    candidates.truncate(4 * grid_n);

    let mut found: Vec<(f64, TorusPoint)> = Vec::new();
    for (_, t1, t2) in candidates {
        match refine_torus_zero(p, t1, t2, tol) {
            Ok((pt, modulus)) => {
                if let Some(existing) = found.iter_mut().find(|(_, q)| q.angular_distance(&pt) < 1e-6) {
                    if modulus < existing.0 {
                        *existing = (modulus, pt);
                    }
                } else {
                    found.push((modulus, pt));
                }
            }
            Err(e) => log::debug!("dropping torus zero candidate: {e}"),
        }
    }
    let mut out: Vec<TorusPoint> = found.into_iter().map(|(_, q)| q).collect();
    out.sort_by(|a, b| a.angles[0].total_cmp(&b.angles[0]).then(a.angles[1].total_cmp(&b.angles[1])));
    out
}

/// Levenberg–Marquardt on `(Re p, Im p)` as functions of the two angles.
pub(crate) fn refine_torus_zero(p: &Poly2, t1: f64, t2: f64, tol: f64) -> Result<(TorusPoint, f64)> {
    let residual = |a: f64, b: f64| p.eval(&torus(a, b));
    let (mut a, mut b) = (t1, t2);
    let mut f = residual(a, b);
    let mut mu = 1e-3;
    for _ in 0..50 {
        let z = torus(a, b);
        let g = p.gradient(&z);
        // d p / d θₖ = i zₖ ∂p/∂zₖ
        let d1 = Complex64::I * z[0] * g[0];
        let d2 = Complex64::I * z[1] * g[1];
        let (j11, j12, j21, j22) = (d1.re, d2.re, d1.im, d2.im);
        let (f1, f2) = (f.re, f.im);
        // normal equations (JᵀJ + μ·diag) δ = −Jᵀ F
        let a11 = j11 * j11 + j21 * j21;
        let a12 = j11 * j12 + j21 * j22;
        let a22 = j12 * j12 + j22 * j22;
        let r1 = -(j11 * f1 + j21 * f2);
        let r2 = -(j12 * f1 + j22 * f2);
        let mut accepted = false;
        for _ in 0..30 {
            let (m11, m22) = (a11 + mu * (a11 + 1e-300), a22 + mu * (a22 + 1e-300));
            let det = m11 * m22 - a12 * a12;
            if det.abs() < 1e-300 {
                mu *= 10.0;
                continue;
            }
            let da = (r1 * m22 - a12 * r2) / det;
            let db = (m11 * r2 - a12 * r1) / det;
            let fn_ = residual(a + da, b + db);
            if fn_.norm() < f.norm() {
                a += da;
                b += db;
                f = fn_;
                mu = (mu * 0.3).max(1e-12);
                accepted = true;
                break;
            }
            mu *= 10.0;
        }
        if !accepted || f.norm() < tol * 1e-6 {
            break;
        }
    }
    if f.norm() < tol {
        Ok((TorusPoint::new(a, b), f.norm()))
    } else {
        Err(Error::NoConvergence(t1, t2))
    }
}

/// Holomorphic self-map `Φ = (φ₁, φ₂)` of the bidisc.
#[derive(Clone, Debug)]
pub struct SymbolMap {
    components: [RationalInnerFunction; 2],
}

impl SymbolMap {
    pub fn new(phi1: RationalInnerFunction, phi2: RationalInnerFunction) -> Self {
        Self { components: [phi1, phi2] }
    }

    pub fn diagonal(phi: RationalInnerFunction) -> Self {
        Self { components: [phi.clone(), phi] }
    }

    pub fn identity() -> Self {
        Self::new(RationalInnerFunction::monomial(1, 0), RationalInnerFunction::monomial(0, 1))
    }

    /// `(z₂, z₁)`.
    pub fn swap() -> Self {
        Self::new(RationalInnerFunction::monomial(0, 1), RationalInnerFunction::monomial(1, 0))
    }

    pub fn components(&self) -> &[RationalInnerFunction; 2] {
        &self.components
    }

    /// True when both components carry identical data.
    pub fn is_diagonal(&self) -> bool {
        let [a, b] = &self.components;
        a.lambda == b.lambda && a.monomial_powers == b.monomial_powers && a.denom == b.denom
    }

    pub fn eval(&self, z: &C2) -> Result<C2> {
        Ok([self.components[0].eval(z)?, self.components[1].eval(z)?])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FirstOrderCheck {
    pub invertible: bool,
    pub det: Complex64,
}

/// Central-difference Jacobian of `Φ` at the torus point `ζ` (step 1e-6);
/// invertible when `|det| > 1e-8`.
pub fn first_order_check(map: &SymbolMap, zeta: &TorusPoint) -> Result<FirstOrderCheck> {
    for phi in map.components() {
        let d = phi.distance_to_singularity(zeta);
        if d < 1e-6 {
            return Err(Error::SingularAtPoint(d));
        }
    }
    let h = 1e-6;
    let z = zeta.point();
    let mut jac = [[Complex64::ZERO; 2]; 2];
    for (col, unit) in [[1.0, 0.0], [0.0, 1.0]].iter().enumerate() {
        let plus = [z[0] + h * unit[0], z[1] + h * unit[1]];
        let minus = [z[0] - h * unit[0], z[1] - h * unit[1]];
        let (fp, fm) = (map.eval(&plus)?, map.eval(&minus)?);
        for row in 0..2 {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    Ok(FirstOrderCheck { invertible: det.norm() > 1e-8, det })
}
