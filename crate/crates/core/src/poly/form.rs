use num_complex::Complex64;

use super::{powers, Poly2};
use crate::C2;

/// Coefficients `a[i₁][j₁][i₂][j₂]` of a polynomial in `(z, z̄)`:
/// `Σ a · z₁^{i₁} z₂^{j₁} z̄₁^{i₂} z̄₂^{j₂}`.
///
/// Holomorphic indices run over `0..=d1` (for `z₁`) and `0..=d2` (for `z₂`),
/// and the antiholomorphic indices over the same ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianForm {
    d1: usize,
    d2: usize,
    a: Vec<Complex64>,
}

impl HermitianForm {
    pub fn zeros(d1: usize, d2: usize) -> Self {
        let len = (d1 + 1) * (d1 + 1) * (d2 + 1) * (d2 + 1);
        Self { d1, d2, a: vec![Complex64::ZERO; len] }
    }

    /// Coefficients of `p(z) · conj(q(z))`.
    pub fn product(p: &Poly2, q: &Poly2) -> Self {
        let (pn, pm) = p.bidegree();
        let (qn, qm) = q.bidegree();
        let mut out = Self::zeros(pn.max(qn), pm.max(qm));
        for (i1, j1, a) in p.terms() {
            for (i2, j2, b) in q.terms() {
                let k = out.idx(i1, j1, i2, j2);
                out.a[k] += a * b.conj();
            }
        }
        out
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.d1, self.d2)
    }

    fn idx(&self, i1: usize, j1: usize, i2: usize, j2: usize) -> usize {
        let (s1, s2) = (self.d1 + 1, self.d2 + 1);
        ((i1 * s2 + j1) * s1 + i2) * s2 + j2
    }

    pub fn get(&self, i1: usize, j1: usize, i2: usize, j2: usize) -> Complex64 {
        if i1 > self.d1 || i2 > self.d1 || j1 > self.d2 || j2 > self.d2 {
            return Complex64::ZERO;
        }
        self.a[self.idx(i1, j1, i2, j2)]
    }

    /// Nonzero coefficients as `((i₁, j₁, i₂, j₂), a)`.
    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize, usize, usize), Complex64)> + '_ {
        let (d1, d2) = (self.d1, self.d2);
        (0..=d1)
            .flat_map(move |i1| (0..=d2).map(move |j1| (i1, j1)))
            .flat_map(move |(i1, j1)| (0..=d1).map(move |i2| (i1, j1, i2)))
            .flat_map(move |(i1, j1, i2)| (0..=d2).map(move |j2| (i1, j1, i2, j2)))
            .map(move |k| (k, self.get(k.0, k.1, k.2, k.3)))
            .filter(|(_, a)| *a != Complex64::ZERO)
    }

    fn resized(&self, d1: usize, d2: usize) -> Self {
        let mut out = Self::zeros(d1.max(self.d1), d2.max(self.d2));
        for ((i1, j1, i2, j2), a) in self.terms() {
            let k = out.idx(i1, j1, i2, j2);
            out.a[k] = a;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.resized(other.d1, other.d2);
        for ((i1, j1, i2, j2), a) in other.terms() {
            let k = out.idx(i1, j1, i2, j2);
            out.a[k] += a;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { d1: self.d1, d2: self.d2, a: self.a.iter().map(|x| x * s).collect() }
    }

    /// Multiplies by `(1 − |z_v|²)`, `v ∈ {0, 1}` selecting the variable.
    pub fn times_one_minus_abs2(&self, v: usize) -> Self {
        let (d1, d2) = if v == 0 { (self.d1 + 1, self.d2) } else { (self.d1, self.d2 + 1) };
        let mut out = Self::zeros(d1, d2);
        for ((i1, j1, i2, j2), a) in self.terms() {
            let k = out.idx(i1, j1, i2, j2);
            out.a[k] += a;
            let k = if v == 0 {
                out.idx(i1 + 1, j1, i2 + 1, j2)
            } else {
                out.idx(i1, j1 + 1, i2, j2 + 1)
            };
            out.a[k] -= a;
        }
        out
    }

    pub fn eval(&self, z: &C2) -> Complex64 {
        let (d1, d2) = (self.d1, self.d2);
        let p1 = powers(z[0], d1);
        let p2 = powers(z[1], d2);
        let q1 = powers(z[0].conj(), d1);
        let q2 = powers(z[1].conj(), d2);
        let mut acc = Complex64::ZERO;
        for ((i1, j1, i2, j2), a) in self.terms() {
            acc += a * p1[i1] * p2[j1] * q1[i2] * q2[j2];
        }
        acc
    }

    /// Real part of [`eval`](Self::eval); the imaginary part is rounding noise
    /// for Hermitian forms.
    pub fn eval_real(&self, z: &C2) -> f64 {
        self.eval(z).re
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.a.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// `max |a[i₁][j₁][i₂][j₂] − conj(a[i₂][j₂][i₁][j₁])|`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for ((i1, j1, i2, j2), a) in self.terms() {
            worst = worst.max((a - self.get(i2, j2, i1, j1).conj()).norm());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;

    #[test]
    fn one_minus_abs2_multiplier() {
        let one = HermitianForm::product(&Poly2::constant(Complex64::ONE), &Poly2::constant(Complex64::ONE));
        let w = one.times_one_minus_abs2(0).times_one_minus_abs2(1);
        let z = [c(0.3, 0.4), c(-0.2, 0.6)];
        let want = (1.0 - z[0].norm_sqr()) * (1.0 - z[1].norm_sqr());
        assert!((w.eval_real(&z) - want).abs() < 1e-15);
        assert_eq!(w.hermitian_residual(), 0.0);
    }

    #[test]
    fn mismatched_degrees_pad() {
        let a = Poly2::affine_diagonal(2.0).mod2_form();
        let b = Poly2::constant(c(2.0, 0.0)).mod2_form();
        let d = a.sub(&b);
        let z = [c(0.1, 0.2), c(0.3, -0.1)];
        let want = Poly2::affine_diagonal(2.0).eval(&z).norm_sqr() - 4.0;
        assert!((d.eval_real(&z) - want).abs() < 1e-14);
    }
}
