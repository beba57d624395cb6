//! Dense bivariate complex polynomials.
//!
//! A [`Poly2`] carries an explicit *declared* bidegree `(n, m)`. The
//! reflection `p̃(z) = z₁ⁿ z₂ᵐ · conj(p(1/z̄₁, 1/z̄₂))` depends on it, so padding
//! the degree changes `p̃` by a monomial factor.

mod form;

pub use form::HermitianForm;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::C2;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly2 {
    n: usize,
    m: usize,
    /// Row-major: `coeffs[i * (m + 1) + j]` multiplies `z₁ⁱ z₂ʲ`.
    coeffs: Vec<Complex64>,
}

impl Poly2 {
    pub fn new(bidegree: (usize, usize), coeffs: Vec<Complex64>) -> Result<Self> {
        let (n, m) = bidegree;
        if coeffs.len() != (n + 1) * (m + 1) {
            return Err(Error::InvalidInput(format!(
                "bidegree ({n}, {m}) needs {} coefficients, got {}",
                (n + 1) * (m + 1),
                coeffs.len()
            )));
        }
        Ok(Self { n, m, coeffs })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self { n, m, coeffs: vec![Complex64::ZERO; (n + 1) * (m + 1)] }
    }

    pub fn constant(value: Complex64) -> Self {
        Self { n: 0, m: 0, coeffs: vec![value] }
    }

    /// Builds a polynomial of declared bidegree `(n, m)` from `(i, j, c)`
    /// triples. Repeated indices are summed.
    pub fn from_terms(n: usize, m: usize, terms: &[(usize, usize, Complex64)]) -> Result<Self> {
        let mut p = Self::zeros(n, m);
        for &(i, j, c) in terms {
            if i > n || j > m {
                return Err(Error::InvalidInput(format!(
                    "term z1^{i} z2^{j} exceeds declared bidegree ({n}, {m})"
                )));
            }
            p.coeffs[i * (m + 1) + j] += c;
        }
        Ok(p)
    }

    /// `c - z₁ - z₂` with bidegree (1, 1); `c = 2` and `c = 3` are the
    /// standard singular and stable examples.
    pub fn affine_diagonal(c: f64) -> Self {
        let one = Complex64::ONE;
        Self::from_terms(1, 1, &[(0, 0, Complex64::new(c, 0.0)), (1, 0, -one), (0, 1, -one)])
            .expect("indices within bidegree")
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    /// Largest indices carrying a nonzero coefficient.
    pub fn natural_bidegree(&self) -> (usize, usize) {
        let mut nat = (0, 0);
        for i in 0..=self.n {
            for j in 0..=self.m {
                if self.coeff(i, j) != Complex64::ZERO {
                    nat.0 = nat.0.max(i);
                    nat.1 = nat.1.max(j);
                }
            }
        }
        nat
    }

    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        if i > self.n || j > self.m {
            return Complex64::ZERO;
        }
        self.coeffs[i * (self.m + 1) + j]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Nonzero terms in `(i, j)` lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..=self.n)
            .flat_map(move |i| (0..=self.m).map(move |j| (i, j, self.coeff(i, j))))
            .filter(|&(_, _, c)| c != Complex64::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::ZERO)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation, inner index `j` first.
    pub fn eval(&self, z: &C2) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for i in (0..=self.n).rev() {
            let row = &self.coeffs[i * (self.m + 1)..(i + 1) * (self.m + 1)];
            let mut inner = Complex64::ZERO;
            for c in row.iter().rev() {
                inner = inner * z[1] + c;
            }
            acc = acc * z[0] + inner;
        }
        acc
    }

    /// `(∂p/∂z₁, ∂p/∂z₂)` at `z`.
    pub fn gradient(&self, z: &C2) -> [Complex64; 2] {
        let p1 = powers(z[0], self.n);
        let p2 = powers(z[1], self.m);
        let mut g = [Complex64::ZERO; 2];
        for i in 0..=self.n {
            for j in 0..=self.m {
                let c = self.coeff(i, j);
                if c == Complex64::ZERO {
                    continue;
                }
                if i > 0 {
                    g[0] += c * (i as f64) * p1[i - 1] * p2[j];
                }
                if j > 0 {
                    g[1] += c * (j as f64) * p1[i] * p2[j - 1];
                }
            }
        }
        g
    }

    /// Coefficientwise `c̃[i][j] = conj(c[n−i][m−j])` for the declared bidegree.
    pub fn reflect(&self) -> Poly2 {
        let (n, m) = (self.n, self.m);
        let mut out = Self::zeros(n, m);
        for i in 0..=n {
            for j in 0..=m {
                out.coeffs[i * (m + 1) + j] = self.coeff(n - i, m - j).conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Poly2 {
        Poly2 { n: self.n, m: self.m, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// `z ↦ p(e^{−iα₁} z₁, e^{−iα₂} z₂)`; moves torus zeros by `+α` in angle.
    pub fn rotate(&self, alpha1: f64, alpha2: f64) -> Poly2 {
        let mut out = self.clone();
        for i in 0..=self.n {
            for j in 0..=self.m {
                let phase = Complex64::from_polar(1.0, -(i as f64) * alpha1 - (j as f64) * alpha2);
                out.coeffs[i * (self.m + 1) + j] *= phase;
            }
        }
        out
    }

    /// Product of two polynomials; bidegrees add.
    pub fn mul(&self, other: &Poly2) -> Poly2 {
        let mut out = Self::zeros(self.n + other.n, self.m + other.m);
        let w = out.m + 1;
        for (i, j, a) in self.terms() {
            for (k, l, b) in other.terms() {
                out.coeffs[(i + k) * w + j + l] += a * b;
            }
        }
        out
    }

    /// Coefficient array of `|p(z)|²`.
    pub fn mod2_form(&self) -> HermitianForm {
        HermitianForm::product(self, self)
    }

    /// `(L₁, L₂)` with `Lₖ = Σ deg_k · |c|`: sup-bounds of `|∂p/∂zₖ|` on the
    /// closed bidisc.
    pub fn derivative_bound(&self) -> (f64, f64) {
        let mut l = (0.0, 0.0);
        for (i, j, c) in self.terms() {
            l.0 += i as f64 * c.norm();
            l.1 += j as f64 * c.norm();
        }
        l
    }

    /// Sup-bounds of `|∂²p/∂z₁²|`, `|∂²p/∂z₁∂z₂|`, `|∂²p/∂z₂²|` on the closed
    /// bidisc.
    pub fn second_derivative_bound(&self) -> (f64, f64, f64) {
        let mut h = (0.0, 0.0, 0.0);
        for (i, j, c) in self.terms() {
            let (i, j, a) = (i as f64, j as f64, c.norm());
            h.0 += i * (i - 1.0).max(0.0) * a;
            h.1 += i * j * a;
            h.2 += j * (j - 1.0).max(0.0) * a;
        }
        h
    }

    /// Maximum of `|p|` over the torus, which for a polynomial is the maximum
    /// over the closed bidisc. Grid scan followed by golden-section
    /// refinement in each angle; the result is an attained value, hence a
    /// lower bound of the true maximum.
    pub fn max_modulus_torus(&self, grid_n: usize) -> f64 {
        let grid_n = grid_n.max(8);
        let h = 2.0 * PI / grid_n as f64;
        let f = |t1: f64, t2: f64| self.eval(&torus(t1, t2)).norm();

        let mut values = Vec::with_capacity(grid_n * grid_n);
        for a in 0..grid_n {
            for b in 0..grid_n {
                values.push((f(a as f64 * h, b as f64 * h), a, b));
            }
        }
        values.sort_by(|x, y| y.0.total_cmp(&x.0));

        let mut best = values[0].0;
        for &(v0, a, b) in values.iter().take(6) {
            let (mut t1, mut t2, mut v) = (a as f64 * h, b as f64 * h, v0);
            let mut width = h;
            for _ in 0..8 {
                t1 = golden_max(|t| f(t, t2), t1 - width, t1 + width);
                t2 = golden_max(|t| f(t1, t), t2 - width, t2 + width);
                v = v.max(f(t1, t2));
                width *= 0.5;
            }
            best = best.max(v);
        }
        best
    }
}

pub(crate) fn powers(z: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = Complex64::ONE;
    for _ in 0..=n {
        out.push(acc);
        acc *= z;
    }
    out
}

pub(crate) fn torus(t1: f64, t2: f64) -> C2 {
    [Complex64::from_polar(1.0, t1), Complex64::from_polar(1.0, t2)]
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Minimum-norm Newton iteration for `p(z) = 0` in ℂ²:
/// `z ← z − p(z) · conj(∇p) / |∇p|²`. Returns the limit when `|p| < tol`.
pub(crate) fn newton_zero(p: &Poly2, start: C2, max_iter: usize, tol: f64) -> Option<C2> {
    let mut z = start;
    for _ in 0..max_iter {
        let v = p.eval(&z);
        if v.norm() < tol {
            return Some(z);
        }
        let g = p.gradient(&z);
        let gn = g[0].norm_sqr() + g[1].norm_sqr();
        if gn < 1e-300 || !gn.is_finite() {
            return None;
        }
        z = [z[0] - v * g[0].conj() / gn, z[1] - v * g[1].conj() / gn];
        if !(z[0].is_finite() && z[1].is_finite()) || z[0].norm() > 1e6 || z[1].norm() > 1e6 {
            return None;
        }
    }
    (p.eval(&z).norm() < tol).then_some(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut impl Rng, n: usize, m: usize) -> Poly2 {
        let coeffs = (0..(n + 1) * (m + 1))
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Poly2::new((n, m), coeffs).unwrap()
    }

    fn random_closed_bidisc(rng: &mut impl Rng) -> C2 {
        let mut draw = || Complex64::from_polar(rng.random::<f64>().sqrt(), rng.random_range(0.0..2.0 * PI));
        [draw(), draw()]
    }

    #[test]
    fn eval_examples() {
        let p = Poly2::affine_diagonal(2.0);
        assert_eq!(p.eval(&[c(0.0, 0.0), c(0.0, 0.0)]), c(2.0, 0.0));
        assert_eq!(p.eval(&[c(1.0, 0.0), c(1.0, 0.0)]), c(0.0, 0.0));
        let q = Poly2::affine_diagonal(3.0);
        assert_eq!(q.eval(&[c(0.0, 1.0), c(0.0, -1.0)]), c(3.0, 0.0));
    }

    #[test]
    fn reflect_examples() {
        let one = Complex64::ONE;
        let p = Poly2::affine_diagonal(2.0);
        let want = Poly2::from_terms(1, 1, &[(1, 1, 2.0 * one), (1, 0, -one), (0, 1, -one)]).unwrap();
        assert_eq!(p.reflect(), want);

        let k = Poly2::constant(c(1.5, -2.0));
        assert_eq!(k.reflect(), Poly2::constant(c(1.5, 2.0)));

        let q = Poly2::affine_diagonal(3.0);
        let want = Poly2::from_terms(1, 1, &[(1, 1, 3.0 * one), (1, 0, -one), (0, 1, -one)]).unwrap();
        assert_eq!(q.reflect(), want);
    }

    #[test]
    fn padded_reflection_picks_up_monomial_factor() {
        // 1 + z1 declared as (2, 1): reflection is z1 z2 (z1 + 1).
        let p = Poly2::from_terms(2, 1, &[(0, 0, Complex64::ONE), (1, 0, Complex64::ONE)]).unwrap();
        let r = p.reflect();
        assert_eq!(r.natural_bidegree(), (2, 1));
        assert_eq!(r.coeff(2, 1), Complex64::ONE);
        assert_eq!(r.coeff(1, 1), Complex64::ONE);
    }

    #[test]
    fn derivative_bound_examples() {
        assert_eq!(Poly2::affine_diagonal(2.0).derivative_bound(), (1.0, 1.0));
        assert_eq!(Poly2::constant(c(4.0, 1.0)).derivative_bound(), (0.0, 0.0));
        assert_eq!(Poly2::affine_diagonal(2.0).reflect().derivative_bound(), (3.0, 3.0));
    }

    #[test]
    fn max_modulus_examples() {
        assert!((Poly2::affine_diagonal(2.0).max_modulus_torus(64) - 4.0).abs() < 1e-9);
        assert!((Poly2::affine_diagonal(3.0).max_modulus_torus(64) - 5.0).abs() < 1e-9);
        assert!((Poly2::constant(c(3.0, 4.0)).max_modulus_torus(8) - 5.0).abs() < 1e-12);
        // maximum off the grid: rotate by an irrational angle
        let p = Poly2::affine_diagonal(2.0).rotate(0.1234567, -0.7654321);
        let m = p.max_modulus_torus(256);
        assert!(m <= 4.0 + 1e-12 && m > 4.0 - 1e-6, "{m}");
    }

    #[test]
    fn mod2_form_examples() {
        let one = Complex64::ONE;
        let p = Poly2::from_terms(1, 0, &[(0, 0, one), (1, 0, one)]).unwrap();
        let f = p.mod2_form();
        for (i1, i2) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            assert_eq!(f.get(i1, 0, i2, 0), one);
        }
        let q = Poly2::affine_diagonal(2.0);
        assert!((q.mod2_form().eval_real(&[Complex64::ZERO; 2]) - 4.0).abs() < 1e-15);
        let r = Poly2::from_terms(0, 1, &[(0, 1, c(0.0, 1.0))]).unwrap();
        let f = r.mod2_form();
        assert_eq!(f.get(0, 1, 0, 1), one);
        assert_eq!(f.get(0, 0, 0, 0), Complex64::ZERO);
    }

    #[test]
    fn torus_isometry_of_reflection() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let (n, m) = (rng.random_range(0..5), rng.random_range(0..5));
            let p = random_poly(&mut rng, n, m);
            let pr = p.reflect();
            for _ in 0..100 {
                let z = torus(rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
                let (a, b) = (p.eval(&z).norm(), pr.eval(&z).norm());
                assert!((a - b).abs() <= 1e-9 * (1.0 + a));
            }
        }
    }

    #[test]
    fn mod2_form_matches_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let (n, m) = (rng.random_range(0..5), rng.random_range(0..5));
            let p = random_poly(&mut rng, n, m);
            let f = p.mod2_form();
            for _ in 0..100 {
                let z = random_closed_bidisc(&mut rng);
                let want = p.eval(&z).norm_sqr();
                let got = f.eval(&z);
                assert!((got.re - want).abs() <= 1e-9 * (1.0 + want));
                assert!(got.im.abs() <= 1e-9 * (1.0 + want));
            }
        }
    }

    #[test]
    fn derivative_bound_is_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = 1e-6;
        for _ in 0..10 {
            let (n, m) = (rng.random_range(0..5), rng.random_range(0..5));
            let p = random_poly(&mut rng, n, m);
            let (l1, l2) = p.derivative_bound();
            for _ in 0..100 {
                let z = random_closed_bidisc(&mut rng);
                let d1 = (p.eval(&[z[0] + h, z[1]]) - p.eval(&[z[0] - h, z[1]])) / (2.0 * h);
                let d2 = (p.eval(&[z[0], z[1] + h]) - p.eval(&[z[0], z[1] - h])) / (2.0 * h);
                assert!(d1.norm() <= l1 + 1e-6);
                assert!(d2.norm() <= l2 + 1e-6);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let p = random_poly(&mut rng, 4, 3);
        let z = random_closed_bidisc(&mut rng);
        let g = p.gradient(&z);
        let h = 1e-6;
        let d1 = (p.eval(&[z[0] + h, z[1]]) - p.eval(&[z[0] - h, z[1]])) / (2.0 * h);
        assert!((g[0] - d1).norm() < 1e-7);
    }

    #[test]
    fn bidegree_mismatch_rejected() {
        assert!(Poly2::new((1, 1), vec![Complex64::ONE; 3]).is_err());
        assert!(Poly2::from_terms(1, 0, &[(0, 1, Complex64::ONE)]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn reflection_is_an_involution(
            n in 0usize..7, m in 0usize..7,
            seed in proptest::prelude::any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_poly(&mut rng, n, m);
            proptest::prop_assert_eq!(p.reflect().reflect(), p);
        }
    }
}
