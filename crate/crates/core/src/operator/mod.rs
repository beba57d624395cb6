//! Finite sections of the composition operator `C_Φ : A²_{β_src} → A²_{β_tgt}`.

mod quadrature;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

pub use quadrature::QuadratureSpec;

use crate::error::{Error, Result};
use crate::measure::sampler::map_chunks;
use crate::measure::SamplerSpec;
use crate::rif::SymbolMap;
use crate::C2;

/// `∫_𝔻 |z|^{2k} (1−|z|²)^β dA = B(k+1, β+1)`.
pub fn basis_norm_sq(beta: f64, k: u32) -> f64 {
    ln_beta(k as f64 + 1.0, beta + 1.0).exp()
}

#[derive(Clone, Debug)]
pub struct GramTruncation {
    pub degree: usize,
    pub beta_src: f64,
    pub beta_tgt: f64,
    /// Rows and columns indexed by `k·(N+1) + l` for the monomial `z₁ᵏz₂ˡ`.
    pub gram: DMatrix<Complex64>,
    pub lambda_max: f64,
    pub quadrature: QuadratureSpec,
    /// Per-entry standard errors, Monte-Carlo mode only.
    pub std_errors: Option<DMatrix<f64>>,
}

impl GramTruncation {
    pub fn index(&self, k: usize, l: usize) -> usize {
        k * (self.degree + 1) + l
    }
}

fn check_inputs(beta_src: f64, beta_tgt: f64, n: usize) -> Result<()> {
    for (name, b) in [("beta_src", beta_src), ("beta_tgt", beta_tgt)] {
        if !(b > -1.0 && b.is_finite()) {
            return Err(Error::OutOfRange { name, value: b, range: "(-1, inf)" });
        }
    }
    if n < 1 {
        return Err(Error::InvalidInput("truncation degree must be at least 1".into()));
    }
    Ok(())
}

/// Raw integrals `∫ φ₁ᵏφ₂ˡ conj(φ₁ᵐφ₂ⁿ) w_tgt` up to degree `N`, before the
/// source normalization.
struct RawGram {
    n: usize,
    /// Diagonal symbols: `μ[a][b] = ∫ φᵃ conj(φ)ᵇ`, `a, b ≤ 2N`.
    moments: Option<DMatrix<Complex64>>,
    full: Option<DMatrix<Complex64>>,
    std_errors: Option<DMatrix<f64>>,
}

impl RawGram {
    fn entry(&self, k: usize, l: usize, m: usize, n: usize) -> Complex64 {
        match (&self.moments, &self.full) {
            (Some(mu), _) => mu[(k + l, m + n)],
            (None, Some(g)) => g[(k * (self.n + 1) + l, m * (self.n + 1) + n)],
            _ => unreachable!(),
        }
    }
}

fn symbol_values(map: &SymbolMap, z: &C2) -> Result<C2> {
    map.eval(z).map_err(|e| Error::InvalidInput(format!("symbol is not evaluable at a quadrature node: {e}")))
}

/// Lower-triangular accumulation of `w · v vᴴ`.
fn accumulate(acc: &mut [Complex64], dim: usize, v: &[Complex64], w: f64) {
    for a in 0..dim {
        let va = v[a] * w;
        let row = &mut acc[a * dim..a * dim + a + 1];
        for (b, slot) in row.iter_mut().enumerate() {
            *slot += va * v[b].conj();
        }
    }
}

fn mirror(dim: usize, lower: &[Complex64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |a, b| if b <= a { lower[a * dim + b] } else { lower[b * dim + a].conj() })
}

fn node_vector(map: &SymbolMap, diagonal: bool, n: usize, z: &C2, out: &mut Vec<Complex64>) -> Result<()> {
    out.clear();
    let [f1, f2] = symbol_values(map, z)?;
    if diagonal {
        let mut p = Complex64::ONE;
        for _ in 0..=2 * n {
            out.push(p);
            p *= f1;
        }
    } else {
        let pw2: Vec<Complex64> = (0..=n).scan(Complex64::ONE, |p, _| { let c = *p; *p *= f2; Some(c) }).collect();
        let mut p1 = Complex64::ONE;
        for _ in 0..=n {
            out.extend(pw2.iter().map(|q| p1 * q));
            p1 *= f1;
        }
    }
    Ok(())
}

fn raw_gram(map: &SymbolMap, beta_tgt: f64, n: usize, quad: &QuadratureSpec) -> Result<RawGram> {
    let diagonal = map.is_diagonal();
    let dim = if diagonal { 2 * n + 1 } else { (n + 1) * (n + 1) };
    match *quad {
        QuadratureSpec::TensorGaussPolar { n_radial, n_angular } => {
            if n_radial < 2 || n_angular < 4 {
                return Err(Error::InvalidInput("quadrature needs n_radial >= 2 and n_angular >= 4".into()));
            }
            let rule = quadrature::disc_rule(n_radial, n_angular, beta_tgt);
            let partials: Vec<Result<Vec<Complex64>>> = rule
                .par_iter()
                .map(|&(z1, w1)| {
                    let mut acc = vec![Complex64::ZERO; dim * dim];
                    let mut v = Vec::with_capacity(dim);
                    for &(z2, w2) in &rule {
                        node_vector(map, diagonal, n, &[z1, z2], &mut v)?;
                        accumulate(&mut acc, dim, &v, w1 * w2);
                    }
                    Ok(acc)
                })
                .collect();
            let mut total = vec![Complex64::ZERO; dim * dim];
            for part in partials {
                for (t, x) in total.iter_mut().zip(part?) {
                    *t += x;
                }
            }
            let m = mirror(dim, &total);
            Ok(if diagonal {
                RawGram { n, moments: Some(m), full: None, std_errors: None }
            } else {
                RawGram { n, moments: None, full: Some(m), std_errors: None }
            })
        }
        QuadratureSpec::MonteCarlo { n_samples, seed } => {
            let spec = SamplerSpec::new(seed, n_samples);
            let chunks = map_chunks(&spec, |_, points| -> Result<(Vec<Complex64>, Vec<f64>)> {
                let mut sum = vec![Complex64::ZERO; dim * dim];
                let mut sq = vec![0.0; dim * dim];
                let mut v = Vec::with_capacity(dim);
                for z in points {
                    node_vector(map, diagonal, n, z, &mut v)?;
                    let w = ((1.0 - z[0].norm_sqr()) * (1.0 - z[1].norm_sqr())).powf(beta_tgt);
                    for a in 0..dim {
                        for b in 0..=a {
                            let y = w * v[a] * v[b].conj();
                            sum[a * dim + b] += y;
                            sq[a * dim + b] += y.norm_sqr();
                        }
                    }
                }
                Ok((sum, sq))
            })?;
            let mut sum = vec![Complex64::ZERO; dim * dim];
            let mut sq = vec![0.0; dim * dim];
            for (_, chunk) in chunks {
                let (s, q) = chunk?;
                for i in 0..dim * dim {
                    sum[i] += s[i];
                    sq[i] += q[i];
                }
            }
            let nf = n_samples as f64;
            let mean: Vec<Complex64> = sum.iter().map(|s| s / nf).collect();
            let se_lower: Vec<f64> = mean
                .iter()
                .zip(&sq)
                .map(|(m, q)| ((q / nf - m.norm_sqr()).max(0.0) / (nf - 1.0)).sqrt())
                .collect();
            let m = mirror(dim, &mean);
            let se = DMatrix::from_fn(dim, dim, |a, b| if b <= a { se_lower[a * dim + b] } else { se_lower[b * dim + a] });
            Ok(if diagonal {
                RawGram { n, moments: Some(m), full: None, std_errors: Some(se) }
            } else {
                RawGram { n, moments: None, full: Some(m), std_errors: Some(se) }
            })
        }
    }
}

fn assemble(raw: &RawGram, map_diag: bool, beta_src: f64, beta_tgt: f64, n: usize, quad: QuadratureSpec) -> Result<GramTruncation> {
    let dim = (n + 1) * (n + 1);
    let norms: Vec<f64> = (0..=n).map(|k| basis_norm_sq(beta_src, k as u32).sqrt()).collect();
    let split = |i: usize| (i / (n + 1), i % (n + 1));
    let gram = DMatrix::from_fn(dim, dim, |r, c| {
        let ((k, l), (m, q)) = (split(r), split(c));
        raw.entry(k, l, m, q) / (norms[k] * norms[l] * norms[m] * norms[q])
    });
    let std_errors = raw.std_errors.as_ref().map(|se| {
        DMatrix::from_fn(dim, dim, |r, c| {
            let ((k, l), (m, q)) = (split(r), split(c));
            let raw_se = if map_diag { se[(k + l, m + q)] } else { se[(k * (raw.n + 1) + l, m * (raw.n + 1) + q)] };
            raw_se / (norms[k] * norms[l] * norms[m] * norms[q])
        })
    });
    let residual = (&gram - gram.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max);
    let scale = gram.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if !(residual <= 1e-6) || !scale.is_finite() {
        return Err(Error::QuadratureUnstable(residual));
    }
    let eig = nalgebra::SymmetricEigen::new(gram.clone());
    let lambda_max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if lambda_min < -1e-8 * scale.max(1.0) {
        return Err(Error::QuadratureUnstable(-lambda_min));
    }
    Ok(GramTruncation { degree: n, beta_src, beta_tgt, gram, lambda_max: lambda_max.max(0.0), quadrature: quad, std_errors })
}

/// Normalized Gram matrix of `{φ₁ᵏφ₂ˡ : 0 ≤ k, l ≤ N}` in `A²_{β_tgt}`,
/// where the source monomials are normalized in `A²_{β_src}`.
pub fn gram_truncation(map: &SymbolMap, beta_src: f64, beta_tgt: f64, n: usize, quad: &QuadratureSpec) -> Result<GramTruncation> {
    check_inputs(beta_src, beta_tgt, n)?;
    let raw = raw_gram(map, beta_tgt, n, quad)?;
    assemble(&raw, map.is_diagonal(), beta_src, beta_tgt, n, *quad)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthVerdict {
    Growth,
    Plateau,
    Inconclusive,
}

impl std::fmt::Display for GrowthVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GrowthVerdict::Growth => "growth",
            GrowthVerdict::Plateau => "plateau",
            GrowthVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthScan {
    pub rows: Vec<(usize, f64)>,
    pub verdict: GrowthVerdict,
}

pub const GROWTH_FACTOR: f64 = 2.0;
pub const PLATEAU_INCREMENT: f64 = 0.05;

pub fn classify_growth(values: &[f64]) -> GrowthVerdict {
    let (Some(&first), Some(&last)) = (values.first(), values.last()) else {
        return GrowthVerdict::Inconclusive;
    };
    if values.len() < 2 {
        return GrowthVerdict::Inconclusive;
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    if increasing && last > GROWTH_FACTOR * first {
        return GrowthVerdict::Growth;
    }
    let prev = values[values.len() - 2];
    if prev > 0.0 && (last - prev) / prev < PLATEAU_INCREMENT {
        return GrowthVerdict::Plateau;
    }
    GrowthVerdict::Inconclusive
}

/// `λ_max` for each `N` in `n_list`, sharing one quadrature pass.
pub fn norm_growth_scan(
    map: &SymbolMap,
    beta_src: f64,
    beta_tgt: f64,
    n_list: &[usize],
    quad: &QuadratureSpec,
) -> Result<GrowthScan> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("N list must be nonempty and ascending".into()));
    }
    let n_max = *n_list.last().expect("nonempty");
    check_inputs(beta_src, beta_tgt, n_list[0])?;
    let raw = raw_gram(map, beta_tgt, n_max, quad)?;
    let diag = map.is_diagonal();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        rows.push((n, assemble(&raw, diag, beta_src, beta_tgt, n, *quad)?.lambda_max));
    }
    let values: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(GrowthScan { verdict: classify_growth(&values), rows })
}
