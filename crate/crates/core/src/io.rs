//! JSON file formats for polynomials, RIF descriptors and SOS certificates.
//!
//! Serialization is canonical: terms sorted by `(i, j)`, zero coefficients
//! omitted, negative zeros normalized, so a write-read-write cycle is
//! byte-identical.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly2;
use crate::rif::RationalInnerFunction;
use crate::stability::SOSCertificate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffEntry {
    pub i: usize,
    pub j: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyFile {
    pub bidegree: [usize; 2],
    pub coeffs: Vec<CoeffEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexEntry {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RifFile {
    pub lambda: ComplexEntry,
    pub monomial_powers: [u32; 2],
    pub bidegree: [usize; 2],
    pub coeffs: Vec<CoeffEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SosFile {
    #[serde(default)]
    pub sos_1: Vec<PolyFile>,
    #[serde(default)]
    pub sos_2: Vec<PolyFile>,
}

fn clean(x: f64) -> f64 {
    // maps -0.0 to 0.0
    x + 0.0
}

fn to_poly(bidegree: [usize; 2], coeffs: &[CoeffEntry]) -> Result<Poly2> {
    let [n, m] = bidegree;
    let mut p = Poly2::zeros(n, m);
    let mut seen = vec![false; (n + 1) * (m + 1)];
    let mut terms = Vec::with_capacity(coeffs.len());
    for (k, e) in coeffs.iter().enumerate() {
        if e.i > n || e.j > m {
            return Err(Error::InvalidInput(format!(
                "coeffs[{k}]: index ({}, {}) exceeds bidegree ({n}, {m})",
                e.i, e.j
            )));
        }
        if !(e.re.is_finite() && e.im.is_finite()) {
            return Err(Error::InvalidInput(format!("coeffs[{k}]: non-finite coefficient")));
        }
        let slot = e.i * (m + 1) + e.j;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(Error::InvalidInput(format!("coeffs[{k}]: duplicate entry for ({}, {})", e.i, e.j)));
        }
        terms.push((e.i, e.j, Complex64::new(e.re, e.im)));
    }
    if !terms.is_empty() {
        p = Poly2::from_terms(n, m, &terms)?;
    }
    Ok(p)
}

fn entries(p: &Poly2) -> Vec<CoeffEntry> {
    p.terms()
        .filter(|(_, _, c)| *c != Complex64::ZERO)
        .map(|(i, j, c)| CoeffEntry { i, j, re: clean(c.re), im: clean(c.im) })
        .collect()
}

impl PolyFile {
    pub fn from_poly(p: &Poly2) -> Self {
        let (n, m) = p.bidegree();
        Self { bidegree: [n, m], coeffs: entries(p) }
    }

    pub fn to_poly(&self) -> Result<Poly2> {
        to_poly(self.bidegree, &self.coeffs)
    }
}

impl RifFile {
    pub fn from_parts(lambda: Complex64, powers: (u32, u32), p: &Poly2) -> Self {
        let (n, m) = p.bidegree();
        Self {
            lambda: ComplexEntry { re: clean(lambda.re), im: clean(lambda.im) },
            monomial_powers: [powers.0, powers.1],
            bidegree: [n, m],
            coeffs: entries(p),
        }
    }

    pub fn from_rif(phi: &RationalInnerFunction) -> Self {
        Self::from_parts(phi.lambda(), phi.monomial_powers(), phi.denom())
    }

    pub fn denominator(&self) -> Result<Poly2> {
        to_poly(self.bidegree, &self.coeffs)
    }

    /// Validates and builds the RIF.
    pub fn to_rif(&self) -> Result<RationalInnerFunction> {
        let lambda = Complex64::new(self.lambda.re, self.lambda.im);
        let [m, n] = self.monomial_powers;
        RationalInnerFunction::new(lambda, (m, n), self.denominator()?)
    }
}

impl SosFile {
    pub fn from_certificate(cert: &SOSCertificate) -> Self {
        Self {
            sos_1: cert.sos1.iter().map(PolyFile::from_poly).collect(),
            sos_2: cert.sos2.iter().map(PolyFile::from_poly).collect(),
        }
    }

    pub fn to_certificate(&self) -> Result<SOSCertificate> {
        let conv = |list: &[PolyFile], name: &str| -> Result<Vec<Poly2>> {
            list.iter()
                .enumerate()
                .map(|(k, f)| f.to_poly().map_err(|e| Error::InvalidInput(format!("{name}[{k}]: {e}"))))
                .collect()
        };
        Ok(SOSCertificate { sos1: conv(&self.sos_1, "sos_1")?, sos2: conv(&self.sos_2, "sos_2")? })
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_poly(text: &str) -> Result<Poly2> {
    serde_json::from_str::<PolyFile>(text)?.to_poly()
}

pub fn write_poly(p: &Poly2) -> Result<String> {
    to_canonical_json(&PolyFile::from_poly(p))
}

pub fn parse_rif(text: &str) -> Result<RifFile> {
    let f: RifFile = serde_json::from_str(text)?;
    f.denominator()?;
    Ok(f)
}

pub fn parse_sos(text: &str) -> Result<SOSCertificate> {
    serde_json::from_str::<SosFile>(text)?.to_certificate()
}
