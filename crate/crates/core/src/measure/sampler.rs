//! Seeded, stratified uniform sampling of the bidisc.
//!
//! Each stratum is cut into fixed-size chunks; chunk `c` of stratum `s` gets
//! its own ChaCha stream, so results do not depend on the thread count.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{lens_area, SamplerSpec};
use crate::error::{Error, Result};
use crate::rif::uniform_disc;
use crate::C2;

pub(crate) const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug)]
enum Kind {
    Whole,
    Lens { center: C2, radius: f64 },
    Outside { center: C2, radius: f64 },
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct StratumPlan {
    /// Normalized measure of the stratum.
    pub area: f64,
    pub n: usize,
    kind: Kind,
}

pub(crate) fn plan(spec: &SamplerSpec) -> Result<Vec<StratumPlan>> {
    if spec.n_samples < 2 {
        return Err(Error::InvalidInput("sampler needs at least 2 samples".into()));
    }
    let Some(st) = &spec.stratum else {
        return Ok(vec![StratumPlan { area: 1.0, n: spec.n_samples, kind: Kind::Whole }]);
    };
    if !(st.fraction > 0.0 && st.fraction < 1.0) {
        return Err(Error::OutOfRange { name: "stratum fraction", value: st.fraction, range: "(0, 1)" });
    }
    if !(st.radius > 0.0) {
        return Err(Error::OutOfRange { name: "stratum radius", value: st.radius, range: "(0, inf)" });
    }
    let center = st.center.point();
    let area = lens_area(st.radius).powi(2);
    if area >= 1.0 - 1e-15 {
        return Ok(vec![StratumPlan { area: 1.0, n: spec.n_samples, kind: Kind::Whole }]);
    }
    let n_in = ((st.fraction * spec.n_samples as f64).round() as usize).clamp(2, spec.n_samples - 2);
    Ok(vec![
        StratumPlan { area, n: n_in, kind: Kind::Lens { center, radius: st.radius } },
        StratumPlan { area: 1.0 - area, n: spec.n_samples - n_in, kind: Kind::Outside { center, radius: st.radius } },
    ])
}

fn in_lens(z: Complex64, center: Complex64, radius: f64) -> bool {
    (z - center).norm() < radius
}

fn lens_point(rng: &mut ChaCha8Rng, center: Complex64, radius: f64) -> Complex64 {
    loop {
        let z = if radius >= 1.0 {
            uniform_disc(rng)
        } else {
            center + radius * uniform_disc(rng)
        };
        if z.norm() < 1.0 && in_lens(z, center, radius) {
            return z;
        }
    }
}

fn draw(kind: Kind, rng: &mut ChaCha8Rng) -> C2 {
    match kind {
        Kind::Whole => [uniform_disc(rng), uniform_disc(rng)],
        Kind::Lens { center, radius } => [lens_point(rng, center[0], radius), lens_point(rng, center[1], radius)],
        Kind::Outside { center, radius } => loop {
            let z = [uniform_disc(rng), uniform_disc(rng)];
            if !(in_lens(z[0], center[0], radius) && in_lens(z[1], center[1], radius)) {
                return z;
            }
        },
    }
}

/// Applies `f(stratum, points)` to every chunk; results come back in
/// (stratum, chunk) order.
pub(crate) fn map_chunks<T, F>(spec: &SamplerSpec, f: F) -> Result<Vec<(usize, T)>>
where
    T: Send,
    F: Fn(usize, &[C2]) -> T + Sync,
{
    let strata = plan(spec)?;
    let tasks: Vec<(usize, usize, usize)> = strata
        .iter()
        .enumerate()
        .flat_map(|(s, st)| (0..st.n.div_ceil(CHUNK)).map(move |c| (s, c, CHUNK.min(st.n - c * CHUNK))))
        .collect();
    Ok(tasks
        .into_par_iter()
        .map(|(s, c, len)| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(((s as u64) << 40) | c as u64);
            let kind = strata[s].kind;
            let points: Vec<C2> = (0..len).map(|_| draw(kind, &mut rng)).collect();
            (s, f(s, &points))
        })
        .collect())
}

/// Stratified mean of `g` under the normalized measure of `𝔻²`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Integral {
    pub value: f64,
    pub std_error: f64,
    pub hits: usize,
}

pub(crate) fn integrate<G>(spec: &SamplerSpec, g: G) -> Result<Integral>
where
    G: Fn(&C2) -> f64 + Sync,
{
    let strata = plan(spec)?;
    let chunks = map_chunks(spec, |_, points| {
        let (mut s1, mut s2, mut hits) = (0.0, 0.0, 0usize);
        for z in points {
            let y = g(z);
            if y != 0.0 {
                hits += 1;
                s1 += y;
                s2 += y * y;
            }
        }
        (s1, s2, hits)
    })?;
    let mut acc = vec![(0.0, 0.0); strata.len()];
    let mut hits = 0;
    for (s, (s1, s2, h)) in chunks {
        acc[s].0 += s1;
        acc[s].1 += s2;
        hits += h;
    }
    let (mut value, mut var) = (0.0, 0.0);
    for (st, (s1, s2)) in strata.iter().zip(acc) {
        let n = st.n as f64;
        let mean = s1 / n;
        let sample_var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
        value += st.area * mean;
        var += st.area * st.area * sample_var / n;
    }
    Ok(Integral { value, std_error: var.sqrt(), hits })
}
