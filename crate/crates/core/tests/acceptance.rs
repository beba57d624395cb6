//! Acceptance suite. Each criterion prints one PASS/FAIL line (written
//! straight to stdout so it survives output capture) and fails its test on
//! FAIL. Criteria run one at a time so the wall-clock limits are meaningful.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riflab::lojasiewicz::{check_biannulus_implication, fit_lojasiewicz_exponent};
use riflab::measure::{
    annulus_lower_bound, band_volume, band_volume_quadrature, carleson_scan, dyadic, fit_power_law, vbeta_box,
    vbeta_sublevel, CarlesonBox, SamplerSpec, ScanVerdict,
};
use riflab::operator::{gram_truncation, norm_growth_scan, GrowthVerdict, QuadratureSpec};
use riflab::stability::{
    bickel_ratio, certify_stable, estimate_bickel_constant, gap_form, verify_sos_certificate, SOSCertificate, Verdict,
};
use riflab::{dist2, Poly2, RationalInnerFunction, SymbolMap, TorusPoint, C2};

// Values frozen from the scripts in tests/oracles.
/// inf of the Bickel ratio for 3 − z₁ − z₂ (grid + polish; equals 3√5).
const BICKEL_STABLE_REF: f64 = 6.708203932499368;
/// λ_max for the negated favourite symbol, β = 0, N = 2, 4, 8, 12 at (32, 64) nodes.
const GRAM_NEG_FAV: [f64; 4] = [2.0519063, 3.6484977, 9.0379661, 17.2924786];
/// λ_max for the 3 − z₁ − z₂ symbol, β_src = 1, β_tgt = 6, every N.
const GRAM_STABLE: f64 = 4.0 / 49.0;
/// 10⁷-sample volumes of {|φ_neg − 1| < δ}, δ = 2⁻¹ … 2⁻⁶, β = 0.
const PULLBACK_NEG_FAV: [f64; 6] = [8.596e-2, 1.853e-2, 4.255e-3, 1.0155e-3, 2.451e-4, 6.25e-5];
const PULLBACK_ORACLE_SAMPLES: f64 = 1e7;
const PULLBACK_ORACLE_EXPONENT: f64 = 2.0833;

static SERIAL: Mutex<()> = Mutex::new(());

fn run(id: u32, name: &str, limit: Duration, body: impl FnOnce() -> Result<String, String>) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if elapsed <= limit => (true, d),
        Ok(d) => (false, format!("{d}; too slow ({:.1}s > {:.0}s)", elapsed.as_secs_f64(), limit.as_secs_f64())),
        Err(d) => (false, d),
    };
    let line = format!(
        "criterion {id:>2} [{}] {name}: {detail} ({:.2}s)\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(ok, "{}", line.trim_end());
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one() -> TorusPoint {
    TorusPoint::one()
}

fn uniform_disc(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.random::<f64>().sqrt(), rng.random_range(0.0..2.0 * PI))
}

fn stable_rif() -> RationalInnerFunction {
    RationalInnerFunction::new(Complex64::ONE, (0, 0), Poly2::affine_diagonal(3.0)).unwrap()
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn criterion_01_reflection() {
    run(1, "reflection fixture and involution", secs(1), || {
        let p = Poly2::affine_diagonal(2.0);
        let expected =
            Poly2::from_terms(1, 1, &[(1, 1, c(2.0, 0.0)), (1, 0, c(-1.0, 0.0)), (0, 1, c(-1.0, 0.0))]).unwrap();
        check(p.reflect() == expected, || format!("reflect gave {:?}", p.reflect()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 0..100 {
            let (n, m) = (rng.random_range(0..=6), rng.random_range(0..=6));
            let coeffs = (0..(n + 1) * (m + 1)).map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)));
            let q = Poly2::new((n, m), coeffs.collect()).unwrap();
            check(q.reflect().reflect() == q, || format!("involution failed on sample {k}"))?;
        }
        Ok("reflect(2-z1-z2) = 2z1z2-z1-z2; 100/100 involutions exact".into())
    });
}

#[test]
fn criterion_02_agler_certificate() {
    run(2, "Agler certificate for 2-z1-z2", secs(1), || {
        let p = Poly2::affine_diagonal(2.0);
        let cert = |s: f64| SOSCertificate {
            sos1: vec![Poly2::from_terms(0, 1, &[(0, 0, c(s, 0.0)), (0, 1, c(-s, 0.0))]).unwrap()],
            sos2: vec![Poly2::from_terms(1, 0, &[(0, 0, c(s, 0.0)), (1, 0, c(-s, 0.0))]).unwrap()],
        };
        let good = verify_sos_certificate(&p, &cert(2f64.sqrt()));
        check(good.valid && good.max_residual <= 1e-12, || format!("valid certificate rejected: {good:?}"))?;
        let bad = verify_sos_certificate(&p, &cert(1.0));
        let half = 0.5 * gap_form(&p).max_abs_coeff();
        check(!bad.valid && (bad.max_residual - half).abs() <= 1e-9 * half, || {
            format!("rescaled certificate: {bad:?}, expected residual {half}")
        })?;
        Ok(format!("residual {:.1e}; rescaled residual {} = half of {}", good.max_residual, bad.max_residual, 2.0 * half))
    });
}

#[test]
fn criterion_03_stability() {
    run(3, "closed-bidisc stability certification", secs(30), || {
        let stable = certify_stable(&Poly2::affine_diagonal(3.0), true, 100_000);
        check(stable.verdict == Verdict::CertifiedStableClosed, || format!("3-z1-z2: {stable:?}"))?;
        let zero = certify_stable(&Poly2::affine_diagonal(2.0), true, 100_000);
        let w = zero.witness.ok_or_else(|| format!("2-z1-z2: {zero:?}"))?;
        let d = dist2(&w, &[Complex64::ONE; 2]);
        check(zero.verdict == Verdict::ZeroFound && d <= 1e-6, || format!("2-z1-z2: {zero:?}, distance {d:.2e}"))?;
        Ok(format!(
            "3-z1-z2 certified in {} cells; 2-z1-z2 zero at distance {d:.1e} from (1,1)",
            stable.cells_checked
        ))
    });
}

#[test]
fn criterion_04_bickel_ratio() {
    run(4, "Bickel ratio", secs(120), || {
        let p = Poly2::affine_diagonal(2.0);
        let pt = p.reflect();
        for r in [0.9, 0.99, 0.999] {
            let got = bickel_ratio(&p, &pt, &[c(r, 0.0), c(r, 0.0)]);
            let want = 4.0 * (1.0 - r) / (1.0 + r);
            check((got - want).abs() <= 1e-9, || format!("diagonal ratio at r={r}: {got} vs {want}"))?;
        }
        let boundary = SamplerSpec::new(4, 1_000_000).with_stratum(one(), 0.5, 0.01);
        let singular = estimate_bickel_constant(&p, &boundary).map_err(|e| e.to_string())?;
        check(singular.inf_ratio < 0.01, || format!("2-z1-z2 inf ratio {}", singular.inf_ratio))?;

        let q = Poly2::affine_diagonal(3.0);
        let spec = |n| SamplerSpec::new(40, n).with_stratum(one(), 0.25, 0.25);
        let a = estimate_bickel_constant(&q, &spec(1_000_000)).map_err(|e| e.to_string())?.inf_ratio;
        let b = estimate_bickel_constant(&q, &spec(2_000_000)).map_err(|e| e.to_string())?.inf_ratio;
        check(a > 0.0 && (b - a).abs() <= 0.1 * a, || format!("3-z1-z2 unstable under doubling: {a} vs {b}"))?;
        check((BICKEL_STABLE_REF * (1.0 - 1e-9)..=BICKEL_STABLE_REF * 1.02).contains(&b), || {
            format!("3-z1-z2 inf ratio {b} vs oracle {BICKEL_STABLE_REF}")
        })?;
        Ok(format!(
            "2-z1-z2 inf {:.2e}; 3-z1-z2 inf {a:.5} / {b:.5} (oracle {BICKEL_STABLE_REF:.5})",
            singular.inf_ratio
        ))
    });
}

#[test]
fn criterion_05_lojasiewicz() {
    run(5, "Lojasiewicz exponent of 2-z1-z2 at (1,1)", secs(60), || {
        let fit = fit_lojasiewicz_exponent(&Poly2::affine_diagonal(2.0), &one(), &dyadic(3, 10), 2000, 5)
            .map_err(|e| e.to_string())?;
        check((1.9..=2.1).contains(&fit.q) && fit.fit.r_squared >= 0.98, || format!("{fit:?}"))?;
        Ok(format!("q = {:.4}, r^2 = {:.5}, c = {:.4}", fit.q, fit.fit.r_squared, fit.c))
    });
}

#[test]
fn criterion_06_box_scaling() {
    run(6, "Carleson box volume scaling", secs(120), || {
        let mut notes = Vec::new();
        for beta in [0.0, 2.0] {
            for (label, center) in [("(1,1)", one()), ("(i,-1)", TorusPoint::new(PI / 2.0, PI))] {
                let mut pts = Vec::new();
                for (k, d) in dyadic(2, 7).into_iter().enumerate() {
                    let spec = SamplerSpec::new(600 + k as u64, 100_000).with_stratum(center, 0.5, d);
                    let bx = CarlesonBox::square(center, d).map_err(|e| e.to_string())?;
                    pts.push((d, vbeta_box(beta, &bx, &spec).map_err(|e| e.to_string())?.value));
                }
                let fit = fit_power_law(&pts).map_err(|e| e.to_string())?;
                let want = 2.0 * (beta + 2.0);
                check((fit.exponent - want).abs() <= 0.4, || {
                    format!("beta {beta} at {label}: exponent {} vs {want}", fit.exponent)
                })?;
                notes.push(format!("b={beta} {label}: {:.3}", fit.exponent));
            }
        }
        Ok(notes.join(", "))
    });
}

#[test]
fn criterion_07_example_5_2() {
    run(7, "unboundedness evidence for the negated favourite symbol", secs(600), || {
        let map = SymbolMap::diagonal(RationalInnerFunction::favorite().negated());
        let deltas = dyadic(1, 6);
        let scan = carleson_scan(&map, 0.0, 0.0, one(), &deltas, &SamplerSpec::new(7, 2_000_000))
            .map_err(|e| e.to_string())?;
        let fit = scan.fit.ok_or("no power-law fit")?;
        check(fit.exponent + 3.0 * fit.exponent_std_error < 4.0, || format!("exponent {fit:?}"))?;
        check(scan.verdict == ScanVerdict::Fails, || format!("verdict {}", scan.verdict))?;
        check((fit.exponent - PULLBACK_ORACLE_EXPONENT).abs() <= 0.3, || {
            format!("exponent {} far from oracle {PULLBACK_ORACLE_EXPONENT}", fit.exponent)
        })?;
        for (row, want) in scan.rows.iter().zip(PULLBACK_NEG_FAV) {
            let oracle_se = (want * (1.0 - want) / PULLBACK_ORACLE_SAMPLES).sqrt();
            let tol = 3.0 * row.std_error.hypot(oracle_se);
            check((row.volume - want).abs() <= tol, || {
                format!("volume at delta {}: {} vs oracle {want} (tol {tol:.2e})", row.delta, row.volume)
            })?;
        }

        let quad = QuadratureSpec::TensorGaussPolar { n_radial: 32, n_angular: 64 };
        let growth = norm_growth_scan(&map, 0.0, 0.0, &[2, 4, 8, 12], &quad).map_err(|e| e.to_string())?;
        let values: Vec<f64> = growth.rows.iter().map(|r| r.1).collect();
        check(values.windows(2).all(|w| w[1] > w[0]), || format!("lambda_max not increasing: {values:?}"))?;
        check(values[3] / values[0] > 2.0 && growth.verdict == GrowthVerdict::Growth, || format!("{values:?}"))?;
        for (got, want) in values.iter().zip(GRAM_NEG_FAV) {
            check((got - want).abs() <= 1e-6 * want + 1e-7, || format!("lambda_max {got} vs oracle {want}"))?;
        }
        Ok(format!(
            "exponent {:.3} +- {:.3} (oracle {PULLBACK_ORACLE_EXPONENT}), {}; lambda_max {:.4?}",
            fit.exponent, fit.exponent_std_error, scan.verdict, values
        ))
    });
}

#[test]
fn criterion_08_example_5_3() {
    run(8, "boundedness evidence for the 3-z1-z2 symbol", secs(600), || {
        let phi = stable_rif();
        let p = phi.denom().clone();
        let bickel = estimate_bickel_constant(&p, &SamplerSpec::new(8, 1_000_000).with_stratum(one(), 0.25, 0.25))
            .map_err(|e| e.to_string())?;
        let big_m = p.max_modulus_torus(256);
        let mut rng = ChaCha8Rng::seed_from_u64(80);
        let mut violations = 0;
        for _ in 0..100_000 {
            let z: C2 = [uniform_disc(&mut rng), uniform_disc(&mut rng)];
            let zeta = Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
            let lhs = (phi.eval(&z).map_err(|e| e.to_string())? - zeta).norm();
            let w = (1.0 - z[0].norm_sqr()) * (1.0 - z[1].norm_sqr());
            if lhs < bickel.inf_ratio * w / (2.0 * big_m * big_m) - 1e-9 {
                violations += 1;
            }
        }
        check(violations == 0, || format!("{violations} violations"))?;

        let quad = QuadratureSpec::TensorGaussPolar { n_radial: 32, n_angular: 64 };
        let scan =
            norm_growth_scan(&SymbolMap::diagonal(phi), 1.0, 6.0, &[2, 4, 8, 12], &quad).map_err(|e| e.to_string())?;
        check(scan.verdict == GrowthVerdict::Plateau, || format!("verdict {} on {:?}", scan.verdict, scan.rows))?;
        for (_, l) in &scan.rows {
            check((l - GRAM_STABLE).abs() <= 1e-6, || format!("lambda_max {l} vs oracle {GRAM_STABLE}"))?;
        }
        Ok(format!(
            "C = {:.4}, M = {big_m:.6}, 0 violations in 1e5 points; lambda_max {:.6?}, plateau",
            bickel.inf_ratio,
            scan.rows.iter().map(|r| r.1).collect::<Vec<_>>()
        ))
    });
}

#[test]
fn criterion_09_example_5_1() {
    run(9, "pointwise lower bound for the favourite symbol", secs(120), || {
        let phi = RationalInnerFunction::favorite();
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        let zetas: Vec<Complex64> = (0..8).map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))).collect();
        let (mut violations, mut tested, mut worst) = (0usize, 0usize, f64::INFINITY);
        for _ in 0..100_000 {
            let z: C2 = [uniform_disc(&mut rng), uniform_disc(&mut rng)];
            let Ok(v) = phi.eval(&z) else { continue };
            let bound = 0.125 * (1.0 - z[0].norm()).powi(2) * (1.0 - z[1].norm()).powi(2);
            for zeta in &zetas {
                tested += 1;
                let lhs = (v - zeta).norm();
                worst = worst.min(lhs - bound);
                if lhs < bound - 1e-9 {
                    violations += 1;
                }
            }
        }
        check(violations == 0, || format!("{violations} violations out of {tested}"))?;
        Ok(format!("{tested} pairs, 0 violations, smallest slack {worst:.3e}"))
    });
}

#[test]
fn criterion_10_annulus_lower_bound() {
    run(10, "annulus lower bound and bi-annulus implication", secs(180), || {
        let neg = RationalInnerFunction::favorite().negated();
        let f = |z: &C2| neg.eval(z).map_or(f64::INFINITY, |w| (w - Complex64::ONE).norm());
        let (eps, q) = (0.01, 2.0);
        let mut notes = Vec::new();
        let mut failures = Vec::new();
        for (k, delta) in [0.6, 0.75, 0.9].into_iter().enumerate() {
            let bound = annulus_lower_bound(eps, delta, q).map_err(|e| e.to_string())?;
            let vol = vbeta_sublevel(0.0, f, delta, &SamplerSpec::new(100 + k as u64, 1_000_000))
                .map_err(|e| e.to_string())?;
            if vol.value - 3.0 * vol.std_error <= bound {
                failures.push(format!("delta {delta}: volume {} not above bound {bound:.3e}", vol.value));
            }
            let imp = check_biannulus_implication(&neg, &one(), Complex64::ONE, eps, delta, q, 1_000_000, 110 + k as u64)
                .map_err(|e| e.to_string())?;
            if imp.violations > 0 {
                failures.push(format!(
                    "delta {delta}: {}/{} bi-annulus points have |phi-1| >= delta (max {:.3})",
                    imp.violations, imp.tested, imp.max_deviation
                ));
            }
            notes.push(format!("delta {delta}: V={:.4} > {bound:.3e}", vol.value));
        }
        if failures.is_empty() {
            Ok(notes.join(", "))
        } else {
            Err(format!("{}; {}", notes.join(", "), failures.join("; ")))
        }
    });
}

#[test]
fn criterion_11_operator_sanity() {
    run(11, "identity and swap Gram matrices", secs(60), || {
        for (label, map) in [("identity", SymbolMap::identity()), ("swap", SymbolMap::swap())] {
            for beta in [0.0, 2.0] {
                let quad = QuadratureSpec::TensorGaussPolar { n_radial: 12, n_angular: 20 };
                let g = gram_truncation(&map, beta, beta, 8, &quad).map_err(|e| e.to_string())?;
                for k in 0..=8 {
                    for l in 0..=8 {
                        for m in 0..=8 {
                            for n in 0..=8 {
                                // the swap permutes the basis, so the images are orthonormal too
                                let want = (k == m && l == n) as u8 as f64;
                                let got = g.gram[(g.index(k, l), g.index(m, n))];
                                check((got - want).norm() <= 1e-8, || {
                                    format!("{label} beta {beta}: G[({k},{l}),({m},{n})] = {got}")
                                })?;
                            }
                        }
                    }
                }
                let scan = norm_growth_scan(&map, beta, beta, &[1, 2, 3, 4, 5, 6, 7, 8], &quad).map_err(|e| e.to_string())?;
                for (n, l) in &scan.rows {
                    check((l - 1.0).abs() <= 1e-8, || format!("{label} beta {beta} N {n}: lambda_max {l}"))?;
                }
            }
        }
        Ok("G = I for identity and swap within 1e-8, lambda_max = 1 for N <= 8, beta in {0, 2}".into())
    });
}

#[test]
fn criterion_12_measure_calibration() {
    run(12, "volume normalization and band-volume calibration", secs(120), || {
        let mut notes = Vec::new();
        for (k, beta) in [0.0, 1.0, 2.0, 6.0].into_iter().enumerate() {
            let v = vbeta_box(beta, &CarlesonBox::everything(), &SamplerSpec::new(120 + k as u64, 1_000_000))
                .map_err(|e| e.to_string())?;
            let want = 1.0 / ((beta + 1.0) * (beta + 1.0));
            check((v.value - want).abs() <= 3.0 * v.std_error + 1e-12, || format!("beta {beta}: {v:?} vs {want}"))?;
            notes.push(format!("V_{beta}={:.5}", v.value));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(121);
        let m = 0.5f64.sqrt();
        for k in 0..10 {
            let beta = rng.random_range(0.0..3.0);
            let s = 2f64.powf(-rng.random_range(1.0..8.0));
            let mc = band_volume(beta, s, m, &SamplerSpec::new(130 + k, 1_000_000)).map_err(|e| e.to_string())?;
            let quad = band_volume_quadrature(beta, s, m).map_err(|e| e.to_string())?;
            check((mc.value - quad).abs() <= 3.0 * mc.std_error, || {
                format!("band beta {beta:.3} s {s:.3e}: MC {} +- {} vs {quad}", mc.value, mc.std_error)
            })?;
        }
        Ok(format!("{}; 10/10 band volumes within 3 sigma", notes.join(" ")))
    });
}
