use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use riflab::io::{self, RifFile};
use riflab::measure::{carleson_scan, dyadic, CarlesonScan, SamplerSpec, ScanVerdict};
use riflab::operator::{norm_growth_scan, GrowthScan, GrowthVerdict, QuadratureSpec};
use riflab::stability::{certify_stable, estimate_bickel_constant, verify_sos_certificate, SOSCertificate, Verdict};
use riflab::{Poly2, RationalInnerFunction, SymbolMap, TorusPoint};

use crate::config::RunConfig;
use crate::report::{csv_with_footer, descriptor_hash, ensure_dir, metadata, num, out_path, write_json, write_text, CliResult};
use crate::Outcome;

/// Regular base points must stay this far from every singularity.
const REGULAR_CLEARANCE: f64 = 0.05;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_rif(path: &Path) -> CliResult<(RifFile, RationalInnerFunction)> {
    let text = read(path)?;
    let file = io::parse_rif(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let phi = file.to_rif().map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((file, phi))
}

fn symbol_hash(files: &[RifFile]) -> String {
    descriptor_hash(&serde_json::to_string(files).expect("rif files serialize"))
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn reflect(path: &Path, output: Option<&Path>) -> CliResult<Outcome> {
    let p = io::parse_poly(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    let text = io::write_poly(&p.reflect()).map_err(|e| e.to_string())?;
    match output {
        Some(o) => write_text(o, &text)?,
        None => print!("{text}"),
    }
    Ok(Outcome::Completed)
}

pub fn rif_info(path: &Path, cfg: &RunConfig) -> CliResult<Outcome> {
    let (file, phi) = load_rif(path)?;
    let stab = certify_stable(phi.denom(), true, cfg.stability.max_cells);
    let mut outcome = Outcome::Completed;
    let mut singular = Vec::new();
    let mut csv_rows = Vec::new();
    for tau in phi.singularities() {
        let [t1, t2] = tau.angles();
        match phi.nontangential_value(tau) {
            Ok(v) => {
                singular.push(json!({ "theta1": t1, "theta2": t2, "nontangential_value": complex_json(v) }));
                csv_rows.push(vec![num(t1), num(t2), num(v.re), num(v.im)]);
            }
            Err(e) => {
                outcome = Outcome::Inconclusive;
                singular.push(json!({ "theta1": t1, "theta2": t2, "nontangential_value": null, "error": e.to_string() }));
                csv_rows.push(vec![num(t1), num(t2), String::new(), String::new()]);
            }
        }
    }
    let hash = symbol_hash(std::slice::from_ref(&file));
    let body = json!({
        "symbol": file,
        "symbol_hash": hash,
        "inner_validation": "passed",
        "denominator_on_closed_bidisc": stab.verdict,
        "cells_checked": stab.cells_checked,
        "singularities": singular,
    });
    print!("{}", io::to_canonical_json(&body).map_err(|e| e.to_string())?);

    ensure_dir(&cfg.output.dir)?;
    if cfg.output.format.json() {
        write_json(&out_path(cfg, "rif_info.json"), &json!({ "metadata": metadata("rif-info", cfg), "report": body }))?;
    }
    if cfg.output.format.csv() {
        let footer = json!({ "symbol_hash": hash, "inner_validation": "passed" });
        let text = csv_with_footer(&["theta1", "theta2", "nt_re", "nt_im"], &csv_rows, &footer)?;
        write_text(&out_path(cfg, "rif_info.csv"), &text)?;
    }
    Ok(outcome)
}

/// One box family to scan: the symbol is evaluated near `source`, and the
/// boxes are centred at `target`.
struct Centre {
    label: String,
    source: TorusPoint,
    target: Result<TorusPoint, String>,
}

fn torus_value(map: &SymbolMap, tau: &TorusPoint) -> Result<TorusPoint, String> {
    let [a, b] = map.components();
    let v1 = a.nontangential_value(tau).map_err(|e| e.to_string())?;
    let v2 = b.nontangential_value(tau).map_err(|e| e.to_string())?;
    Ok(TorusPoint::from_point(&[v1, v2]))
}

fn scan_centres(map: &SymbolMap, count: usize, seed: u64) -> Vec<Centre> {
    let mut singular: Vec<TorusPoint> = Vec::new();
    for phi in map.components() {
        for tau in phi.singularities() {
            if !singular.contains(tau) {
                singular.push(*tau);
            }
        }
    }
    let mut out: Vec<Centre> = singular
        .iter()
        .map(|tau| {
            let [t1, t2] = tau.angles();
            Centre { label: format!("singular({t1:.6},{t2:.6})"), source: *tau, target: torus_value(map, tau) }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found = 0;
    for _ in 0..1000 * count.max(1) {
        if found == count {
            break;
        }
        let zeta = TorusPoint::new(rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
        let clear = map.components().iter().all(|phi| phi.distance_to_singularity(&zeta) > REGULAR_CLEARANCE);
        if !clear {
            continue;
        }
        let target = map.eval(&zeta.point()).map(|w| TorusPoint::from_point(&w)).map_err(|e| e.to_string());
        let [t1, t2] = zeta.angles();
        out.push(Centre { label: format!("regular({t1:.6},{t2:.6})"), source: zeta, target });
        found += 1;
    }
    out
}

fn sampler(cfg: &RunConfig, seed: u64, source: TorusPoint) -> SamplerSpec {
    let spec = SamplerSpec::new(seed, cfg.sampling.samples);
    if cfg.sampling.stratum_fraction > 0.0 {
        // the radius is reset to δ for each box
        spec.with_stratum(source, cfg.sampling.stratum_fraction, 1.0)
    } else {
        spec
    }
}

fn scan_csv(scan: &CarlesonScan, extra: Value) -> CliResult<String> {
    let rows: Vec<Vec<String>> = scan
        .rows
        .iter()
        .map(|r| vec![num(r.delta), num(r.volume), num(r.std_error), num(r.reference), num(r.ratio)])
        .collect();
    let footer = json!({
        "centre": extra,
        "beta_src": scan.beta_src,
        "beta_tgt": scan.beta_tgt,
        "target_exponent": scan.target_exponent,
        "fit": scan.fit,
        "verdict": scan.verdict.to_string(),
    });
    csv_with_footer(&["delta", "volume", "std_error", "reference", "ratio"], &rows, &footer)
}

struct ScanOutcome {
    summary: Value,
    verdict: Option<ScanVerdict>,
}

/// Runs one scan and writes its CSV; failures become an inconclusive entry.
#[allow(clippy::too_many_arguments)]
fn run_scan(
    cfg: &RunConfig,
    map: &SymbolMap,
    centre: &Centre,
    beta_src: f64,
    beta_tgt: f64,
    deltas: &[f64],
    seed: u64,
    csv_name: &str,
) -> CliResult<ScanOutcome> {
    let [s1, s2] = centre.source.angles();
    let mut summary = json!({ "label": centre.label, "source": [s1, s2], "seed": seed, "csv": csv_name });
    let scan = centre
        .target
        .clone()
        .and_then(|t| carleson_scan(map, beta_src, beta_tgt, t, deltas, &sampler(cfg, seed, centre.source)).map_err(|e| e.to_string()));
    match scan {
        Ok(scan) => {
            let [c1, c2] = scan.center.angles();
            summary["centre"] = json!([c1, c2]);
            summary["fit"] = json!(scan.fit);
            summary["verdict"] = json!(scan.verdict.to_string());
            if cfg.output.format.csv() {
                let extra = json!({ "label": centre.label, "source": [s1, s2], "target": [c1, c2], "seed": seed });
                write_text(&out_path(cfg, csv_name), &scan_csv(&scan, extra)?)?;
            }
            summary["rows"] = json!(scan.rows);
            Ok(ScanOutcome { summary, verdict: Some(scan.verdict) })
        }
        Err(e) => {
            summary["verdict"] = json!(ScanVerdict::Inconclusive.to_string());
            summary["error"] = json!(e);
            Ok(ScanOutcome { summary, verdict: None })
        }
    }
}

fn deltas(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    let [from, to] = cfg.carleson.dyadic_range;
    if from < 1 || to <= from {
        return Err(format!("carleson.dyadic_range must satisfy 1 <= from < to, got [{from}, {to}]"));
    }
    Ok(dyadic(from, to))
}

pub fn carleson(path: &Path, path2: Option<&Path>, cfg: &RunConfig) -> CliResult<Outcome> {
    let (file1, phi1) = load_rif(path)?;
    let (files, map) = match path2 {
        Some(p2) => {
            let (file2, phi2) = load_rif(p2)?;
            (vec![file1, file2], SymbolMap::new(phi1, phi2))
        }
        None => (vec![file1], SymbolMap::diagonal(phi1)),
    };
    let deltas = deltas(cfg)?;
    let (beta_src, beta_tgt) = (cfg.carleson.beta_src, cfg.carleson.beta_tgt);
    ensure_dir(&cfg.output.dir)?;

    let seed = cfg.sampling.seed;
    let centres = scan_centres(&map, cfg.carleson.regular_points, seed);
    let mut outcome = Outcome::Completed;
    let mut scans = Vec::new();
    for (k, centre) in centres.iter().enumerate() {
        let name = format!("carleson_{k:02}.csv");
        let res = run_scan(cfg, &map, centre, beta_src, beta_tgt, &deltas, seed.wrapping_add(k as u64 + 1), &name)?;
        let exponent = res.summary["fit"]["exponent"].as_f64();
        match res.verdict {
            Some(ScanVerdict::Inconclusive) | None => outcome = Outcome::Inconclusive,
            _ => {}
        }
        println!(
            "{:<36} exponent {:>8} target {:>5}  {}",
            centre.label,
            exponent.map_or("-".to_string(), |e| format!("{e:.3}")),
            2.0 * beta_src + 4.0,
            res.summary["verdict"].as_str().unwrap_or("inconclusive")
        );
        scans.push(res.summary);
    }
    if cfg.output.format.json() {
        let report = json!({
            "metadata": metadata("carleson", cfg),
            "symbols": files,
            "symbol_hash": symbol_hash(&files),
            "beta_src": beta_src,
            "beta_tgt": beta_tgt,
            "deltas": deltas,
            "scans": scans,
        });
        write_json(&out_path(cfg, "carleson.json"), &report)?;
    }
    write_text(&out_path(cfg, "config.toml"), &cfg.to_toml())?;
    Ok(outcome)
}

struct ExampleRow {
    id: &'static str,
    symbol: &'static str,
    expected: &'static str,
    observed: Vec<String>,
    consistent: bool,
    details: Value,
}

impl ExampleRow {
    fn new(id: &'static str, symbol: &'static str, expected: &'static str) -> Self {
        Self { id, symbol, expected, observed: Vec::new(), consistent: true, details: json!({}) }
    }

    fn note(&mut self, ok: bool, text: String) {
        self.consistent &= ok;
        self.observed.push(text);
    }

    fn status(&self) -> &'static str {
        if self.consistent {
            "consistent"
        } else {
            "inconclusive"
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `|p|² − |p̃|²` for `2 − z₁ − z₂` as a sum of `(1−|zᵢ|²)|qᵢ|²` terms.
fn favorite_certificate() -> SOSCertificate {
    let s = 2f64.sqrt();
    SOSCertificate {
        sos1: vec![Poly2::from_terms(0, 1, &[(0, 0, c(s, 0.0)), (0, 1, c(-s, 0.0))]).expect("valid terms")],
        sos2: vec![Poly2::from_terms(1, 0, &[(0, 0, c(s, 0.0)), (1, 0, c(-s, 0.0))]).expect("valid terms")],
    }
}

fn write_gram(cfg: &RunConfig, name: &str, scan: &GrowthScan, meta: Value) -> CliResult<()> {
    if !cfg.output.format.csv() {
        return Ok(());
    }
    let verdict = scan.verdict.to_string();
    let rows: Vec<Vec<String>> =
        scan.rows.iter().map(|(n, l)| vec![n.to_string(), num(*l), verdict.clone()]).collect();
    write_text(&out_path(cfg, name), &csv_with_footer(&["N", "lambda_max", "verdict"], &rows, &meta)?)
}

fn growth(
    cfg: &RunConfig,
    row: &mut ExampleRow,
    map: &SymbolMap,
    files: &[RifFile],
    betas: (f64, f64),
    want: GrowthVerdict,
    csv_name: &str,
) -> CliResult<()> {
    let quad = QuadratureSpec::TensorGaussPolar { n_radial: cfg.gram.n_radial, n_angular: cfg.gram.n_angular };
    let meta = json!({
        "beta_src": betas.0,
        "beta_tgt": betas.1,
        "quadrature": quad,
        "symbol_hash": symbol_hash(files),
    });
    match norm_growth_scan(map, betas.0, betas.1, &cfg.gram.n_list, &quad) {
        Ok(scan) => {
            let values: Vec<String> = scan.rows.iter().map(|(n, l)| format!("N={n}: {l:.6}")).collect();
            row.note(scan.verdict == want, format!("Gram {} ({})", scan.verdict, values.join(", ")));
            write_gram(cfg, csv_name, &scan, meta.clone())?;
            row.details["gram"] = json!({ "meta": meta, "scan": scan, "csv": csv_name });
        }
        Err(e) => {
            row.note(false, format!("Gram scan failed: {e}"));
            row.details["gram"] = json!({ "meta": meta, "error": e.to_string() });
        }
    }
    Ok(())
}

fn scans(
    cfg: &RunConfig,
    row: &mut ExampleRow,
    map: &SymbolMap,
    centres: &[Centre],
    betas: (f64, f64),
    want: ScanVerdict,
    prefix: &str,
) -> CliResult<()> {
    let deltas = deltas(cfg)?;
    let mut out = Vec::new();
    for (k, centre) in centres.iter().enumerate() {
        let name = format!("{prefix}_{k:02}.csv");
        let seed = cfg.sampling.seed.wrapping_add(k as u64 + 1);
        let res = run_scan(cfg, map, centre, betas.0, betas.1, &deltas, seed, &name)?;
        let exponent = res.summary["fit"]["exponent"].as_f64().map_or("-".to_string(), |e| format!("{e:.3}"));
        row.note(
            res.verdict == Some(want),
            format!("{}: exponent {exponent} vs {}, {}", centre.label, 2.0 * betas.0 + 4.0, res.summary["verdict"].as_str().unwrap_or("")),
        );
        out.push(res.summary);
    }
    row.details["carleson"] = json!({ "beta_src": betas.0, "beta_tgt": betas.1, "deltas": deltas, "scans": out });
    Ok(())
}

fn diagonal_centres(map: &SymbolMap, count: usize, seed: u64) -> Vec<Centre> {
    let tau = TorusPoint::one();
    let mut out = vec![Centre { label: "singular(1,1)".into(), source: tau, target: torus_value(map, &tau) }];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count + 1 {
        let t: f64 = rng.random_range(0.0..2.0 * PI);
        let zeta = TorusPoint::new(t, t);
        if zeta.angular_distance(&tau) <= REGULAR_CLEARANCE {
            continue;
        }
        let target = map.eval(&zeta.point()).map(|w| TorusPoint::from_point(&w)).map_err(|e| e.to_string());
        out.push(Centre { label: format!("diagonal({t:.6})"), source: zeta, target });
    }
    out
}

fn example_favorite(cfg: &RunConfig) -> CliResult<ExampleRow> {
    let mut row = ExampleRow::new("favorite", "(2z1z2 - z1 - z2)/(2 - z1 - z2)", "SOS certificate valid; pullback exponent >= 4");
    let phi = RationalInnerFunction::favorite();
    let check = verify_sos_certificate(phi.denom(), &favorite_certificate());
    row.note(check.valid, format!("SOS certificate residual {:.1e}", check.max_residual));
    let cert = io::SosFile::from_certificate(&favorite_certificate());
    row.details["sos"] = json!({ "certificate": cert, "valid": check.valid, "max_residual": check.max_residual });
    let map = SymbolMap::diagonal(phi);
    let centres = diagonal_centres(&map, 3, cfg.sampling.seed);
    scans(cfg, &mut row, &map, &centres, (0.0, 8.0), ScanVerdict::Passes, "favorite_carleson")?;
    Ok(row)
}

fn example_negated(cfg: &RunConfig) -> CliResult<ExampleRow> {
    let mut row = ExampleRow::new("negated-favorite", "-(2z1z2 - z1 - z2)/(2 - z1 - z2)", "Carleson FAILS (exponent near 2 < 4); Gram growth");
    let phi = RationalInnerFunction::favorite().negated();
    let files = [RifFile::from_rif(&phi)];
    let map = SymbolMap::diagonal(phi);
    let tau = TorusPoint::one();
    let centre = Centre { label: "singular(1,1)".into(), source: tau, target: torus_value(&map, &tau) };
    scans(cfg, &mut row, &map, &[centre], (0.0, 0.0), ScanVerdict::Fails, "negated_carleson")?;
    growth(cfg, &mut row, &map, &files, (0.0, 0.0), GrowthVerdict::Growth, "negated_gram.csv")?;
    Ok(row)
}

fn example_stable(cfg: &RunConfig) -> CliResult<ExampleRow> {
    let mut row = ExampleRow::new("stable", "(3z1z2 - z1 - z2)/(3 - z1 - z2)", "stable certified; plateau");
    let p = Poly2::affine_diagonal(3.0);
    let stab = certify_stable(&p, true, cfg.stability.max_cells);
    row.note(
        stab.verdict == Verdict::CertifiedStableClosed,
        format!("closed-bidisc stability {:?} in {} cells", stab.verdict, stab.cells_checked),
    );
    let spec = SamplerSpec::new(cfg.sampling.seed, cfg.stability.bickel_samples).with_stratum(
        TorusPoint::one(),
        cfg.sampling.stratum_fraction,
        cfg.stability.bickel_stratum_radius,
    );
    match estimate_bickel_constant(&p, &spec) {
        Ok(b) => {
            row.note(b.inf_ratio > 0.0, format!("Bickel constant {:.4}", b.inf_ratio));
            row.details["bickel"] = json!({ "inf_ratio": b.inf_ratio, "argmin": [complex_json(b.argmin[0]), complex_json(b.argmin[1])] });
        }
        Err(e) => row.note(false, format!("Bickel estimate failed: {e}")),
    }
    row.details["stability"] = json!({ "verdict": stab.verdict, "cells_checked": stab.cells_checked });
    match RationalInnerFunction::new(Complex64::ONE, (0, 0), p) {
        Ok(phi) => {
            let files = [RifFile::from_rif(&phi)];
            growth(cfg, &mut row, &SymbolMap::diagonal(phi), &files, (1.0, 6.0), GrowthVerdict::Plateau, "stable_gram.csv")?;
        }
        Err(e) => row.note(false, format!("symbol rejected: {e}")),
    }
    Ok(row)
}

pub fn examples(cfg: &RunConfig) -> CliResult<Outcome> {
    ensure_dir(&cfg.output.dir)?;
    let runners: [fn(&RunConfig) -> CliResult<ExampleRow>; 3] = [example_favorite, example_negated, example_stable];
    let mut rows = Vec::new();
    for run in runners {
        let row = run(cfg)?;
        println!("{:<18} {:<13} expected: {}", row.id, row.status(), row.expected);
        for line in &row.observed {
            println!("{:<32} {line}", "");
        }
        rows.push(row);
    }
    let outcome = if rows.iter().all(|r| r.consistent) { Outcome::Completed } else { Outcome::Inconclusive };

    if cfg.output.format.csv() {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| vec![r.id.to_string(), r.symbol.to_string(), r.expected.to_string(), r.observed.join("; "), r.status().to_string()])
            .collect();
        let footer = json!({ "seed": cfg.sampling.seed, "samples": cfg.sampling.samples });
        let text = csv_with_footer(&["example", "symbol", "expected", "observed", "status"], &table, &footer)?;
        write_text(&out_path(cfg, "examples.csv"), &text)?;
    }
    if cfg.output.format.json() {
        let body: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "example": r.id,
                    "symbol": r.symbol,
                    "expected": r.expected,
                    "observed": r.observed,
                    "status": r.status(),
                    "details": r.details,
                })
            })
            .collect();
        write_json(&out_path(cfg, "examples.json"), &json!({ "metadata": metadata("examples", cfg), "rows": body }))?;
    }
    write_text(&out_path(cfg, "config.toml"), &cfg.to_toml())?;
    Ok(outcome)
}
