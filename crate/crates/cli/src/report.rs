use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub type CliResult<T> = Result<T, String>;

/// Short content hash of a canonical symbol description.
pub fn descriptor_hash(text: &str) -> String {
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}

/// Metadata block shared by JSON reports. The timestamp is kept in the single
/// `generated_at` key so everything else is reproducible.
pub fn metadata(command: &str, cfg: &RunConfig) -> Value {
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.sampling.seed,
        "config": cfg,
        "generated_at": ts,
    })
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    s.push('\n');
    write_text(path, &s)
}

/// CSV table followed by one `# {json}` footer line.
pub fn csv_with_footer(header: &[&str], rows: &[Vec<String>], footer: &Value) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(r).map_err(|e| e.to_string())?;
    }
    let mut out = String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    out.push_str("# ");
    out.push_str(&serde_json::to_string(footer).map_err(|e| e.to_string())?);
    out.push('\n');
    Ok(out)
}

pub fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output.dir.join(name)
}

pub fn num(x: f64) -> String {
    format!("{x}")
}
