use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("riflab-out"), format: Format::Both }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub seed: u64,
    pub samples: usize,
    /// Share of samples placed in the stratum around the scanned point.
    pub stratum_fraction: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { seed: 1, samples: 1_000_000, stratum_fraction: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarlesonConfig {
    pub beta_src: f64,
    pub beta_tgt: f64,
    /// Scan `δ = 2⁻ᵏ` for `k` in this inclusive range.
    pub dyadic_range: [i32; 2],
    pub regular_points: usize,
}

impl Default for CarlesonConfig {
    fn default() -> Self {
        Self { beta_src: 0.0, beta_tgt: 0.0, dyadic_range: [1, 6], regular_points: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GramConfig {
    pub n_list: Vec<usize>,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl Default for GramConfig {
    fn default() -> Self {
        Self { n_list: vec![2, 4, 8, 12], n_radial: 32, n_angular: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub max_cells: usize,
    pub bickel_samples: usize,
    pub bickel_stratum_radius: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self { max_cells: 100_000, bickel_samples: 1_000_000, bickel_stratum_radius: 0.25 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output: OutputConfig,
    pub sampling: SamplingConfig,
    pub carleson: CarlesonConfig,
    pub gram: GramConfig,
    pub stability: StabilityConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
