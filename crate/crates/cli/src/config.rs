//! Run configuration. Sources are layered as
//! flags > `VALF_*` environment variables > JSON config file > defaults.
//! Flag and environment parsing is done by clap; this module merges the
//! result over the file and the defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

pub const DEFAULT_BAND_LIMIT: usize = 16;
pub const DEFAULT_GRID: usize = 512;
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Effective configuration, echoed verbatim into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub band_limit: usize,
    pub grid: usize,
    pub seed: u64,
    /// Overrides the pinned tolerance of every coefficient-exact case.
    pub tol_exact: Option<f64>,
    /// Overrides the pinned tolerance of every quadrature or fit case.
    pub tol_quad: Option<f64>,
    pub suite: String,
    pub out: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            band_limit: DEFAULT_BAND_LIMIT,
            grid: DEFAULT_GRID,
            seed: DEFAULT_SEED,
            tol_exact: None,
            tol_quad: None,
            suite: "all".into(),
            out: None,
        }
    }
}

/// Config file contents; every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub band_limit: Option<usize>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub tol_exact: Option<f64>,
    pub tol_quad: Option<f64>,
    pub suite: Option<String>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))
    }
}

/// Flags shared by every subcommand, each with a `VALF_` fallback.
#[derive(Clone, Debug, Default, Args)]
pub struct ConfigArgs {
    /// JSON config file
    #[arg(long, env = "VALF_CONFIG", global = true)]
    pub config: Option<PathBuf>,
    /// Band limit of random trigonometric data
    #[arg(long, env = "VALF_BAND_LIMIT", global = true)]
    pub band_limit: Option<usize>,
    /// Angular grid for resampled Minkowski sums and plot data
    #[arg(long, env = "VALF_GRID", global = true)]
    pub grid: Option<usize>,
    /// Master seed; every case derives its own stream from it
    #[arg(long, env = "VALF_SEED", global = true)]
    pub seed: Option<u64>,
    /// Tolerance override for coefficient-exact cases
    #[arg(long, env = "VALF_TOL_EXACT", global = true)]
    pub tol_exact: Option<f64>,
    /// Tolerance override for quadrature and fit cases
    #[arg(long, env = "VALF_TOL_QUAD", global = true)]
    pub tol_quad: Option<f64>,
    /// Suite to run
    #[arg(long, env = "VALF_SUITE", global = true)]
    pub suite: Option<String>,
    /// Output file (stdout when absent)
    #[arg(long, env = "VALF_OUT", global = true)]
    pub out: Option<PathBuf>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<Config> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        resolve(self, &file)
    }
}

pub fn resolve(args: &ConfigArgs, file: &FileConfig) -> Result<Config> {
    let d = Config::default();
    let cfg = Config {
        band_limit: args.band_limit.or(file.band_limit).unwrap_or(d.band_limit),
        grid: args.grid.or(file.grid).unwrap_or(d.grid),
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
        tol_exact: args.tol_exact.or(file.tol_exact),
        tol_quad: args.tol_quad.or(file.tol_quad),
        suite: args.suite.clone().or_else(|| file.suite.clone()).unwrap_or(d.suite),
        out: args.out.clone().or_else(|| file.out.clone()),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.band_limit < 2 {
            bail!("band limit must be at least 2, got {}", self.band_limit);
        }
        if self.grid < 16 {
            bail!("grid must be at least 16, got {}", self.grid);
        }
        for (name, t) in [("tol-exact", self.tol_exact), ("tol-quad", self.tol_quad)] {
            if let Some(t) = t {
                if !(t.is_finite() && t >= 0.0) {
                    bail!("{name} must be a nonnegative number, got {t}");
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file: FileConfig = serde_json::from_str(r#"{"seed": 7, "grid": 256, "tol_quad": 1e-6}"#).unwrap();
        let args = ConfigArgs {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = resolve(&args, &file).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.grid, 256);
        assert_eq!(cfg.tol_quad, Some(1e-6));
        assert_eq!(cfg.band_limit, DEFAULT_BAND_LIMIT);
        assert_eq!(cfg.suite, "all");
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"sead": 7}"#).is_err());
        assert!(serde_json::from_str::<FileConfig>(r#"{"seed": "seven"}"#).is_err());
        let file = FileConfig {
            band_limit: Some(1),
            ..Default::default()
        };
        assert!(resolve(&ConfigArgs::default(), &file).is_err());
        let file = FileConfig {
            tol_exact: Some(-1.0),
            ..Default::default()
        };
        assert!(resolve(&ConfigArgs::default(), &file).is_err());
    }
}
