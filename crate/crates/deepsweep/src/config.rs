//! Run configuration: one merged view of every knob the command-line tool
//! exposes. A run resolves its configuration from defaults, then an optional
//! JSON config file, then explicit flags (flags win), and echoes the fully
//! resolved result to a `.run.json` sidecar next to its primary output, so
//! any run can be reproduced from the sidecar alone.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Every resolvable knob. `None` means "not specified at this layer"; the
/// consuming subcommand fills in its own defaults and ignores fields it
/// does not use.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    // Dataset generation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_records: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_fft: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_max: Option<f64>,

    // Training.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chunk_bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patience: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,

    // Evaluation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,

    // Streaming.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jam_subcarrier: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_db_rel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sense_min_service_us: Option<u64>,

    // Benchmarking.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,

    // Shared.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    // Paths.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_weights: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history_out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion_out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats_out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench_out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary_out: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($base:expr, $over:expr, { $($field:ident),* $(,)? }) => {
        RunConfig {
            $($field: $over.$field.or($base.$field)),*
        }
    };
}

impl RunConfig {
    /// Load a config file. Unknown keys are rejected — a typo that silently
    /// falls back to a default would poison reproducibility.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let file = std::fs::File::open(path)?;
        serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|e| Error::format(format!("invalid config file {}: {e}", path.display())))
    }

    /// Layer `over` on top of `self`: any field `over` specifies wins.
    pub fn overlaid(self, over: RunConfig) -> RunConfig {
        overlay_fields!(self, over, {
            preset, n_records, n_fft, g, snr_min, snr_max, power_min, power_max,
            chunk_bins, lr, epochs, patience, batch_size, split,
            duration_s, source, jam_subcarrier, snr_db, power_db_rel, max_rate,
            sense_min_service_us, reps, seed,
            out, dataset, weights, baseline, out_weights, history_out,
            confusion_out, file, report_out, stats_out, bench_out, summary_out,
        })
    }

    /// Resolve the seed: explicit value, else the `DEEPSWEEP_SEED`
    /// environment value (passed in by the caller), else 0.
    pub fn resolve_seed(&self, env_seed: Option<&str>) -> Result<u64> {
        if let Some(seed) = self.seed {
            return Ok(seed);
        }
        match env_seed {
            Some(text) => text.trim().parse().map_err(|_| {
                Error::config(format!("DEEPSWEEP_SEED must be an unsigned integer, got `{text}`"))
            }),
            None => Ok(0),
        }
    }

    /// Where a run's resolved-config echo lives, next to its primary output.
    pub fn sidecar_path(primary_out: &Path) -> PathBuf {
        let mut name = primary_out
            .file_name()
            .map(|s| s.to_os_string())
            .unwrap_or_else(|| "run".into());
        name.push(".run.json");
        primary_out.with_file_name(name)
    }

    /// Echo this (fully resolved) configuration beside the primary output.
    /// Re-running with `--config <sidecar>` reproduces the run.
    pub fn write_sidecar(&self, primary_out: &Path) -> Result<PathBuf> {
        let path = Self::sidecar_path(primary_out);
        crate::fsio::replace_file(&path, |w| {
            serde_json::to_writer_pretty(w, self)
                .map_err(|e| Error::format(format!("could not write run sidecar: {e}")))
        })?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_prefers_the_overriding_layer_per_field() {
        let base = RunConfig {
            seed: Some(1),
            n_records: Some(100),
            preset: Some("chunk8".into()),
            ..RunConfig::default()
        };
        let over = RunConfig {
            seed: Some(2),
            out: Some(PathBuf::from("x.bin")),
            ..RunConfig::default()
        };
        let merged = base.overlaid(over);
        assert_eq!(merged.seed, Some(2), "override wins");
        assert_eq!(merged.n_records, Some(100), "base survives");
        assert_eq!(merged.preset.as_deref(), Some("chunk8"));
        assert_eq!(merged.out, Some(PathBuf::from("x.bin")));
    }

    #[test]
    fn seed_resolution_order_is_explicit_then_env_then_zero() {
        let explicit = RunConfig { seed: Some(7), ..RunConfig::default() };
        assert_eq!(explicit.resolve_seed(Some("9")).unwrap(), 7);
        let unset = RunConfig::default();
        assert_eq!(unset.resolve_seed(Some("9")).unwrap(), 9);
        assert_eq!(unset.resolve_seed(None).unwrap(), 0);
        assert!(matches!(
            unset.resolve_seed(Some("not-a-number")),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn config_files_round_trip_and_reject_unknown_keys() {
        let dir = std::env::temp_dir().join("deepsweep-config-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = RunConfig {
            preset: Some("fullband8".into()),
            n_records: Some(500),
            seed: Some(3),
            out: Some(PathBuf::from("d.bin")),
            ..RunConfig::default()
        };
        let side = cfg.write_sidecar(&dir.join("d.bin")).unwrap();
        assert_eq!(side, dir.join("d.bin.run.json"));
        let loaded = RunConfig::load(&side).unwrap();
        assert_eq!(loaded, cfg);

        let bad = dir.join("bad.json");
        std::fs::write(&bad, r#"{"n_recordz": 5}"#).unwrap();
        assert!(matches!(RunConfig::load(&bad), Err(Error::Format(_))));
        assert!(matches!(
            RunConfig::load(&dir.join("missing.json")),
            Err(Error::Io(_))
        ));
    }
}
