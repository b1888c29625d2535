//! Run configuration: a flat key=value file merged with command-line flags
//! (flags win).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::{CliError, CliResult};

/// A parsed key=value config file. Blank lines and `#` comments are skipped.
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<ConfigFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "{}:{}: expected key=value, got {line:?}",
                    path.display(),
                    idx + 1
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                CliError::Usage(format!("config key {key}: cannot parse {v:?}"))
            }),
        }
    }
}

/// Fully resolved run parameters for `simulate` and `compare`.
pub struct RunSettings {
    pub code: String,
    pub noise: String,
    pub lambda: f64,
    /// A rate, or "calibrated:<kappa2>".
    pub kappa: String,
    pub policy: String,
    pub compare: Option<String>,
    pub signs: String,
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

pub struct Overrides {
    pub code: Option<String>,
    pub noise: Option<String>,
    pub lambda: Option<f64>,
    pub kappa: Option<String>,
    pub policy: Option<String>,
    pub compare: Option<String>,
    pub signs: Option<String>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub stride: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl RunSettings {
    pub fn merge(file: Option<&ConfigFile>, ov: Overrides) -> CliResult<RunSettings> {
        fn from_file<T: std::str::FromStr>(
            file: Option<&ConfigFile>,
            key: &str,
        ) -> CliResult<Option<T>> {
            match file {
                Some(f) => f.get_parsed(key),
                None => Ok(None),
            }
        }

        let settings = RunSettings {
            code: ov
                .code
                .or(from_file(file, "code")?)
                .unwrap_or_else(|| "three_qubit_bit_flip".into()),
            noise: ov
                .noise
                .or(from_file(file, "noise")?)
                .unwrap_or_else(|| "bit_flip".into()),
            lambda: ov.lambda.or(from_file(file, "lambda")?).unwrap_or(1.0),
            kappa: ov
                .kappa
                .or(from_file(file, "kappa")?)
                .unwrap_or_else(|| "100.0".into()),
            policy: ov
                .policy
                .or(from_file(file, "policy")?)
                .unwrap_or_else(|| "constant".into()),
            compare: ov.compare.or(from_file(file, "compare")?),
            signs: ov
                .signs
                .or(from_file(file, "signs")?)
                .unwrap_or_else(|| "+++".into()),
            t_end: ov.t_end.or(from_file(file, "t_end")?).unwrap_or(1.0),
            dt: ov.dt.or(from_file(file, "dt")?).unwrap_or(1e-3),
            stride: ov.stride.or(from_file(file, "stride")?).unwrap_or(10),
            seed: ov.seed.or(from_file(file, "seed")?).unwrap_or(0),
            output: ov
                .output
                .or(from_file::<PathBuf>(file, "output")?),
        };
        if settings.lambda < 0.0 {
            return Err(CliError::Usage(format!(
                "lambda must be nonnegative, got {}",
                settings.lambda
            )));
        }
        if settings.t_end <= 0.0 || settings.dt <= 0.0 {
            return Err(CliError::Usage(format!(
                "need t_end > 0 and dt > 0, got t_end={}, dt={}",
                settings.t_end, settings.dt
            )));
        }
        Ok(settings)
    }
}
