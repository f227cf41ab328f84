//! Flat `key = value` pipeline configuration.
//!
//! `#` starts a comment anywhere on a line. Relative paths in a file resolve
//! against that file's directory; relative paths given with `--set` resolve
//! against the working directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use defvec::{TableFormat, TrainConfig};

use crate::error::{CliError, CliResult};

/// Keys holding file or directory paths.
pub const PATH_KEYS: &[&str] = &[
    "base_vocab",
    "dictionary",
    "stopwords",
    "checkpoint",
    "table",
    "vocab_out",
    "skip_report",
    "coverage_report",
    "loss_csv",
    "similarity",
    "outlier",
    "categorization",
    "report_dir",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageSpec {
    Synthetic(u64),
    Directory(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    paths: BTreeMap<&'static str, PathBuf>,
    pub images: Option<ImageSpec>,
    pub table_format: TableFormat,
    /// Scale every table row to unit length before writing.
    pub normalize: bool,
    pub train: TrainConfig,
    pub eval_seed: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            paths: BTreeMap::new(),
            images: None,
            table_format: TableFormat::Text,
            normalize: false,
            train: TrainConfig::default(),
            eval_seed: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| invalid(format!("config key {key}: bad value {value:?}")))
}

impl PipelineConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut cfg = Self::default();
        cfg.merge_text(&text, base, path)?;
        Ok(cfg)
    }

    pub fn merge_text(&mut self, text: &str, base: &Path, origin: &Path) -> CliResult<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                invalid(format!("{}:{}: expected key = value", origin.display(), idx + 1))
            })?;
            self.set(key.trim(), value.trim(), base)
                .map_err(|e| invalid(format!("{}:{}: {}", origin.display(), idx + 1, e.message())))?;
        }
        Ok(())
    }

    /// Applies a `key=value` override from the command line.
    pub fn set_pair(&mut self, pair: &str) -> CliResult<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| invalid(format!("--set expects key=value, got {pair:?}")))?;
        self.set(key.trim(), value.trim(), Path::new(""))
    }

    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> CliResult<()> {
        if let Some(&k) = PATH_KEYS.iter().find(|&&k| k == key) {
            if value.is_empty() {
                return Err(invalid(format!("config key {key}: empty path")));
            }
            self.paths.insert(k, base.join(value));
            return Ok(());
        }
        match key {
            "images" => {
                self.images = Some(match value.strip_prefix("synthetic:") {
                    Some(seed) => ImageSpec::Synthetic(number(key, seed)?),
                    None if value.is_empty() => return Err(invalid("config key images: empty")),
                    None => ImageSpec::Directory(base.join(value)),
                })
            }
            "table_format" => self.table_format = value.parse()?,
            "normalize" => self.normalize = number(key, value)?,
            "epochs" => self.train.epochs = number(key, value)?,
            "lr0" => self.train.lr0 = number(key, value)?,
            "lr_halving_period" => self.train.lr_halving_period = number(key, value)?,
            "batch_size" => self.train.batch_size = number(key, value)?,
            "seed" => self.train.seed = number(key, value)?,
            "eval_seed" => self.eval_seed = Some(number(key, value)?),
            other => return Err(invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn path(&self, key: &str) -> Option<&Path> {
        self.paths.get(key).map(PathBuf::as_path)
    }

    pub fn require(&self, key: &str) -> CliResult<&Path> {
        self.path(key)
            .ok_or_else(|| invalid(format!("missing config key {key}")))
    }

    /// A required path that must already exist.
    pub fn input(&self, key: &str) -> CliResult<&Path> {
        let p = self.require(key)?;
        exists(key, p)?;
        Ok(p)
    }

    /// An optional path that must exist when given.
    pub fn optional_input(&self, key: &str) -> CliResult<Option<&Path>> {
        match self.path(key) {
            Some(p) => exists(key, p).map(|_| Some(p)),
            None => Ok(None),
        }
    }

    pub fn image_spec(&self) -> CliResult<&ImageSpec> {
        let spec = self
            .images
            .as_ref()
            .ok_or_else(|| invalid("missing config key images"))?;
        if let ImageSpec::Directory(dir) = spec {
            if !dir.is_dir() {
                return Err(invalid(format!("images: {} is not a directory", dir.display())));
            }
        }
        Ok(spec)
    }

    pub fn eval_seed(&self) -> u64 {
        self.eval_seed.unwrap_or(self.train.seed)
    }
}

fn exists(key: &str, path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(invalid(format!("{key}: {} does not exist", path.display())))
    }
}
