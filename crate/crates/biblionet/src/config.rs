//! Flat key-value run configuration with per-year sections.
//!
//! ```text
//! # global keys
//! seed = BULL SEISMOL SOC AM     # or: keywords = SEISMOL, EARTHQUAKE
//! env_threshold = 0.01
//! loading_threshold = 0.5
//! cosine_cutoff = 0.1
//! merge_uk = false
//! out = artifacts
//!
//! [year 2000]
//! corpus = corpora/corpus_2000.txt
//! ```
//!
//! Unknown keys are rejected by name. Corpus paths are resolved
//! relative to the config file's directory.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::factor_model::Rotation;
use crate::journal_citation::ThresholdSide;

#[derive(Debug, Clone, PartialEq)]
pub struct YearConfig {
    pub year: i32,
    pub corpus: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: Option<String>,
    pub keywords: Vec<String>,
    pub env_threshold: f64,
    pub loading_threshold: f64,
    pub cosine_cutoff: f64,
    pub merge_uk: bool,
    pub n_factors: Option<usize>,
    pub rotation: Rotation,
    pub threshold_side: ThresholdSide,
    pub out: PathBuf,
    pub years: Vec<YearConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            keywords: Vec::new(),
            env_threshold: 0.01,
            loading_threshold: 0.5,
            cosine_cutoff: 0.1,
            merge_uk: false,
            n_factors: None,
            rotation: Rotation::Varimax,
            threshold_side: ThresholdSide::Citing,
            out: PathBuf::from("artifacts"),
            years: Vec::new(),
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(format!("key {key}: expected a boolean, got {value:?}"))),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| bad(format!("key {key}: expected a number, got {value:?}")))
}

/// Parse a config file's text. `base` is the directory the config file
/// lives in; relative corpus paths resolve against it.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut current_year: Option<YearConfig> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(section) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            if let Some(y) = current_year.take() {
                cfg.years.push(y);
            }
            let year: i32 = section
                .trim()
                .strip_prefix("year")
                .map(str::trim)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("line {line_no}: unknown section {section:?}")))?;
            if cfg.years.iter().any(|y| y.year == year) {
                return Err(bad(format!("line {line_no}: duplicate year {year}")));
            }
            current_year = Some(YearConfig { year, corpus: PathBuf::new() });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| bad(format!("line {line_no}: expected key = value")))?;
        if let Some(year) = current_year.as_mut() {
            match key {
                "corpus" => year.corpus = base.join(value),
                _ => return Err(bad(format!("unknown key in year section: {key}"))),
            }
            continue;
        }
        match key {
            "seed" => cfg.seed = Some(crate::record_ingest::normalize_journal(value)),
            "keywords" => {
                cfg.keywords = value
                    .split(',')
                    .map(|k| k.trim().to_string())
                    .filter(|k| !k.is_empty())
                    .collect()
            }
            "env_threshold" => cfg.env_threshold = parse_f64(key, value)?,
            "loading_threshold" => cfg.loading_threshold = parse_f64(key, value)?,
            "cosine_cutoff" => cfg.cosine_cutoff = parse_f64(key, value)?,
            "merge_uk" => cfg.merge_uk = parse_bool(key, value)?,
            "n_factors" => {
                cfg.n_factors = Some(value.parse().map_err(|_| {
                    bad(format!("key n_factors: expected an integer, got {value:?}"))
                })?)
            }
            "rotation" => {
                cfg.rotation = match value {
                    "varimax" => Rotation::Varimax,
                    "none" => Rotation::None,
                    _ => return Err(bad("key rotation: expected varimax or none")),
                }
            }
            "threshold_side" => {
                cfg.threshold_side = match value {
                    "citing" => ThresholdSide::Citing,
                    "cited" => ThresholdSide::Cited,
                    "union" => ThresholdSide::Union,
                    _ => {
                        return Err(bad(
                            "key threshold_side: expected citing, cited, or union",
                        ))
                    }
                }
            }
            "out" => cfg.out = base.join(value),
            _ => return Err(bad(format!("unknown key: {key}"))),
        }
    }
    if let Some(y) = current_year.take() {
        cfg.years.push(y);
    }
    validate(&cfg)?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

fn validate(cfg: &RunConfig) -> Result<()> {
    if cfg.years.is_empty() {
        return Err(bad("config must define at least one [year N] section"));
    }
    for y in &cfg.years {
        if y.corpus.as_os_str().is_empty() {
            return Err(bad(format!("year {} has no corpus file", y.year)));
        }
    }
    if cfg.seed.is_none() && cfg.keywords.is_empty() {
        return Err(bad("config must set either seed or keywords"));
    }
    for (key, v) in [
        ("env_threshold", cfg.env_threshold),
        ("loading_threshold", cfg.loading_threshold),
        ("cosine_cutoff", cfg.cosine_cutoff),
    ] {
        if !(0.0..1.0).contains(&v) || (key == "env_threshold" && v == 0.0) {
            return Err(bad(format!("key {key}: {v} out of range")));
        }
    }
    Ok(())
}

/// Resolved-settings manifest; every threshold that shaped the run in
/// one reproducible key-value block.
pub fn manifest(cfg: &RunConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "seed = {}\n",
        cfg.seed.as_deref().unwrap_or("(from keywords)")
    ));
    out.push_str(&format!("keywords = {}\n", cfg.keywords.join(", ")));
    out.push_str(&format!("env_threshold = {}\n", cfg.env_threshold));
    out.push_str(&format!("loading_threshold = {}\n", cfg.loading_threshold));
    out.push_str(&format!("cosine_cutoff = {}\n", cfg.cosine_cutoff));
    out.push_str(&format!("merge_uk = {}\n", cfg.merge_uk));
    out.push_str(&format!(
        "n_factors = {}\n",
        cfg.n_factors.map_or("kaiser".to_string(), |k| k.to_string())
    ));
    out.push_str(&format!(
        "rotation = {}\n",
        match cfg.rotation {
            Rotation::Varimax => "varimax",
            Rotation::None => "none",
        }
    ));
    out.push_str(&format!(
        "threshold_side = {}\n",
        match cfg.threshold_side {
            ThresholdSide::Citing => "citing",
            ThresholdSide::Cited => "cited",
            ThresholdSide::Union => "union",
        }
    ));
    for y in &cfg.years {
        out.push_str(&format!("year {} corpus = {}\n", y.year, y.corpus.display()));
    }
    out
}
