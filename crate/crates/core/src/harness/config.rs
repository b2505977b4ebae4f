//! Flat `key = value` experiment configuration.
//!
//! Values are resolved in three layers: built-in defaults, then a config
//! file, then command-line flags. Lists are comma separated, and numeric list
//! items may be inclusive ranges `start:stop:step`. Sequence specs are taken
//! verbatim, so their own commas are not list separators.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::sequences::SequenceSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Gamma,
    Survival,
    RedCluster,
    SitePerc,
    Contact,
    Star,
    HProb,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Gamma,
        Experiment::Survival,
        Experiment::RedCluster,
        Experiment::SitePerc,
        Experiment::Contact,
        Experiment::Star,
        Experiment::HProb,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Gamma => "gamma",
            Experiment::Survival => "survival",
            Experiment::RedCluster => "redcluster",
            Experiment::SitePerc => "siteperc",
            Experiment::Contact => "contact",
            Experiment::Star => "star",
            Experiment::HProb => "hprob",
        }
    }

    fn defaults(&self) -> &'static [(&'static str, &'static str)] {
        match self {
            Experiment::Gamma => &[
                ("pseq", "harmonic"),
                ("qseq", "harmonic"),
                ("beta", "1"),
                ("kmax", "50"),
            ],
            Experiment::Survival => &[
                ("model", "g"),
                ("dim", "2"),
                ("k", "10"),
                ("pseq", "harmonic"),
                ("qseq", "harmonic"),
                ("horizon", "50"),
                ("window", "50"),
            ],
            Experiment::RedCluster => &[
                ("k", "10"),
                ("beta", "1"),
                ("pseq", "harmonic"),
                ("qseq", "harmonic"),
                ("steps", "100000"),
            ],
            Experiment::SitePerc => &[("gamma", "0.7"), ("horizon", "64"), ("origin", "always")],
            Experiment::Contact => &[
                ("dim", "2"),
                ("rates", "harmonic"),
                ("rate_scale", "1"),
                ("k", "5"),
                ("delta", "0.25"),
                ("b", "1"),
                ("horizon", "5"),
                ("window", "10"),
            ],
            Experiment::Star => &[
                ("eps", "0.3"),
                ("pseq", "harmonic"),
                ("k", "10"),
                ("window", "10"),
                ("delta", "0.1"),
                ("horizon", "20"),
            ],
            Experiment::HProb => &[("pseq", "harmonic"), ("k", "10"), ("window", "10")],
        }
    }

    /// Keys accepted besides the defaults and the common ones.
    fn optional_keys(&self) -> &'static [&'static str] {
        match self {
            Experiment::Star => &["block"],
            _ => &[],
        }
    }
}

const COMMON_DEFAULTS: [(&str, &str); 5] = [
    ("seed", "1"),
    ("reps", "1000"),
    ("threads", "1"),
    ("z", "1.96"),
    ("timing", "false"),
];

/// Keys that never change any output byte and are left out of the hash.
const UNHASHED: [&str; 3] = ["threads", "out", "timing"];

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::param("experiment", format!("unknown experiment `{s}`")))
    }
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    values: BTreeMap<String, String>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (j, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigSyntax {
            path: path.to_path_buf(),
            line: j + 1,
            reason: format!("expected `key = value`, got `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::ConfigSyntax {
                path: path.to_path_buf(),
                line: j + 1,
                reason: "empty key or value".into(),
            });
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_text(&text, path)
}

impl ExperimentConfig {
    /// Resolves defaults, then `file` pairs, then `overrides`. The experiment
    /// comes from `experiment` or else from an `experiment` key.
    pub fn resolve(
        experiment: Option<Experiment>,
        file: &[(String, String)],
        overrides: &[(String, String)],
    ) -> Result<Self> {
        let named = file
            .iter()
            .chain(overrides)
            .filter(|(k, _)| k == "experiment")
            .map(|(_, v)| v.parse::<Experiment>())
            .next_back()
            .transpose()?;
        let experiment = match (experiment, named) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::param(
                    "experiment",
                    format!("config file is for `{b}` but the command is `{a}`"),
                ))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::param("experiment", "no experiment given")),
        };

        let mut values: BTreeMap<String, String> = COMMON_DEFAULTS
            .iter()
            .chain(experiment.defaults())
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let allowed = |key: &str| key == "out" || values_allowed(experiment, key);
        for (key, value) in file.iter().chain(overrides) {
            if key == "experiment" {
                continue;
            }
            if !allowed(key) {
                return Err(Error::param(
                    key.clone(),
                    format!("not a setting of `{experiment}`"),
                ));
            }
            values.insert(key.clone(), value.clone());
        }
        let cfg = ExperimentConfig { experiment, values };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::resolve(None, &read_config_file(path)?, &[])
    }

    fn validate(&self) -> Result<()> {
        self.u64("seed")?;
        if self.u64("reps")? == 0 {
            return Err(Error::param("reps", "must be at least 1"));
        }
        if self.u64("threads")? == 0 {
            return Err(Error::param("threads", "must be at least 1"));
        }
        if self.f64("z")? <= 0.0 {
            return Err(Error::param("z", "must be positive"));
        }
        self.bool("timing")?;
        for key in ["pseq", "qseq", "rates"] {
            if self.values.contains_key(key) {
                self.sequence(key)?;
            }
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::param(key, "missing"))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|e: T::Err| Error::param(key, format!("cannot parse `{raw}`: {e}")))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.parse(key)
    }

    pub fn i64(&self, key: &str) -> Result<i64> {
        self.parse(key)
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v: f64 = self.parse(key)?;
        if !v.is_finite() {
            return Err(Error::param(key, "must be finite"));
        }
        Ok(v)
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        self.parse(key)
    }

    pub fn sequence(&self, key: &str) -> Result<SequenceSpec> {
        self.raw(key)?
            .parse()
            .map_err(|e: Error| Error::param(key, e.to_string()))
    }

    /// Comma list of integers or inclusive `start:stop:step` ranges.
    pub fn u64_list(&self, key: &str) -> Result<Vec<u64>> {
        let raw = self.raw(key)?;
        let bad = |why: &str| Error::param(key, format!("`{raw}`: {why}"));
        let mut out = Vec::new();
        for item in raw.split(',').map(str::trim) {
            let parts: Vec<&str> = item.split(':').collect();
            let num = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| bad(&format!("`{s}` is not an integer")))
            };
            match parts.as_slice() {
                [v] => out.push(num(v)?),
                [a, b, step] => {
                    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                    if step == 0 || a > b {
                        return Err(bad("range needs start <= stop and step > 0"));
                    }
                    out.extend((a..=b).step_by(step as usize));
                }
                _ => return Err(bad(&format!("bad item `{item}`"))),
            }
        }
        Ok(out)
    }

    /// Comma list of reals or inclusive `start:stop:step` ranges; range points
    /// are `start + j * step`, rounded to 12 decimals.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw(key)?;
        let bad = |why: &str| Error::param(key, format!("`{raw}`: {why}"));
        let mut out = Vec::new();
        for item in raw.split(',').map(str::trim) {
            let parts: Vec<&str> = item.split(':').collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(&format!("`{s}` is not a number")))
            };
            match parts.as_slice() {
                [v] => out.push(num(v)?),
                [a, b, step] => {
                    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                    if step <= 0.0 || a > b {
                        return Err(bad("range needs start <= stop and step > 0"));
                    }
                    let count = ((b - a) / step + 1e-9).floor() as u64;
                    out.extend((0..=count).map(|j| ((a + j as f64 * step) * 1e12).round() / 1e12));
                }
                _ => return Err(bad(&format!("bad item `{item}`"))),
            }
        }
        Ok(out)
    }

    pub fn out_path(&self) -> Option<PathBuf> {
        self.get("out").map(PathBuf::from)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if key != "out" && !values_allowed(self.experiment, key) {
            return Err(Error::param(
                key,
                format!("not a setting of `{}`", self.experiment),
            ));
        }
        self.values.insert(key.to_string(), value.to_string());
        self.validate()
    }

    /// `key = value` lines, sorted by key.
    pub fn render(&self) -> String {
        let mut s = format!("experiment = {}\n", self.experiment);
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    /// First 16 hex digits of the SHA-256 of the resolved settings that can
    /// affect results.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("experiment={}\n", self.experiment));
        for (k, v) in self
            .values
            .iter()
            .filter(|(k, _)| !UNHASHED.contains(&k.as_str()))
        {
            hasher.update(format!("{k}={v}\n"));
        }
        hasher
            .finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn values_allowed(experiment: Experiment, key: &str) -> bool {
    COMMON_DEFAULTS.iter().any(|(k, _)| *k == key)
        || experiment.defaults().iter().any(|(k, _)| *k == key)
        || experiment.optional_keys().contains(&key)
}
