//! Experiment orchestration: configuration, replica scheduling and CSV output.
//!
//! Replicas run on a rayon pool sized by `threads`. Per-replica results are
//! collected in replica order and folded by counting, so the thread count
//! never changes a byte of output.

pub mod config;
pub mod stats;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crate::contact::{
    estimate_contact_survival, f_probability, ContactParams, RateLaw, SkeletonParams,
};
use crate::oriented::{estimate_survival, ExplorationParams};
use crate::renorm::{domination_check, gamma_k, site_survival_scan, BifurcationParams, OriginRule};
use crate::starlat::{block_path_survival, estimate_h_prob, BlockParams, StarParams};
use crate::{Error, Result};

pub use config::{Experiment, ExperimentConfig};
use stats::EstimateWithCI;

pub const CSV_HEADER: [&str; 13] = [
    "experiment",
    "model",
    "k",
    "seed",
    "reps",
    "horizon",
    "window",
    "params",
    "estimate",
    "ci_lo",
    "ci_hi",
    "wall_seconds",
    "config_hash",
];

const NA: &str = "NA";

/// Formats `x` with 6 significant digits in fixed notation.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return NA.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// One output row; every field is already rendered.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub model: String,
    pub k: String,
    pub seed: String,
    pub reps: String,
    pub horizon: String,
    pub window: String,
    /// `key=value` pairs joined by `;`.
    pub params: String,
    pub estimate: String,
    pub ci_lo: String,
    pub ci_hi: String,
    pub wall_seconds: String,
    pub config_hash: String,
}

impl Row {
    fn fields(&self) -> [&str; 13] {
        [
            &self.experiment,
            &self.model,
            &self.k,
            &self.seed,
            &self.reps,
            &self.horizon,
            &self.window,
            &self.params,
            &self.estimate,
            &self.ci_lo,
            &self.ci_hi,
            &self.wall_seconds,
            &self.config_hash,
        ]
    }

    /// Value of `key` in the params column.
    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .split(';')
            .filter_map(|kv| kv.split_once('='))
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub rows: Vec<Row>,
}

impl Table {
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row.fields()).expect("writing to memory");
        }
        w.into_inner().expect("writing to memory")
    }

    /// Rows of one experiment kind.
    pub fn rows_of<'a>(&'a self, experiment: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.experiment == experiment)
    }
}

/// Writes the table to `path`, or to stdout when `path` is `None`.
pub fn emit_csv(table: &Table, path: Option<&Path>) -> Result<()> {
    let bytes = table.to_csv();
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

/// Fields shared by every row of a run.
struct RowBuilder {
    experiment: Experiment,
    seed: u64,
    timing: bool,
    hash: String,
}

struct RowSpec<'a> {
    model: &'a str,
    k: Option<u64>,
    reps: Option<u64>,
    horizon: Option<String>,
    window: Option<String>,
    params: Vec<(&'a str, String)>,
}

impl RowBuilder {
    fn row(&self, spec: RowSpec<'_>, estimate: f64, ci: Option<(f64, f64)>, seconds: f64) -> Row {
        let opt = |v: Option<String>| v.unwrap_or_else(|| NA.to_string());
        Row {
            experiment: self.experiment.name().to_string(),
            model: spec.model.to_string(),
            k: opt(spec.k.map(|k| k.to_string())),
            seed: self.seed.to_string(),
            reps: opt(spec.reps.map(|r| r.to_string())),
            horizon: opt(spec.horizon),
            window: opt(spec.window),
            params: spec
                .params
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";"),
            estimate: fmt_sig(estimate),
            ci_lo: ci.map_or_else(|| NA.to_string(), |c| fmt_sig(c.0)),
            ci_hi: ci.map_or_else(|| NA.to_string(), |c| fmt_sig(c.1)),
            wall_seconds: if self.timing {
                format!("{seconds:.3}")
            } else {
                NA.to_string()
            },
            config_hash: self.hash.clone(),
        }
    }

    fn estimate_row(&self, spec: RowSpec<'_>, e: &EstimateWithCI, seconds: f64) -> Row {
        self.row(spec, e.estimate, Some((e.lo, e.hi)), seconds)
    }
}

/// Validates every parameter, then runs the experiment on a pool of
/// `threads` workers.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Table> {
    let threads = cfg.u64("threads")? as usize;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::param("threads", e.to_string()))?;
    let rb = RowBuilder {
        experiment: cfg.experiment,
        seed: cfg.u64("seed")?,
        timing: cfg.bool("timing")?,
        hash: cfg.hash(),
    };
    let rows = match cfg.experiment {
        Experiment::Gamma => run_gamma(cfg, &rb)?,
        Experiment::Survival => pool.install(|| run_survival(cfg, &rb))?,
        Experiment::RedCluster => pool.install(|| run_redcluster(cfg, &rb))?,
        Experiment::SitePerc => pool.install(|| run_siteperc(cfg, &rb))?,
        Experiment::Contact => pool.install(|| run_contact(cfg, &rb))?,
        Experiment::Star => pool.install(|| run_star(cfg, &rb))?,
        Experiment::HProb => pool.install(|| run_hprob(cfg, &rb))?,
    };
    Ok(Table { rows })
}

fn nonempty<T>(key: &str, v: Vec<T>) -> Result<Vec<T>> {
    if v.is_empty() {
        Err(Error::param(key, "empty list"))
    } else {
        Ok(v)
    }
}

fn run_gamma(cfg: &ExperimentConfig, rb: &RowBuilder) -> Result<Vec<Row>> {
    let (pseq, qseq) = (cfg.sequence("pseq")?, cfg.sequence("qseq")?);
    let beta = cfg.i64("beta")?;
    let kmax = cfg.u64("kmax")?;
    let base = BifurcationParams::new(&pseq, &qseq, 0, beta)?;
    Ok((1..=kmax)
        .map(|k| {
            let spec = RowSpec {
                model: "g",
                k: Some(k),
                reps: None,
                horizon: None,
                window: None,
                params: vec![
                    ("pseq", pseq.to_string()),
                    ("qseq", qseq.to_string()),
                    ("beta", beta.to_string()),
                ],
            };
            rb.row(spec, gamma_k(&base.with_k(k)), None, 0.0)
        })
        .collect())
}

fn run_survival(cfg: &ExperimentConfig, rb: &RowBuilder) -> Result<Vec<Row>> {
    let model = cfg.raw("model")?;
    if model != "g" {
        return Err(Error::param(
            "model",
            format!("only `g` is supported, got `{model}`"),
        ));
    }
    let base = ExplorationParams::new(
        cfg.parse("dim")?,
        0,
        cfg.u64("horizon")?,
        cfg.i64("window")?,
        cfg.sequence("pseq")?,
        cfg.sequence("qseq")?,
    )?;
    let ks = nonempty("k", cfg.u64_list("k")?)?;
    let (seed, reps, z) = (rb.seed, cfg.u64("reps")?, cfg.f64("z")?);
    ks.iter()
        .map(|&k| {
            let t = Instant::now();
            let est = estimate_survival(&base.with_k(k), seed, reps, z)?;
            let spec = RowSpec {
                model: "g",
                k: Some(k),
                reps: Some(reps),
                horizon: Some(base.horizon.to_string()),
                window: Some(base.window.to_string()),
                params: vec![
                    ("dim", base.dim.to_string()),
                    ("pseq", base.pseq.to_string()),
                    ("qseq", base.qseq.to_string()),
                ],
            };
            Ok(rb.estimate_row(spec, &est, t.elapsed().as_secs_f64()))
        })
        .collect()
}

fn run_redcluster(cfg: &ExperimentConfig, rb: &RowBuilder) -> Result<Vec<Row>> {
    let (pseq, qseq) = (cfg.sequence("pseq")?, cfg.sequence("qseq")?);
    let beta = cfg.i64("beta")?;
    let base = BifurcationParams::new(&pseq, &qseq, 0, beta)?;
    let ks = nonempty("k", cfg.u64_list("k")?)?;
    let (reps, steps, z) = (cfg.u64("reps")?, cfg.u64("steps")?, cfg.f64("z")?);
    if steps == 0 {
        return Err(Error::param("steps", "must be at least 1"));
    }
    ks.iter()
        .map(|&k| {
            let t = Instant::now();
            let params = base.with_k(k);
            let rep = domination_check(&params.field(rb.seed), &params, reps, steps, z)?;
            if rep.truncated_runs > 0 {
                log::warn!(
                    "redcluster k={k}: {} of {reps} runs stopped at {steps} steps",
                    rep.truncated_runs
                );
            }
            if rep.violation {
                log::warn!("redcluster k={k}: red frequency below gamma_k - 3 sigma");
            }
            let spec = RowSpec {
                model: "g-red",
                k: Some(k),
                reps: Some(reps),
                horizon: None,
                window: None,
                params: vec![
                    ("pseq", pseq.to_string()),
                    ("qseq", qseq.to_string()),
                    ("beta", beta.to_string()),
                    ("steps", steps.to_string()),
                    ("gamma_k", fmt_sig(rep.gamma)),
                    ("sigma", fmt_sig(rep.sigma)),
                    ("examined", rep.estimate.trials.to_string()),
                    ("violation", rep.violation.to_string()),
                    ("truncated_runs", rep.truncated_runs.to_string()),
                    ("mean_cluster_size", fmt_sig(rep.mean_cluster_size)),
                ],
            };
            Ok(rb.estimate_row(spec, &rep.estimate, t.elapsed().as_secs_f64()))
        })
        .collect()
}

fn run_siteperc(cfg: &ExperimentConfig, rb: &RowBuilder) -> Result<Vec<Row>> {
    let gammas = nonempty("gamma", cfg.f64_list("gamma")?)?;
    if gammas.iter().any(|g| !(0.0..=1.0).contains(g)) {
        return Err(Error::param("gamma", "values must lie in [0, 1]"));
    }
    let horizons = nonempty("horizon", cfg.u64_list("horizon")?)?;
    let rule = match cfg.raw("origin")? {
        "always" => OriginRule::AlwaysOccupied,
        "site" => OriginRule::SiteVariable,
        other => {
            return Err(Error::param(
                "origin",
                format!("expected `always` or `site`, got `{other}`"),
            ))
        }
    };
    let (reps, z) = (cfg.u64("reps")?, cfg.f64("z")?);
    let t = Instant::now();
    let field = crate::bondfield::BondField::new(rb.seed, crate::bondfield::BondLaws::site(0.0));
    let scan = site_survival_scan(&field, &gammas, &horizons, reps, rule);
    let seconds = t.elapsed().as_secs_f64();
    let origin = cfg.raw("origin")?.to_string();
    let mut rows = Vec::new();
    for (g, &gamma) in gammas.iter().enumerate() {
        for (h, &horizon) in horizons.iter().enumerate() {
            let est = EstimateWithCI::from_counts(scan.survivors[g][h], reps, z);
            let spec = RowSpec {
                model: "site",
                k: None,
                reps: Some(reps),
                horizon: Some(horizon.to_string()),
                window: None,
                params: vec![("gamma", fmt_sig(gamma)), ("origin", origin.clone())],
            };
            rows.push(rb.estimate_row(spec, &est, seconds));
        }
    }
    if horizons.len() >= 3 {
        let crossing = scan.ratio_crossing();
        let label: Vec<String> = horizons[..3].iter().map(u64::to_string).collect();
        let spec = RowSpec {
            model: "site-crossing",
            k: None,
            reps: Some(reps),
            horizon: Some(label.join("/")),
            window: None,
            params: vec![("origin", origin)],
        };
        rows.push(rb.row(spec, crossing.unwrap_or(f64::NAN), None, seconds));
    }
    Ok(rows)
}

fn run_contact(cfg: &ExperimentConfig, rb: &RowBuilder) -> Result<Vec<Row>> {
    let params = ContactParams {
        dim: cfg.parse("dim")?,
        rates: cfg.sequence("rates")?,
        rate_scale: cfg.f64("rate_scale")?,
        window: cfg.i64("window")?,
        horizon: cfg.f64("horizon")?,
    };
    if params.horizon <= 0.0 {
        return Err(Error::param("horizon", "must be positive"));
    }
    params.space()?;
    let ks = nonempty("k", cfg.u64_list("k")?)?;
    let (delta, b) = (cfg.f64("delta")?, cfg.i64("b")?);
    let rates = RateLaw::new(&params.rates, 0, params.rate_scale)?;
    let skeleton: Vec<f64> = ks
        .iter()
        .map(|&k| {
            let rates = rates.with_k(k);
            Ok(f_probability(
                &SkeletonParams::new(delta, b, k, &rates)?,
                &rates,
            ))
        })
        .collect::<Result<_>>()?;
    let (reps, z) = (cfg.u64("reps")?, cfg.f64("z")?);

    let t = Instant::now();
    let sweep = estimate_contact_survival(&params, &ks, rb.seed, reps, z)?;
    let seconds = t.elapsed().as_secs_f64();
    if sweep.resampled > 0 {
        log::warn!(
            "contact: {} timelines resampled after simultaneous marks",
            sweep.resampled
        );
    }
    Ok(ks
        .iter()
        .zip(&sweep.estimates)
        .zip(&skeleton)
        .map(|((&k, est), &pf)| {
            let spec = RowSpec {
                model: "contact",
                k: Some(k),
                reps: Some(reps),
                horizon: Some(params.horizon.to_string()),
                window: Some(params.window.to_string()),
                params: vec![
                    ("dim", params.dim.to_string()),
                    ("rates", params.rates.to_string()),
                    ("rate_scale", params.rate_scale.to_string()),
                    ("delta", delta.to_string()),
                    ("b", b.to_string()),
                    ("f_probability", fmt_sig(pf)),
                    ("resampled", sweep.resampled.to_string()),
                ],
            };
            rb.estimate_row(spec, est, seconds)
        })
        .collect())
}

fn run_star(cfg: &ExperimentConfig, rb: &RowBuilder) -> Result<Vec<Row>> {
    let eps = cfg.f64("eps")?;
    let base = StarParams::new(eps, cfg.sequence("pseq")?, 0, cfg.i64("window")?)?;
    let delta = cfg.f64("delta")?;
    let block = match cfg.get("block") {
        Some(_) => {
            let width = cfg.i64("block")?;
            if width < 1 {
                return Err(Error::param("block", "must be at least 1"));
            }
            BlockParams { width, delta }
        }
        None => BlockParams::from_eps(eps, delta)?,
    };
    let ks = nonempty("k", cfg.u64_list("k")?)?;
    let (horizon, reps, z) = (cfg.u64("horizon")?, cfg.u64("reps")?, cfg.f64("z")?);
    ks.iter()
        .map(|&k| {
            let t = Instant::now();
            let est = block_path_survival(&block, &base.with_k(k), horizon, rb.seed, reps, z)?;
            let spec = RowSpec {
                model: "gstar",
                k: Some(k),
                reps: Some(reps),
                horizon: Some(horizon.to_string()),
                window: Some(base.window.to_string()),
                params: vec![
                    ("eps", eps.to_string()),
                    ("pseq", base.pseq.to_string()),
                    ("delta", delta.to_string()),
                    ("block", block.width.to_string()),
                ],
            };
            Ok(rb.estimate_row(spec, &est, t.elapsed().as_secs_f64()))
        })
        .collect()
}

fn run_hprob(cfg: &ExperimentConfig, rb: &RowBuilder) -> Result<Vec<Row>> {
    // H reads horizontal bonds only, so the vertical law is irrelevant
    let base = StarParams::new(1.0, cfg.sequence("pseq")?, 0, 1)?;
    let windows = nonempty("window", cfg.u64_list("window")?)?;
    if windows.contains(&0) {
        return Err(Error::param("window", "must be at least 1"));
    }
    let ks = nonempty("k", cfg.u64_list("k")?)?;
    let (reps, z) = (cfg.u64("reps")?, cfg.f64("z")?);
    let mut rows = Vec::new();
    for &w in &windows {
        for &k in &ks {
            let t = Instant::now();
            let params = StarParams {
                k,
                window: w as i64,
                ..base.clone()
            };
            let est = estimate_h_prob(&params, rb.seed, reps, z)?;
            let spec = RowSpec {
                model: "gstar-h",
                k: Some(k),
                reps: Some(reps),
                horizon: None,
                window: Some(w.to_string()),
                params: vec![("pseq", params.pseq.to_string())],
            };
            rows.push(rb.estimate_row(spec, &est, t.elapsed().as_secs_f64()));
        }
    }
    Ok(rows)
}
