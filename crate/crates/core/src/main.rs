use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use truncperc::harness::config::read_config_file;
use truncperc::harness::{emit_csv, run_experiment, Experiment, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(
    name = "truncperc",
    version,
    about = "Truncated long-range percolation and contact process experiments"
)]
struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    reps: Option<String>,
    #[arg(long, global = true)]
    threads: Option<String>,
    /// CSV output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Interval half-width in standard deviations.
    #[arg(long, global = true)]
    z: Option<String>,
    /// Fill the wall_seconds column (output is then no longer reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form bifurcation probability for k = 1..kmax.
    Gamma(GammaArgs),
    /// Survival of the truncated oriented cluster.
    Survival(SurvivalArgs),
    /// Red-cluster exploration and the domination check.
    Redcluster(RedArgs),
    /// Oriented site percolation survival scan.
    Siteperc(SiteArgs),
    /// Truncated long-range contact process survival.
    Contact(ContactArgs),
    /// Block-path survival on the mixed lattice.
    Star(StarArgs),
    /// Probability of the line-connection event on the mixed lattice.
    Hprob(HArgs),
    /// Run the experiment named by the config file.
    Run,
}

#[derive(Args, Debug)]
struct GammaArgs {
    #[arg(long)]
    pseq: Option<String>,
    #[arg(long)]
    qseq: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    kmax: Option<String>,
}

#[derive(Args, Debug)]
struct SurvivalArgs {
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    /// Truncation; a comma list or `a:b:step` sweeps.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    pseq: Option<String>,
    #[arg(long)]
    qseq: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    window: Option<String>,
}

#[derive(Args, Debug)]
struct RedArgs {
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    pseq: Option<String>,
    #[arg(long)]
    qseq: Option<String>,
    #[arg(long)]
    steps: Option<String>,
}

#[derive(Args, Debug)]
struct SiteArgs {
    /// Occupation parameters; a comma list or `a:b:step`.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    /// `always` or `site`.
    #[arg(long)]
    origin: Option<String>,
}

#[derive(Args, Debug)]
struct ContactArgs {
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    rates: Option<String>,
    #[arg(long)]
    rate_scale: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    window: Option<String>,
}

#[derive(Args, Debug)]
struct StarArgs {
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    pseq: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// Block width; chosen from eps and delta when absent.
    #[arg(long)]
    block: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
}

#[derive(Args, Debug)]
struct HArgs {
    #[arg(long)]
    pseq: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    window: Option<String>,
}

type Pairs = Vec<(&'static str, Option<String>)>;

impl Command {
    fn split(self) -> (Option<Experiment>, Pairs) {
        match self {
            Command::Gamma(a) => (
                Some(Experiment::Gamma),
                vec![
                    ("pseq", a.pseq),
                    ("qseq", a.qseq),
                    ("beta", a.beta),
                    ("kmax", a.kmax),
                ],
            ),
            Command::Survival(a) => (
                Some(Experiment::Survival),
                vec![
                    ("model", a.model),
                    ("dim", a.dim),
                    ("k", a.k),
                    ("pseq", a.pseq),
                    ("qseq", a.qseq),
                    ("horizon", a.horizon),
                    ("window", a.window),
                ],
            ),
            Command::Redcluster(a) => (
                Some(Experiment::RedCluster),
                vec![
                    ("k", a.k),
                    ("beta", a.beta),
                    ("pseq", a.pseq),
                    ("qseq", a.qseq),
                    ("steps", a.steps),
                ],
            ),
            Command::Siteperc(a) => (
                Some(Experiment::SitePerc),
                vec![
                    ("gamma", a.gamma),
                    ("horizon", a.horizon),
                    ("origin", a.origin),
                ],
            ),
            Command::Contact(a) => (
                Some(Experiment::Contact),
                vec![
                    ("dim", a.dim),
                    ("rates", a.rates),
                    ("rate_scale", a.rate_scale),
                    ("k", a.k),
                    ("delta", a.delta),
                    ("b", a.b),
                    ("horizon", a.horizon),
                    ("window", a.window),
                ],
            ),
            Command::Star(a) => (
                Some(Experiment::Star),
                vec![
                    ("eps", a.eps),
                    ("pseq", a.pseq),
                    ("k", a.k),
                    ("window", a.window),
                    ("delta", a.delta),
                    ("block", a.block),
                    ("horizon", a.horizon),
                ],
            ),
            Command::Hprob(a) => (
                Some(Experiment::HProb),
                vec![("pseq", a.pseq), ("k", a.k), ("window", a.window)],
            ),
            Command::Run => (None, Vec::new()),
        }
    }
}

fn run(cli: Cli) -> truncperc::Result<()> {
    let file = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => Vec::new(),
    };
    let (experiment, mut pairs) = cli.command.split();
    pairs.extend([
        ("seed", cli.seed),
        ("reps", cli.reps),
        ("threads", cli.threads),
        ("out", cli.out),
        ("z", cli.z),
        ("timing", cli.timing.then(|| "true".to_string())),
    ]);
    let overrides: Vec<(String, String)> = pairs
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect();
    let cfg = ExperimentConfig::resolve(experiment, &file, &overrides)?;
    log::info!(
        "resolved config (hash {}):\n{}",
        cfg.hash(),
        cfg.render().trim_end()
    );
    let table = run_experiment(&cfg)?;
    emit_csv(&table, cfg.out_path().as_deref())?;
    if let Some(path) = cfg.out_path() {
        log::info!("wrote {} rows to {}", table.rows.len(), path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
