use std::path::Path;
use std::process::Command;

use truncperc::harness::{emit_csv, run_experiment, Experiment, ExperimentConfig, Table};

fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
    items
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn config(experiment: Experiment, items: &[(&str, &str)]) -> ExperimentConfig {
    ExperimentConfig::resolve(Some(experiment), &pairs(items), &[]).unwrap()
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_truncperc"));
    cmd.env("RUST_LOG", "error");
    cmd
}

fn csv_at_threads(mut cfg: ExperimentConfig, threads: &str) -> Vec<u8> {
    cfg.set("threads", threads).unwrap();
    run_experiment(&cfg).unwrap().to_csv()
}

#[test]
fn thread_count_never_changes_output() {
    let cases = [
        config(
            Experiment::Survival,
            &[
                ("k", "1,3,6"),
                ("pseq", "powerlaw:1,0.2"),
                ("qseq", "powerlaw:1,0.2"),
                ("horizon", "10"),
                ("window", "8"),
                ("reps", "300"),
            ],
        ),
        config(
            Experiment::Contact,
            &[
                ("k", "1,4"),
                ("rate_scale", "0.4"),
                ("horizon", "3"),
                ("window", "4"),
                ("reps", "200"),
            ],
        ),
        config(
            Experiment::Star,
            &[
                ("eps", "0.6"),
                ("delta", "0.2"),
                ("pseq", "powerlaw:1,0.7"),
                ("k", "3,8"),
                ("horizon", "8"),
                ("reps", "200"),
            ],
        ),
        config(
            Experiment::SitePerc,
            &[
                ("gamma", "0.6:0.8:0.05"),
                ("horizon", "8,16,32"),
                ("reps", "2000"),
            ],
        ),
        config(
            Experiment::RedCluster,
            &[
                ("k", "3"),
                ("pseq", "powerlaw:1,0.5"),
                ("qseq", "powerlaw:1,0.5"),
                ("steps", "40"),
                ("reps", "300"),
            ],
        ),
        config(
            Experiment::HProb,
            &[
                ("k", "2,5"),
                ("window", "3,6"),
                ("pseq", "powerlaw:1,0.6"),
                ("reps", "2000"),
            ],
        ),
    ];
    for cfg in cases {
        let one = csv_at_threads(cfg.clone(), "1");
        assert_eq!(one, csv_at_threads(cfg.clone(), "8"), "{}", cfg.experiment);
        assert_eq!(one, csv_at_threads(cfg.clone(), "3"), "{}", cfg.experiment);
    }
}

#[test]
fn k_sweep_rows_share_the_seed_base() {
    let items = [
        ("pseq", "powerlaw:1,0.2"),
        ("qseq", "powerlaw:1,0.2"),
        ("horizon", "10"),
        ("window", "8"),
        ("reps", "300"),
    ];
    let sweep = run_experiment(&config(
        Experiment::Survival,
        &[items.as_slice(), &[("k", "1:9:4")]].concat(),
    ))
    .unwrap();
    assert_eq!(
        sweep.rows.iter().map(|r| r.k.as_str()).collect::<Vec<_>>(),
        ["1", "5", "9"]
    );
    for row in &sweep.rows {
        let single = run_experiment(&config(
            Experiment::Survival,
            &[items.as_slice(), &[("k", row.k.as_str())]].concat(),
        ))
        .unwrap();
        assert_eq!(single.rows.len(), 1);
        assert_eq!(single.rows[0].estimate, row.estimate);
        assert_eq!(single.rows[0].seed, row.seed);
    }
}

#[test]
fn gamma_csv_golden() {
    let cfg = config(
        Experiment::Gamma,
        &[("pseq", "powerlaw:1,0.5"), ("kmax", "3")],
    );
    let csv = String::from_utf8(run_experiment(&cfg).unwrap().to_csv()).unwrap();
    let h = cfg.hash();
    let expected = format!(
        "experiment,model,k,seed,reps,horizon,window,params,estimate,ci_lo,ci_hi,wall_seconds,config_hash\n\
         gamma,g,1,1,NA,NA,NA,\"pseq=powerlaw:1,0.5;qseq=harmonic;beta=1\",0.609375,NA,NA,NA,{h}\n\
         gamma,g,2,1,NA,NA,NA,\"pseq=powerlaw:1,0.5;qseq=harmonic;beta=1\",0.799489,NA,NA,NA,{h}\n\
         gamma,g,3,1,NA,NA,NA,\"pseq=powerlaw:1,0.5;qseq=harmonic;beta=1\",0.869606,NA,NA,NA,{h}\n"
    );
    assert_eq!(csv, expected);
}

#[test]
fn single_row_table_is_two_lines() {
    let cfg = config(
        Experiment::HProb,
        &[("k", "3"), ("window", "4"), ("reps", "100")],
    );
    let table = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    emit_csv(&table, Some(&path)).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
    emit_csv(&Table::default(), Some(&path)).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 1);
}

#[test]
fn unwritable_path_is_reported() {
    let table = Table::default();
    let err = emit_csv(&table, Some(Path::new("/nonexistent-dir/x.csv"))).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/x.csv"), "{err}");
}

#[test]
fn cli_writes_csv_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("g.conf");
    std::fs::write(
        &conf,
        "# sweep\nexperiment = gamma\nkmax = 9\npseq = powerlaw:1,0.5\n",
    )
    .unwrap();
    let out = dir.path().join("g.csv");
    let status = bin()
        .args(["run", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 10);

    let output = bin()
        .args(["gamma", "--kmax", "2", "--config"])
        .arg(&conf)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("pseq=powerlaw:1,0.5"));
}

#[test]
fn cli_errors_name_the_problem() {
    let fail = |args: &[&str]| {
        let out = bin().args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?} should fail");
        String::from_utf8(out.stderr).unwrap()
    };
    assert!(fail(&["survival", "--reps", "0"]).contains("`reps`"));
    assert!(fail(&["survival", "--pseq", "powerlaw:x"]).contains("`pseq`"));
    assert!(fail(&["star", "--eps", "1.5"]).contains("`eps`"));
    assert!(fail(&["siteperc", "--origin", "maybe"]).contains("`origin`"));
    assert!(fail(&["gamma", "--out", "/nonexistent-dir/x.csv"]).contains("/nonexistent-dir/x.csv"));
    assert!(fail(&["run"]).contains("`experiment`"));
    assert!(fail(&["gamma", "--config", "/nonexistent-dir/c.conf"]).contains("c.conf"));
}
