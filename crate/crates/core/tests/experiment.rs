//! Experiment pipeline: artifacts, determinism, resume, CSV round trips and sweeps.

use std::collections::BTreeMap;
use std::path::Path;

use pdl::experiment::{
    check_artifacts, emit_plot_data, load_manifest, read_trajectory, run_config, ExperimentConfig, SweepGrid,
};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn monotone_run_plot_data() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(
        r#"
        name = "mono"
        seed = 5
        [game]
        source = "random_identical"
        m = 4
        [dynamics]
        regularizer = "tsallis:q=0.5"
        eta = 0.25
        horizon = 400
        record_every = 1
        "#,
    );
    let res = run_config(&c, Path::new("."), tmp.path(), None).unwrap();
    assert_eq!(res.exit_code, 0, "{:?}", res.reports);
    assert!(res.reports.iter().any(|r| r.name == "potential_monotone" && r.passed));
    emit_plot_data(tmp.path()).unwrap();

    let (_, rows) = read_csv(&tmp.path().join("plot/potential.csv"));
    let phi: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(phi.len(), 400);
    assert!(phi.windows(2).all(|w| w[1] >= w[0] - 1e-8));

    let (header, rows) = read_csv(&tmp.path().join("plot/probabilities.csv"));
    assert_eq!(header, ["round", "player", "action", "probability"]);
    let mut sums: BTreeMap<(String, String), f64> = BTreeMap::new();
    for r in &rows {
        *sums.entry((r[0].clone(), r[1].clone())).or_default() += r[3].parse::<f64>().unwrap();
    }
    assert_eq!(sums.len(), 800);
    assert!(sums.values().all(|s| (s - 1.0).abs() <= 1e-9));
}

#[test]
fn csv_floats_round_trip_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config("name = \"rt\"\n[game]\nsource = \"spiral\"\nm = 4\nr = 1\n[dynamics]\nalpha = 0.5\nhorizon = 64\nrecord_every = 1\n");
    run_config(&c, Path::new("."), tmp.path(), None).unwrap();
    let recs = read_trajectory(&tmp.path().join("trajectory.jsonl")).unwrap();
    let (_, rows) = read_csv(&tmp.path().join("gaps.csv"));
    assert_eq!(rows.len(), recs.len() * 2 * 4);
    for row in rows {
        let (t, p, a): (usize, usize, usize) = (row[0].parse().unwrap(), row[1].parse().unwrap(), row[2].parse().unwrap());
        let g: f64 = row[3].parse().unwrap();
        assert_eq!(g.to_bits(), recs[t - 1].gaps[p - 1][a - 1].to_bits());
    }
}

#[test]
fn padded_periods_file_has_one_row_per_period() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(
        "name = \"p\"\n[game]\nsource = \"padded\"\nm = 5\ngamma = 200.0\n[dynamics]\nalpha = 0.0\nhorizon = 100000\n[analysis]\nchecks = [\"periods\"]\nstop_after_final_period = 10\n",
    );
    let res = run_config(&c, Path::new("."), tmp.path(), None).unwrap();
    assert_eq!(res.outcome.max_period, Some(9));
    emit_plot_data(tmp.path()).unwrap();
    let (header, rows) = read_csv(&tmp.path().join("plot/periods.csv"));
    assert_eq!(header, ["k", "t_start", "t_end", "length", "censored"]);
    let ks: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ks, (3..=9).collect::<Vec<_>>());
    assert_eq!(rows.last().unwrap()[4], "true");
    // Stored records carry their period.
    let recs = read_trajectory(&tmp.path().join("trajectory.jsonl")).unwrap();
    assert_eq!(recs[0].period, Some(3));
    assert!(recs.iter().all(|r| r.period.is_some()));
}

#[test]
fn snake_and_lazy_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(
        "name = \"s\"\n[game]\nsource = \"snake\"\nn = 3\n[dynamics]\nalgorithm = \"fictitious_play\"\nhorizon = 1000\n[analysis]\nstop_at_path_end = true\n",
    );
    let res = run_config(&c, Path::new("."), &tmp.path().join("snake"), None).unwrap();
    assert_eq!(res.exit_code, 0, "{:?}", res.reports);
    assert_eq!(res.outcome.snake_position, Some(5));
    assert!(tmp.path().join("snake/dwell.csv").exists());

    let c = config(
        "name = \"l\"\n[game]\nsource = \"inline\"\nmatrix = [[1.0, 0.0], [2.0, 3.0]]\n[dynamics]\nalpha = 0.5\nupdate_mode = \"alternating\"\nlazy_epsilon = 0.1\nhorizon = 100000\n[analysis]\nstop_on_certificate = true\n",
    );
    let res = run_config(&c, Path::new("."), &tmp.path().join("lazy"), None).unwrap();
    assert_eq!(res.exit_code, 0, "{:?}", res.reports);
    assert!(res.outcome.stopped_early);
    assert!(res.outcome.lazy_updates.unwrap() <= 30);
}

#[test]
fn dense_recheck_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config("name = \"d\"\n[game]\nsource = \"spiral\"\nm = 4\nr = 1\n[dynamics]\neta = 0.2\nhorizon = 5000\ncheckpoint_every = 1000\n");
    let res = run_config(&c, Path::new("."), tmp.path(), None).unwrap();
    let m = load_manifest(tmp.path()).unwrap();
    assert_eq!(m.name, "d");
    assert!(m.artifacts.contains_key("checkpoints/ckpt_000000005000.json"));
    assert_eq!(m.artifacts.len(), 6 + 5);
    let (reports, code) = check_artifacts(tmp.path(), true, Some(2000)).unwrap();
    assert_eq!(code, 0, "{reports:#?}");
    assert_eq!(reports.len(), res.reports.len());
    assert!(tmp.path().join("check_reports.json").exists());
}

#[test]
fn rounds_to_equilibrium_grows_with_m() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("g.toml");
    std::fs::write(
        &cfg,
        "name = \"g\"\n[game]\nsource = \"padded\"\nm = 5\n[dynamics]\nhorizon = 20000\n[analysis]\nchecks = [\"periods\"]\n",
    )
    .unwrap();
    let grid = SweepGrid { m: vec![5, 7], alpha: vec![0.0, 0.5], ..SweepGrid::default() };
    let s = pdl::experiment::sweep(&cfg, Some(grid), Some(1), Some(&tmp.path().join("out"))).unwrap();
    assert_eq!(s.rows.len(), 4);
    assert_eq!(s.exit_code(), 0);
    // Censored cells count as their horizon.
    let t = |i: usize| {
        let v = &s.rows[i].rounds_to_epsilon_ne;
        v.strip_prefix("censored:").unwrap_or(v).parse::<u64>().unwrap()
    };
    assert!(t(2) >= t(0) && t(3) >= t(1));
}

