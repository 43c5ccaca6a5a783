//! Experiment pipeline behind the command-line tool: config → game → streamed run with
//! checks → artifacts with a content manifest.
//!
//! Artifact directory layout:
//! `config.toml`, `game.json`, `trajectory.jsonl` (one hex-float record per line),
//! `reports.json`, `summary.json`, `gaps.csv`, `periods.csv` (padded games),
//! `dwell.csv` and `path.txt` (snake games), `checkpoints/`, `manifest.json`.

mod config;
mod plot;
mod sweep;

pub use config::{
    AnalysisSection, CheckKind, DynamicsSection, ExperimentConfig, GameSource, InitSpec, Prepared, RecordEvery, SweepGrid,
};
pub use plot::emit_plot_data;
pub use sweep::{expand_grid, parse_grid_arg, sweep, SweepRow, SweepSummary};

use std::collections::BTreeMap;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    exit_status, gap_series, write_reports, Check, CheckReport, GapProbabilityCheck, ImprovementCheck, LazyMonitor,
    OrderPreservationCheck, PaddedMonitor, PathLengthCheck, PeriodSegmentation, PotentialMonotoneCheck,
    RegretBoundCheck, SnakeMonitor,
};
use crate::dynamics::{Checkpoint, Engine, Flow, Observer, Recorder, RunOptions, Thinning, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::games::smoothness_bound;
use crate::regularizers::reg_range;

pub const OUTPUT_ENV: &str = "PDL_OUT";

/// `PDL_OUT` if set, else the working directory.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

/// `explicit` if given, else the output root joined with the config's `output_dir`
/// (default `runs/<name>`).
pub fn resolve_output_dir(config: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    let rel = config.output_dir.clone().unwrap_or_else(|| Path::new("runs").join(&config.name));
    output_root().join(rel)
}

/// Scalar results of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub name: String,
    pub rounds: u64,
    pub horizon: u64,
    pub stopped_early: bool,
    pub epsilon: f64,
    /// First round whose profile is an ε-Nash equilibrium.
    pub rounds_to_epsilon_ne: Option<u64>,
    pub final_nash_gap: f64,
    pub final_potential: Option<f64>,
    pub max_period: Option<usize>,
    pub lazy_updates: Option<u64>,
    pub snake_position: Option<usize>,
    pub checks_passed: bool,
    pub failed_checks: Vec<String>,
    pub last_checkpoint: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub dir: PathBuf,
    pub outcome: RunOutcome,
    pub reports: Vec<CheckReport>,
    pub segmentation: Option<PeriodSegmentation>,
    pub exit_code: i32,
}

/// All observers of one run.
struct Streams {
    recorder: Option<Recorder>,
    checks: Vec<Box<dyn Check>>,
    padded: Option<PaddedMonitor>,
    lazy: Option<LazyMonitor>,
    snake: Option<SnakeMonitor>,
    epsilon: f64,
    first_epsilon_ne: Option<u64>,
    thinned_input: bool,
}

impl Streams {
    fn new(p: &Prepared, recorder: Option<Recorder>, thinned_input: bool) -> Result<Self> {
        use CheckKind::*;
        let d = &p.dynamics;
        let norm = d.regularizer.norm();
        let counts = p.game.action_counts();
        let phi_range = || {
            p.game.phi_range().map_err(|_| Error::Config("this check needs a potential game".into()))
        };
        let mut checks: Vec<Box<dyn Check>> = Vec::new();
        let mut padded = None;
        let mut lazy = None;
        let mut snake = None;
        for &k in &p.checks {
            match k {
                Improvement => checks.push(Box::new(ImprovementCheck::new(d.constant_eta().unwrap(), norm))),
                PotentialMonotone => {
                    let l = smoothness_bound(&p.game, norm)?;
                    checks.push(Box::new(PotentialMonotoneCheck::new(d.constant_eta().unwrap(), l, norm)))
                }
                PathLength => checks.push(Box::new(PathLengthCheck::new(d.constant_eta().unwrap(), phi_range()?, norm))),
                GapProbability => {
                    let ranges = counts.iter().map(|&m| reg_range(&d.regularizer, m)).collect();
                    checks.push(Box::new(GapProbabilityCheck::new(ranges)))
                }
                OrderPreservation => checks.push(Box::<OrderPreservationCheck>::default()),
                RegretBound if thinned_input => {}
                RegretBound => {
                    for (i, &m) in counts.iter().enumerate() {
                        checks.push(Box::new(RegretBoundCheck::new(i, reg_range(&d.regularizer, m), norm)));
                    }
                }
                Periods => {
                    let pm = p.padded.as_ref().expect("periods check resolved only for padded games");
                    let mut mon = PaddedMonitor::new(pm, p.epsilon);
                    if let Some(extra) = p.config.analysis.stop_after_final_period {
                        mon = mon.stop_after(pm.last_period(), extra);
                    }
                    padded = Some(mon);
                }
                Lazy => {
                    let mut mon = LazyMonitor::new(d.lazy_epsilon.unwrap(), phi_range()?, p.game.max_abs_payoff());
                    if p.config.analysis.stop_on_certificate {
                        mon = mon.stop_on_certificate();
                    }
                    lazy = Some(mon);
                }
                Snake => {
                    let mut mon = SnakeMonitor::new(p.snake.as_ref().expect("snake check resolved only for snake games"));
                    if p.config.analysis.stop_at_path_end {
                        mon = mon.stop_at_end();
                    }
                    snake = Some(mon);
                }
            }
        }
        Ok(Streams { recorder, checks, padded, lazy, snake, epsilon: p.epsilon, first_epsilon_ne: None, thinned_input })
    }

    fn reports(&self) -> Vec<CheckReport> {
        let mut out: Vec<CheckReport> = self.checks.iter().map(|c| c.report()).collect();
        if let Some(m) = &self.padded {
            for r in m.reports() {
                // Whole periods can fall between thinned records.
                out.push(if self.thinned_input && r.name == "period_consistency" { r.soft() } else { r });
            }
        }
        if let Some(m) = &self.lazy {
            out.extend(m.reports());
        }
        if let Some(m) = &self.snake {
            out.push(m.report());
        }
        out
    }
}

impl Observer for Streams {
    fn observe(&mut self, r: &TrajectoryRecord) -> Flow {
        let mut flow = Flow::Continue;
        let mut merge = |f: Flow| {
            if f == Flow::Stop {
                flow = Flow::Stop;
            }
        };
        if let Some(rec) = &mut self.recorder {
            rec.observe(r);
        }
        for c in &mut self.checks {
            merge(c.observe(r));
        }
        if let Some(m) = &mut self.padded {
            merge(m.observe(r));
        }
        if let Some(m) = &mut self.lazy {
            merge(m.observe(r));
        }
        if let Some(m) = &mut self.snake {
            merge(m.observe(r));
        }
        if self.first_epsilon_ne.is_none() && r.max_nash_gap() <= self.epsilon {
            self.first_epsilon_ne = Some(r.round);
        }
        flow
    }
}

/// Loads, runs and writes artifacts for the config at `config_path`.
pub fn run_experiment(config_path: &Path, out: Option<&Path>, resume: Option<&Path>) -> Result<ExperimentResult> {
    let config = ExperimentConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let dir = resolve_output_dir(&config, out);
    run_config(&config, base, &dir, resume)
}

/// Runs an already parsed config into `dir`. `base` resolves relative game files.
pub fn run_config(config: &ExperimentConfig, base: &Path, dir: &Path, resume: Option<&Path>) -> Result<ExperimentResult> {
    let prepared = config.prepare(base)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ckpt_dir = dir.join("checkpoints");
    let mut engine = match resume {
        Some(path) => Engine::resume(&prepared.game, prepared.dynamics.clone(), &Checkpoint::load(path)?)?,
        None => {
            if ckpt_dir.exists() {
                std::fs::remove_dir_all(&ckpt_dir).map_err(|e| Error::io(&ckpt_dir, e))?;
            }
            Engine::new(&prepared.game, prepared.dynamics.clone())?
        }
    };
    let mut streams = Streams::new(&prepared, Some(Recorder::new(prepared.dynamics.record_every)), false)?;
    let options = RunOptions { checkpoint_dir: prepared.dynamics.checkpoint_every.map(|_| ckpt_dir.clone()) };
    let summary = engine.run(&mut streams, &options)?;
    let last = engine.last_record().cloned();
    let mut recorder = streams.recorder.take().expect("recorder present");
    if let Some(last) = &last {
        recorder.push_final(last);
    }
    let segmentation = streams.padded.as_ref().map(|m| m.segmentation());
    let mut records = recorder.records;
    if let Some(seg) = &segmentation {
        for r in &mut records {
            r.period = seg.period_of(r.round);
        }
    }
    let reports = streams.reports();
    let exit_code = exit_status(&reports);
    let outcome = RunOutcome {
        name: config.name.clone(),
        rounds: summary.rounds,
        horizon: prepared.dynamics.horizon,
        stopped_early: summary.stopped_by_observer,
        epsilon: prepared.epsilon,
        rounds_to_epsilon_ne: streams.first_epsilon_ne,
        final_nash_gap: last.as_ref().map_or(f64::NAN, |r| r.max_nash_gap()),
        final_potential: last.as_ref().and_then(|r| r.potential),
        max_period: segmentation.as_ref().and_then(|s| s.max_period()),
        lazy_updates: streams.lazy.as_ref().map(|m| m.outcome().updates),
        snake_position: streams.snake.as_ref().and_then(|m| m.position()),
        checks_passed: exit_code == 0,
        failed_checks: reports.iter().filter(|r| r.hard && !r.passed).map(|r| r.name.clone()).collect(),
        last_checkpoint: summary
            .last_checkpoint
            .as_ref()
            .and_then(|p| p.file_name())
            .map(|f| format!("checkpoints/{}", f.to_string_lossy())),
    };

    write_text(&dir.join("config.toml"), &config.to_toml()?)?;
    prepared.game.save(&dir.join("game.json"))?;
    write_trajectory(&dir.join("trajectory.jsonl"), &records)?;
    write_reports(&dir.join("reports.json"), &reports)?;
    write_json(&dir.join("summary.json"), &outcome)?;
    write_gaps(&dir.join("gaps.csv"), &records, prepared.game.players())?;
    if let Some(seg) = &segmentation {
        let path = dir.join("periods.csv");
        let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        seg.write_csv(f)?;
    }
    if let (Some(path), Some(mon)) = (&prepared.snake, &streams.snake) {
        write_text(&dir.join("path.txt"), &path.to_bitstrings())?;
        let mut text = String::from("k,dwell\n");
        for (k, d) in mon.dwell_times().iter().enumerate() {
            if let Some(d) = d {
                text.push_str(&format!("{},{d}\n", k + 1));
            }
        }
        write_text(&dir.join("dwell.csv"), &text)?;
    }
    write_manifest(dir, config)?;
    Ok(ExperimentResult { dir: dir.to_path_buf(), outcome, reports, segmentation, exit_code })
}

/// Re-checks a finished run. Without `dense` the stored (thinned) trajectory is replayed
/// through the checkers, which only compare consecutive rounds; with `dense` the engine is
/// re-run and every round is checked, up to `horizon` if given.
pub fn check_artifacts(dir: &Path, dense: bool, horizon: Option<u64>) -> Result<(Vec<CheckReport>, i32)> {
    let mut config = ExperimentConfig::load(&dir.join("config.toml"))?;
    if let GameSource::File { path } = &mut config.game {
        *path = dir.join("game.json");
    }
    let mut prepared = config.prepare(dir)?;
    let stored = crate::games::Game::load(&dir.join("game.json"))?;
    if stored != prepared.game {
        return Err(Error::Config(format!("{} does not match the game described by config.toml", dir.join("game.json").display())));
    }
    let reports = if dense {
        if let Some(h) = horizon {
            prepared.dynamics.horizon = prepared.dynamics.horizon.min(h);
        }
        prepared.dynamics.record_every = Thinning::Every(1);
        let mut streams = Streams::new(&prepared, None, false)?;
        Engine::new(&prepared.game, prepared.dynamics.clone())?.run(&mut streams, &RunOptions::default())?;
        streams.reports()
    } else {
        let records = read_trajectory(&dir.join("trajectory.jsonl"))?;
        let mut streams = Streams::new(&prepared, None, true)?;
        for r in &records {
            if streams.observe(r) == Flow::Stop {
                break;
            }
        }
        streams.reports()
    };
    write_reports(&dir.join("check_reports.json"), &reports)?;
    let code = exit_status(&reports);
    Ok((reports, code))
}

pub fn write_trajectory(path: &Path, records: &[TrajectoryRecord]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Format(format!("{} line {}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

fn write_gaps(path: &Path, records: &[TrajectoryRecord], players: usize) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["round", "player", "action", "gap"]).map_err(fmt)?;
    let series: Vec<_> = (0..players).map(|p| gap_series(records, p)).collect::<Result<_>>()?;
    for (idx, t) in series.first().map(|s| s.rounds.clone()).unwrap_or_default().iter().enumerate() {
        for s in &series {
            for (a, g) in s.gaps[idx].iter().enumerate() {
                w.write_record([t.to_string(), (s.player + 1).to_string(), (a + 1).to_string(), g.to_string()])
                    .map_err(fmt)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

/// sha256 of the config's canonical JSON form.
pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let canon = serde_json::to_vec(config).map_err(|e| Error::Format(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(canon)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub pdl_version: String,
    pub config_sha256: String,
    /// Relative path → sha256 of the run's artifacts.
    pub artifacts: BTreeMap<String, String>,
}

const RUN_ARTIFACTS: &[&str] = &[
    "config.toml",
    "game.json",
    "trajectory.jsonl",
    "reports.json",
    "summary.json",
    "gaps.csv",
    "periods.csv",
    "dwell.csv",
    "path.txt",
];

fn write_manifest(dir: &Path, config: &ExperimentConfig) -> Result<Manifest> {
    let mut artifacts = BTreeMap::new();
    let mut add = |rel: String, path: &Path| -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        artifacts.insert(rel, hex::encode(Sha256::digest(bytes)));
        Ok(())
    };
    for name in RUN_ARTIFACTS {
        let p = dir.join(name);
        if p.exists() {
            add(name.to_string(), &p)?;
        }
    }
    let ckpt = dir.join("checkpoints");
    if ckpt.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(&ckpt)
            .map_err(|e| Error::io(&ckpt, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        for p in entries {
            let rel = format!("checkpoints/{}", p.file_name().unwrap().to_string_lossy());
            add(rel, &p)?;
        }
    }
    let manifest = Manifest {
        name: config.name.clone(),
        pdl_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: config_hash(config)?,
        artifacts,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

pub fn load_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))
}
