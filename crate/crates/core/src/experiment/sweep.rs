//! Cartesian parameter sweeps run in parallel, one artifact directory per cell.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{resolve_output_dir, run_config, ExperimentConfig, SweepGrid};
use crate::error::{Error, Result};
use crate::regularizers::RegularizerSpec;

/// One line of `summary.csv`. A failed cell keeps its row with `error` set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: String,
    pub m: Option<usize>,
    pub alpha: Option<f64>,
    pub regularizer: String,
    pub eta: Option<f64>,
    pub epsilon: Option<f64>,
    pub exit_code: i32,
    pub rounds: Option<u64>,
    /// First ε-equilibrium round, or `censored:<rounds run>`.
    pub rounds_to_epsilon_ne: String,
    pub lazy_updates: Option<u64>,
    pub max_period: Option<usize>,
    pub checks_passed: bool,
    pub failed_checks: String,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub dir: PathBuf,
    pub rows: Vec<SweepRow>,
}

impl SweepSummary {
    /// 0 when every cell ran and passed its hard checks, else the largest cell code.
    pub fn exit_code(&self) -> i32 {
        self.rows.iter().map(|r| r.exit_code).max().unwrap_or(0)
    }
}

/// Parses `axis=v1,v2,...` into `grid`, replacing that axis.
pub fn parse_grid_arg(grid: &mut SweepGrid, arg: &str) -> Result<()> {
    let (key, values) = arg
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("grid axis must look like name=v1,v2, got {arg:?}")))?;
    let items: Vec<&str> = values.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let bad = |v: &str| Error::Config(format!("bad value {v:?} for grid axis {key}"));
    let floats = || items.iter().map(|v| v.parse::<f64>().map_err(|_| bad(v))).collect::<Result<Vec<_>>>();
    match key.trim() {
        "m" => grid.m = items.iter().map(|v| v.parse::<usize>().map_err(|_| bad(v))).collect::<Result<_>>()?,
        "alpha" => grid.alpha = floats()?,
        "eta" => grid.eta = floats()?,
        "epsilon" => grid.epsilon = floats()?,
        "regularizer" => grid.regularizer = items.iter().map(|v| v.parse::<RegularizerSpec>()).collect::<Result<_>>()?,
        other => return Err(Error::Config(format!("unknown grid axis {other:?}"))),
    }
    Ok(())
}

fn label_value(v: impl ToString) -> String {
    v.to_string().chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

/// Cells of the Cartesian product of the grid's non-empty axes applied to `base`, with
/// directory-safe labels.
pub fn expand_grid(base: &ExperimentConfig, grid: &SweepGrid) -> Result<Vec<(String, ExperimentConfig)>> {
    if !grid.alpha.is_empty() && !grid.eta.is_empty() {
        return Err(Error::Config("a grid cannot vary both alpha and eta".into()));
    }
    let mut cells = vec![(Vec::<String>::new(), base.clone())];
    fn axis<T: Clone>(
        cells: Vec<(Vec<String>, ExperimentConfig)>,
        values: &[T],
        name: &str,
        show: impl Fn(&T) -> String,
        apply: impl Fn(&mut ExperimentConfig, &T) -> Result<()>,
    ) -> Result<Vec<(Vec<String>, ExperimentConfig)>> {
        if values.is_empty() {
            return Ok(cells);
        }
        let mut out = Vec::with_capacity(cells.len() * values.len());
        for (label, c) in cells {
            for v in values {
                let mut c = c.clone();
                apply(&mut c, v)?;
                let mut l = label.clone();
                l.push(format!("{name}{}", label_value(show(v))));
                out.push((l, c));
            }
        }
        Ok(out)
    }
    cells = axis(cells, &grid.m, "m", |v| v.to_string(), |c, v| c.set_m(*v))?;
    cells = axis(cells, &grid.alpha, "alpha", |v| v.to_string(), |c, v| {
        c.dynamics.alpha = Some(*v);
        c.dynamics.eta = None;
        Ok(())
    })?;
    cells = axis(cells, &grid.eta, "eta", |v| v.to_string(), |c, v| {
        c.dynamics.eta = Some(*v);
        c.dynamics.alpha = None;
        Ok(())
    })?;
    cells = axis(cells, &grid.regularizer, "reg", |v| v.to_string(), |c, v| {
        c.dynamics.regularizer = *v;
        Ok(())
    })?;
    cells = axis(cells, &grid.epsilon, "eps", |v| v.to_string(), |c, v| {
        c.analysis.epsilon = Some(*v);
        Ok(())
    })?;
    Ok(cells
        .into_iter()
        .enumerate()
        .map(|(i, (label, mut c))| {
            let label = if label.is_empty() { format!("cell{i:03}") } else { format!("cell{i:03}_{}", label.join("_")) };
            c.name = format!("{}_{label}", c.name);
            c.output_dir = None;
            (label, c)
        })
        .collect())
}

/// Runs every cell of `grid` (or the config's own `[sweep]` table) on `jobs` threads
/// (0 or `None`: one per core). Cell `c` writes to `<out>/<c>`; `<out>/summary.csv`
/// collects one row per cell in grid order.
pub fn sweep(config_path: &Path, grid: Option<SweepGrid>, jobs: Option<usize>, out: Option<&Path>) -> Result<SweepSummary> {
    let base = ExperimentConfig::load(config_path)?;
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let grid = grid.or_else(|| base.sweep.clone()).unwrap_or_default();
    let cells = expand_grid(&base, &grid)?;
    let dir = resolve_output_dir(&base, out);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs:?} worker threads: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|(label, c)| {
                let mut row = SweepRow {
                    cell: label.clone(),
                    m: c.m(),
                    alpha: c.dynamics.eta.is_none().then(|| c.dynamics.alpha()),
                    regularizer: c.dynamics.regularizer.to_string(),
                    eta: c.dynamics.eta,
                    epsilon: c.analysis.epsilon,
                    exit_code: 0,
                    rounds: None,
                    rounds_to_epsilon_ne: String::new(),
                    lazy_updates: None,
                    max_period: None,
                    checks_passed: false,
                    failed_checks: String::new(),
                    error: String::new(),
                };
                match run_config(c, base_dir, &dir.join(label), None) {
                    Ok(res) => {
                        let o = res.outcome;
                        row.exit_code = res.exit_code;
                        row.rounds = Some(o.rounds);
                        row.rounds_to_epsilon_ne =
                            o.rounds_to_epsilon_ne.map_or_else(|| format!("censored:{}", o.rounds), |t| t.to_string());
                        row.epsilon = Some(o.epsilon);
                        row.lazy_updates = o.lazy_updates;
                        row.max_period = o.max_period;
                        row.checks_passed = o.checks_passed;
                        row.failed_checks = o.failed_checks.join(";");
                    }
                    Err(e) => {
                        row.exit_code = e.exit_code();
                        row.error = e.to_string();
                    }
                }
                row
            })
            .collect()
    });
    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Format(e.to_string()))?;
    for r in &rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(SweepSummary { dir, rows })
}
