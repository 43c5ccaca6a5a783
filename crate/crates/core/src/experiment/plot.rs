//! Long-format CSV tables derived from a finished run, one file per figure.

use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::read_trajectory;
use crate::error::{Error, Result};

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(header).map_err(fmt)?;
    for row in rows {
        w.write_record(&row).map_err(fmt)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `plot/potential.csv`, `plot/nash_gap.csv`, `plot/probabilities.csv` and
/// `plot/gaps.csv` under `dir`, plus `plot/periods.csv` or `plot/dwell.csv` when the run
/// produced them. Returns the written paths.
pub fn emit_plot_data(dir: &Path) -> Result<Vec<PathBuf>> {
    let records = read_trajectory(&dir.join("trajectory.jsonl"))?;
    let out = dir.join("plot");
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let mut written = Vec::new();

    let path = out.join("potential.csv");
    write_table(
        &path,
        &["round", "potential"],
        records.iter().filter_map(|r| r.potential.map(|p| vec![r.round.to_string(), p.to_string()])),
    )?;
    written.push(path);

    let path = out.join("nash_gap.csv");
    write_table(
        &path,
        &["round", "player", "nash_gap"],
        records.iter().flat_map(|r| {
            r.nash_gap.iter().enumerate().map(move |(i, g)| vec![r.round.to_string(), (i + 1).to_string(), g.to_string()])
        }),
    )?;
    written.push(path);

    let per_action = |field: fn(&crate::dynamics::TrajectoryRecord) -> &Vec<Vec<f64>>| {
        let records = &records;
        records.iter().flat_map(move |r| {
            field(r).iter().enumerate().flat_map(move |(i, v)| {
                v.iter().enumerate().map(move |(a, x)| {
                    vec![r.round.to_string(), (i + 1).to_string(), (a + 1).to_string(), x.to_string()]
                })
            })
        })
    };
    let path = out.join("probabilities.csv");
    write_table(&path, &["round", "player", "action", "probability"], per_action(|r| &r.strategies))?;
    written.push(path);
    let path = out.join("gaps.csv");
    write_table(&path, &["round", "player", "action", "gap"], per_action(|r| &r.gaps))?;
    written.push(path);

    for name in ["periods.csv", "dwell.csv"] {
        let src = dir.join(name);
        if src.exists() {
            let dst = out.join(name);
            std::fs::copy(&src, &dst).map_err(|e| Error::io(&dst, e))?;
            written.push(dst);
        }
    }
    Ok(written)
}
