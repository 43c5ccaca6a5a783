//! Config-driven run as done by `pdl run`: parse a TOML config, run with streaming checks,
//! and write artifacts plus a content manifest. Defaults to a short padded-game run.
//!
//! cargo run --release --example run_experiment -- [config.toml] [out_dir]

use std::path::{Path, PathBuf};

use pdl::experiment::{emit_plot_data, load_manifest, run_config, run_experiment, ExperimentConfig};

const DEFAULT: &str = r#"
name = "padded_prefix"

[game]
source = "padded"
m = 5

[dynamics]
alpha = 0.0
horizon = 500_000
record_every = "powers_of_two"

[analysis]
checks = ["periods", "gap_probability"]
"#;

fn main() -> pdl::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args.get(1).map_or_else(|| std::env::temp_dir().join("pdl_run_experiment"), PathBuf::from);
    let res = match args.first() {
        Some(path) => run_experiment(Path::new(path), Some(&out), None)?,
        None => run_config(&ExperimentConfig::from_toml(DEFAULT)?, Path::new("."), &out, None)?,
    };
    for r in &res.reports {
        println!("{}", r.summary_line());
    }
    println!("{} rounds, max period {:?}, exit status {}", res.outcome.rounds, res.outcome.max_period, res.exit_code);
    let manifest = load_manifest(&res.dir)?;
    println!("config sha256 {}", manifest.config_sha256);
    for (file, hash) in &manifest.artifacts {
        println!("  {file:<18} {}", &hash[..16]);
    }
    for p in emit_plot_data(&res.dir)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
