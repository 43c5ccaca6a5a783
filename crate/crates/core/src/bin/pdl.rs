use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pdl::constructions::{auto_gamma, find_snake, padded_matrix, snake_game, spiral_matrix};
use pdl::experiment::{check_artifacts, emit_plot_data, parse_grid_arg, run_experiment, sweep, SweepGrid};
use pdl::{Error, Game, RegularizerSpec, Result};

/// Learning dynamics on potential games. Artifacts go under $PDL_OUT (default: the
/// working directory). Exit codes: 0 ok, 1 failed hard check, 2 config error, 3 engine error.
#[derive(Parser)]
#[command(name = "pdl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a game and write it as JSON.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Artifact directory (default: $PDL_OUT joined with the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue from a checkpoint file written by an earlier run of the same config.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run a config over a parameter grid.
    Sweep {
        config: PathBuf,
        /// Grid axis `name=v1,v2,...` with name in m, alpha, regularizer, eta, epsilon.
        /// Replaces the config's [sweep] table when given.
        #[arg(long = "grid")]
        grid: Vec<String>,
        /// Worker threads (default: one per core).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the checks on a finished run's artifacts.
    Check {
        dir: PathBuf,
        /// Re-run the engine recording every round instead of replaying the stored trajectory.
        #[arg(long)]
        dense: bool,
        /// Cap on the dense re-run horizon.
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Write long-format CSV series for plotting under <dir>/plot.
    PlotData { dir: PathBuf },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Spiral matrix of even size m.
    Spiral {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        r: i64,
        #[command(flatten)]
        out: OutFile,
    },
    /// Padded spiral game of odd size m.
    Padded {
        #[arg(long)]
        m: usize,
        /// Gadget weight; default is the theory value for --alpha and --reg.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value = "entropy")]
        reg: RegularizerSpec,
        #[command(flatten)]
        out: OutFile,
    },
    /// Snake-in-the-box game on the n-cube.
    Snake {
        #[arg(long)]
        n: usize,
        /// Search node budget.
        #[arg(long, default_value_t = 50_000_000)]
        budget: u64,
        /// Also write the path as one bitstring per line to this file.
        #[arg(long)]
        bitstrings: Option<PathBuf>,
        #[command(flatten)]
        out: OutFile,
    },
}

#[derive(Args)]
struct OutFile {
    /// Output file (default: stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl OutFile {
    fn write(&self, game: &Game) -> Result<()> {
        match &self.output {
            Some(p) => game.save(p),
            None => {
                // A closed pipe (e.g. `| head`) is not an error.
                let _ = writeln!(std::io::stdout().lock(), "{}", game.to_json()?);
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
}

fn gen(cmd: GenCommand) -> Result<i32> {
    match cmd {
        GenCommand::Spiral { m, r, out } => out.write(&Game::identical_matrix(spiral_matrix(m, r)?.matrix)?)?,
        GenCommand::Padded { m, gamma, alpha, reg, out } => {
            let gamma = match gamma {
                Some(g) => g,
                None => auto_gamma(m, alpha, reg.range(m)).map_err(|e| Error::Config(e.to_string()))?,
            };
            out.write(&padded_matrix(m, gamma)?.game())?
        }
        GenCommand::Snake { n, budget, bitstrings, out } => {
            let path = find_snake(n, budget)?;
            if let Some(p) = bitstrings {
                write_file(&p, &path.to_bitstrings())?;
            }
            eprintln!("snake of length {} on the {n}-cube", path.length());
            out.write(&snake_game(&path)?)?
        }
    }
    Ok(0)
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Gen(cmd) => gen(cmd),
        Command::Run { config, out, resume } => {
            let res = run_experiment(&config, out.as_deref(), resume.as_deref())?;
            for r in &res.reports {
                println!("{}", r.summary_line());
            }
            let o = &res.outcome;
            println!("rounds {} (horizon {}), final nash gap {:.3e}", o.rounds, o.horizon, o.final_nash_gap);
            match o.rounds_to_epsilon_ne {
                Some(t) => println!("first {}-equilibrium at round {t}", o.epsilon),
                None => println!("no {}-equilibrium within {} rounds", o.epsilon, o.rounds),
            }
            if let Some(k) = o.max_period {
                println!("max period {k}");
            }
            println!("artifacts in {}", res.dir.display());
            Ok(res.exit_code)
        }
        Command::Sweep { config, grid, jobs, out } => {
            let grid = if grid.is_empty() {
                None
            } else {
                let mut g = SweepGrid::default();
                for arg in &grid {
                    parse_grid_arg(&mut g, arg)?;
                }
                Some(g)
            };
            let s = sweep(&config, grid, jobs, out.as_deref())?;
            for r in &s.rows {
                let status = if !r.error.is_empty() { format!("error: {}", r.error) } else { format!("exit {}", r.exit_code) };
                println!("{} rounds_to_eps={} {status}", r.cell, r.rounds_to_epsilon_ne);
            }
            println!("summary in {}", s.dir.join("summary.csv").display());
            Ok(s.exit_code())
        }
        Command::Check { dir, dense, horizon } => {
            let (reports, code) = check_artifacts(&dir, dense, horizon)?;
            for r in &reports {
                println!("{}", r.summary_line());
            }
            Ok(code)
        }
        Command::PlotData { dir } => {
            for p in emit_plot_data(&dir)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
