//! Checkpoints store cumulative utilities exactly (hex floats), so a run resumed from a
//! checkpoint reproduces the uninterrupted run bit for bit.
//!
//! cargo run --example checkpoint_resume

use pdl::dynamics::{Checkpoint, DynamicsConfig, Engine, LearningRate, Recorder, RunOptions};
use pdl::{Game, Matrix};

fn main() -> pdl::Result<()> {
    let game = Game::identical_matrix(Matrix::from_rows(&[vec![1.0, 0.0, 0.5], vec![0.0, 2.0, 0.0], vec![0.5, 0.0, 1.5]])?)?;
    let config = DynamicsConfig {
        learning_rate: LearningRate::Schedule { alpha: 0.5 },
        horizon: 2000,
        checkpoint_every: Some(500),
        ..DynamicsConfig::default()
    };
    let dir = std::env::temp_dir().join(format!("pdl_checkpoint_example_{}", std::process::id()));
    let options = RunOptions { checkpoint_dir: Some(dir.clone()) };

    let mut full = Recorder::dense();
    Engine::new(&game, config.clone())?.run(&mut full, &options)?;

    let ckpt = Checkpoint::load(&dir.join("ckpt_000000001000.json"))?;
    let mut tail = Recorder::dense();
    Engine::resume(&game, config, &ckpt)?.run(&mut tail, &RunOptions::default())?;

    let same = full.records[1000..] == tail.records[..];
    println!("resumed at round {}: {} records, identical to the uninterrupted run: {same}", ckpt.round, tail.records.len());
    let last = tail.records.last().expect("non-empty");
    println!("round {} strategies {:?}", last.round, last.strategies);
    std::fs::remove_dir_all(&dir).ok();
    assert!(same);
    Ok(())
}
