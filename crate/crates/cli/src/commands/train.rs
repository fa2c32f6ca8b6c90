//! `rallysim train`

use crate::config::{write_config_copy, RunConfig};
use crate::manifest::RunManifest;
use anyhow::{Context, Result};
use rallysim_core::trainer::{
    train, Checkpoint, CurveRow, TableTennisTask, TrainResult, TrainSink,
};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Streams curve rows, eval rows, and checkpoints into the run directory.
pub struct DirSink {
    curve: BufWriter<File>,
    evals: BufWriter<File>,
    ckpt_dir: std::path::PathBuf,
    quiet: bool,
}

impl DirSink {
    pub fn new(dir: &Path, quiet: bool) -> Result<Self> {
        let ckpt_dir = dir.join("ckpt");
        std::fs::create_dir_all(&ckpt_dir)?;
        let mut curve = BufWriter::new(File::create(dir.join("curve.csv"))?);
        writeln!(curve, "iteration,mean_return,elite_diff_mean,wall_ms")?;
        let mut evals = BufWriter::new(File::create(dir.join("evals.csv"))?);
        writeln!(evals, "iteration,eval_return")?;
        Ok(Self { curve, evals, ckpt_dir, quiet })
    }
}

impl TrainSink for DirSink {
    fn on_row(&mut self, row: &CurveRow) {
        let _ = writeln!(
            self.curve,
            "{},{:.9},{:.9},{:.3}",
            row.iteration, row.mean_return, row.elite_diff_mean, row.wall_ms
        );
    }

    fn on_eval(&mut self, iteration: usize, mean_return: f64) {
        let _ = writeln!(self.evals, "{iteration},{mean_return:.6}");
        if !self.quiet {
            println!("iteration {iteration}: eval return {mean_return:.3}");
        }
    }

    fn on_checkpoint(&mut self, ckpt: &Checkpoint) {
        let path = self.ckpt_dir.join(format!("iter_{:06}.json", ckpt.iteration));
        if let Ok(json) = serde_json::to_string(ckpt) {
            let _ = std::fs::write(path, json);
        }
    }
}

pub fn write_solve_marker(dir: &Path, result: &TrainResult) -> Result<()> {
    if let Some(solve) = &result.solve {
        std::fs::write(
            dir.join("ckpt").join("solve.json"),
            serde_json::to_string(&solve.checkpoint)?,
        )?;
        std::fs::write(
            dir.join("solve.txt"),
            format!("iteration {} eval_return {:.4}\n", solve.iteration, solve.eval_return),
        )?;
    }
    Ok(())
}

pub fn run(cfg: &RunConfig, out: &Path, quiet: bool) -> Result<TrainResult> {
    std::fs::create_dir_all(out)?;
    let manifest = RunManifest::new(&cfg.hash(), vec![cfg.trainer.seed]);
    manifest.write(out)?;
    write_config_copy(cfg, out)?;

    let task = TableTennisTask::new(&cfg.env, cfg.trainer.architecture)
        .context("build environment task")?;
    let max_return = task.max_training_return();
    let mut sink = DirSink::new(out, quiet)?;
    let result = train(&cfg.trainer, &task, Some(max_return), &mut sink)?;
    drop(sink);
    write_solve_marker(out, &result)?;

    // Final checkpoint under a stable name for `eval`.
    std::fs::write(
        out.join("ckpt").join("final.json"),
        serde_json::to_string(&result.final_checkpoint)?,
    )?;
    if !quiet {
        println!(
            "run {} finished: {} iterations, solve: {}",
            manifest.run_id,
            result.curve.len(),
            result
                .solve
                .as_ref()
                .map(|s| format!("iteration {}", s.iteration))
                .unwrap_or_else(|| "not reached".into())
        );
    }
    Ok(result)
}
