//! `rallysim report`: aggregate run and study directories into a markdown
//! report plus CSV extracts.

use crate::manifest::RunManifest;
use anyhow::Result;
use rallysim_core::env::StepRecord;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Default)]
struct StageStats {
    values: Vec<f64>,
}

impl StageStats {
    fn percentile(&mut self, p: f64) -> f64 {
        if self.values.is_empty() {
            return f64::NAN;
        }
        self.values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let idx = ((self.values.len() - 1) as f64 * p).round() as usize;
        self.values[idx]
    }

    fn mean(&self) -> f64 {
        if self.values.is_empty() {
            f64::NAN
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }
}

fn collect_stage_stats(dir: &Path) -> Result<BTreeMap<String, StageStats>> {
    let mut stats: BTreeMap<String, StageStats> = BTreeMap::new();
    let logs_dir = dir.join("logs");
    if !logs_dir.is_dir() {
        return Ok(stats);
    }
    for entry in std::fs::read_dir(&logs_dir)? {
        let path = entry?.path();
        if path.extension().map(|e| e == "jsonl").unwrap_or(false) {
            for line in std::fs::read_to_string(&path)?.lines() {
                let Ok(rec) = serde_json::from_str::<StepRecord>(line) else { continue };
                for (stage, value) in rec.stages {
                    // Ages are latency samples; absolute times are skipped.
                    if stage.ends_with("_age") {
                        stats.entry(stage).or_default().values.push(value * 1e3);
                    }
                }
            }
        }
    }
    Ok(stats)
}

fn curve_summary(dir: &Path) -> Option<String> {
    let text = std::fs::read_to_string(dir.join("curve.csv")).ok()?;
    let mut best = f64::NEG_INFINITY;
    let mut last = f64::NAN;
    let mut rows = 0usize;
    for line in text.lines().skip(1) {
        let mut cols = line.split(',');
        let _it = cols.next()?;
        let mean: f64 = cols.next()?.parse().ok()?;
        best = best.max(mean);
        last = mean;
        rows += 1;
    }
    let evals = std::fs::read_to_string(dir.join("evals.csv")).ok();
    let final_eval = evals
        .as_deref()
        .and_then(|t| t.lines().last())
        .and_then(|l| l.split(',').nth(1))
        .and_then(|v| v.parse::<f64>().ok());
    let solve = std::fs::read_to_string(dir.join("solve.txt")).ok();
    Some(format!(
        "{rows} iterations; best train return {best:.3}; final train return {last:.3}; \
         final eval {}; solve: {}",
        final_eval.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into()),
        solve.map(|s| s.trim().to_string()).unwrap_or_else(|| "not reached".into()),
    ))
}

pub fn run(dirs: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let mut md = String::from("# Report\n");
    let mut any = false;
    for dir in dirs {
        let manifest = match RunManifest::read(dir) {
            Ok(m) => m,
            Err(_) => {
                eprintln!("warning: {} has no manifest, skipping", dir.display());
                continue;
            }
        };
        any = true;
        md.push_str(&format!(
            "\n## {}\n\nrun `{}`, config `{}`, build `{}`\n\n",
            dir.display(),
            manifest.run_id,
            manifest.config_hash,
            manifest.build
        ));
        if let Some(summary) = curve_summary(dir) {
            md.push_str(&format!("Training: {summary}\n\n"));
        }
        if let Ok(study_md) = std::fs::read_to_string(dir.join("study.md")) {
            md.push_str(&study_md);
            md.push('\n');
        }
        let mut stats = collect_stage_stats(dir)?;
        if !stats.is_empty() {
            md.push_str("Latency trace (ms):\n\n| stage | mean | p50 | p99 |\n|---|---|---|---|\n");
            for (stage, s) in stats.iter_mut() {
                md.push_str(&format!(
                    "| {} | {:.2} | {:.2} | {:.2} |\n",
                    stage,
                    s.mean(),
                    s.percentile(0.5),
                    s.percentile(0.99)
                ));
            }
            md.push('\n');
        }
    }
    if !any {
        eprintln!("warning: no reportable directories found");
    }
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, &md)?;
            println!("report written to {}", path.display());
        }
        None => print!("{md}"),
    }
    Ok(())
}
