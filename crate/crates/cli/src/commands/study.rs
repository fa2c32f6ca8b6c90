//! `rallysim study`: sim-to-sim transfer ablations.
//!
//! Each variant perturbs the *training* environment; every trained policy
//! that solves its training task is then evaluated zero-shot on the fixed
//! reference environment. Per-variant output mirrors the transfer charts:
//! mean return with a 95% CI plus the solve rate.

use crate::config::{apply_overrides, load_run_config, RunConfig};
use crate::manifest::RunManifest;
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;
use toml::Value;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyVariant {
    pub name: String,
    /// TOML overlay applied to the training config.
    pub overrides: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct StudySpec {
    pub kind: String,
    pub variants: Vec<StudyVariant>,
    pub seeds: Vec<u64>,
    /// Episodes per evaluation repetition.
    pub episodes_per_eval: usize,
    pub eval_repetitions: usize,
}

impl Default for StudySpec {
    fn default() -> Self {
        Self {
            kind: "custom".into(),
            variants: Vec::new(),
            seeds: vec![1, 2, 3],
            episodes_per_eval: 50,
            eval_repetitions: 3,
        }
    }
}

fn overlay(text: &str) -> Value {
    text.parse().expect("built-in overlay parses")
}

/// Built-in study grids.
pub fn builtin_study(kind: &str) -> Result<StudySpec> {
    let mut spec = StudySpec { kind: kind.to_string(), ..Default::default() };
    match kind {
        "latency" => {
            for (name, scale) in
                [("0pct", 0.0), ("20pct", 0.2), ("50pct", 0.5), ("100pct", 1.0), ("150pct", 1.5)]
            {
                spec.variants.push(StudyVariant {
                    name: name.into(),
                    overrides: overlay(&format!("[env.fidelity.latency]\nscale = {scale}")),
                });
            }
        }
        "ball_distribution" => {
            for name in ["baseline", "medium", "wide", "tiny", "thrower2", "velocity_offset"] {
                let dist = rallysim_core::env::BallDistribution::preset(name)
                    .expect("known preset");
                let toml = toml::to_string(&dist).expect("distribution serializes");
                spec.variants.push(StudyVariant {
                    name: name.into(),
                    overrides: overlay(&format!("[env.distribution]\n{toml}")),
                });
            }
        }
        "observation_noise" => {
            for (name, hw, bias) in [
                ("none", 0.0, 0.0),
                ("4cm", 0.04, 0.0),
                ("8cm", 0.08, 0.0),
                ("bias4cm", 0.04, 0.04),
            ] {
                spec.variants.push(StudyVariant {
                    name: name.into(),
                    overrides: overlay(&format!(
                        "[env.fidelity.noise]\nhalf_width = [{hw}, {hw}, {hw}]\nbias = [{bias}, 0.0, 0.0]"
                    )),
                });
            }
        }
        "physical_params" => {
            for (name, text) in [
                ("baseline", String::new()),
                (
                    "table_no_r_randomize",
                    "[env.fidelity.randomization.table_restitution]\ncenter = 0.9\nhalf_range = 0.0".into(),
                ),
                ("ball_r_plus2pct", "[env.ball]\nrestitution = 0.918".into()),
                (
                    "table_r_plus8pct",
                    "[env.fidelity.randomization.table_restitution]\ncenter = 0.972\nhalf_range = 0.15".into(),
                ),
                (
                    "measured",
                    "[env.fidelity.randomization.table_restitution]\ncenter = 0.92\nhalf_range = 0.15\n\n[env.fidelity.randomization.paddle_restitution]\ncenter = 0.78\nhalf_range = 0.15".into(),
                ),
            ] {
                spec.variants.push(StudyVariant { name: name.into(), overrides: overlay(&text) });
            }
        }
        "es_ablation" => {
            for (name, mode, ortho) in [
                ("ars", "ars", false),
                ("ars_ortho", "ars", true),
                ("diff_elites", "bgs", false),
                ("bgs", "bgs", true),
            ] {
                spec.variants.push(StudyVariant {
                    name: name.into(),
                    overrides: overlay(&format!(
                        "[trainer]\nelite_mode = \"{mode}\"\northogonal = {ortho}"
                    )),
                });
            }
        }
        "task_space" => {
            for (name, action, obs) in [
                ("joint_space", "joint_velocity", "joint"),
                ("task_act", "task_position", "joint"),
                ("task_act_obs", "task_position", "task"),
            ] {
                spec.variants.push(StudyVariant {
                    name: name.into(),
                    overrides: overlay(&format!(
                        "[env]\naction_mode = \"{action}\"\nobservation_mode = \"{obs}\""
                    )),
                });
            }
        }
        other => bail!("unknown built-in study `{other}` (and no spec file given)"),
    }
    Ok(spec)
}

pub fn load_study_spec(path: &Path) -> Result<StudySpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("read study spec {}", path.display()))?;
    Ok(toml::from_str(&text)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub variant: String,
    pub seed: u64,
    pub solved: bool,
    pub solve_iteration: Option<usize>,
    pub eval_repetition: usize,
    pub mean_return: f64,
    pub reference_hash: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantSummary {
    pub variant: String,
    pub seeds: usize,
    pub solved: usize,
    pub solve_rate: f64,
    /// Mean and CI over the per-repetition evaluation means of solved seeds.
    pub mean_return: f64,
    pub ci95: f64,
}

pub struct StudyResult {
    pub rows: Vec<StudyRow>,
    pub summaries: Vec<VariantSummary>,
}

pub fn run_study(
    base: &RunConfig,
    reference: &RunConfig,
    spec: &StudySpec,
    out: &Path,
    quiet: bool,
) -> Result<StudyResult> {
    if spec.variants.is_empty() {
        bail!("study has no variants");
    }
    std::fs::create_dir_all(out)?;
    let reference_hash = reference.hash();
    let mut manifest = RunManifest::new(&base.hash(), spec.seeds.clone());
    manifest.reference_hash = Some(reference_hash.clone());
    manifest.write(out)?;
    std::fs::write(out.join("study.json"), serde_json::to_string_pretty(spec)?)?;
    crate::config::write_config_copy(reference, out)?;

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for variant in &spec.variants {
        let var_cfg = apply_overrides(base, &variant.overrides)
            .with_context(|| format!("variant `{}`", variant.name))?;
        let mut solved = 0usize;
        let mut eval_means = Vec::new();
        for &seed in &spec.seeds {
            let mut cfg = var_cfg.clone();
            cfg.trainer.seed = seed;
            cfg.env.seed = seed;
            let run_dir = out.join(format!("{}_seed{}", variant.name, seed));
            let result = super::train::run(&cfg, &run_dir, true)?;
            let solve = result.solve.as_ref();
            if let Some(s) = solve {
                solved += 1;
                for rep in 0..spec.eval_repetitions {
                    let eval = super::eval::evaluate(
                        reference,
                        &s.checkpoint,
                        spec.episodes_per_eval,
                        rallysim_core::seed::mix(seed, &[9, rep as u64]),
                        None,
                    )?;
                    if !quiet {
                        println!(
                            "{} seed {seed} rep {rep}: reference return {:.3}",
                            variant.name, eval.summary.mean
                        );
                    }
                    eval_means.push(eval.summary.mean);
                    rows.push(StudyRow {
                        variant: variant.name.clone(),
                        seed,
                        solved: true,
                        solve_iteration: Some(s.iteration),
                        eval_repetition: rep,
                        mean_return: eval.summary.mean,
                        reference_hash: reference_hash.clone(),
                    });
                }
            } else {
                if !quiet {
                    println!("{} seed {seed}: did not solve", variant.name);
                }
                rows.push(StudyRow {
                    variant: variant.name.clone(),
                    seed,
                    solved: false,
                    solve_iteration: None,
                    eval_repetition: 0,
                    mean_return: f64::NAN,
                    reference_hash: reference_hash.clone(),
                });
            }
        }
        let n = eval_means.len();
        let mean = if n > 0 { eval_means.iter().sum::<f64>() / n as f64 } else { f64::NAN };
        let ci = if n > 1 {
            let var =
                eval_means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1) as f64;
            1.96 * (var / n as f64).sqrt()
        } else {
            f64::NAN
        };
        summaries.push(VariantSummary {
            variant: variant.name.clone(),
            seeds: spec.seeds.len(),
            solved,
            solve_rate: solved as f64 / spec.seeds.len() as f64,
            mean_return: mean,
            ci95: ci,
        });
    }

    write_outputs(out, &spec.kind, &rows, &summaries)?;
    Ok(StudyResult { rows, summaries })
}

fn write_outputs(out: &Path, kind: &str, rows: &[StudyRow], summaries: &[VariantSummary]) -> Result<()> {
    let mut csv = String::from(
        "variant,seed,solved,solve_iteration,eval_repetition,mean_return,reference_hash\n",
    );
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.variant,
            r.seed,
            r.solved,
            r.solve_iteration.map(|i| i.to_string()).unwrap_or_default(),
            r.eval_repetition,
            if r.mean_return.is_nan() { String::new() } else { format!("{:.6}", r.mean_return) },
            r.reference_hash
        ));
    }
    std::fs::write(out.join("rows.csv"), csv)?;

    let mut md = format!("# Study: {kind}\n\n");
    md.push_str("Zero-shot transfer to the reference environment (scale 0-2).\n\n");
    md.push_str("| variant | solved / seeds | solve rate | mean return | 95% CI |\n");
    md.push_str("|---|---|---|---|---|\n");
    let mut summary_csv = String::from("variant,seeds,solved,solve_rate,mean_return,ci95\n");
    for s in summaries {
        md.push_str(&format!(
            "| {} | {} / {} | {:.0}% | {} | {} |\n",
            s.variant,
            s.solved,
            s.seeds,
            100.0 * s.solve_rate,
            if s.mean_return.is_nan() { "-".into() } else { format!("{:.3}", s.mean_return) },
            if s.ci95.is_nan() { "-".into() } else { format!("+/-{:.3}", s.ci95) },
        ));
        summary_csv.push_str(&format!(
            "{},{},{},{:.4},{},{}\n",
            s.variant,
            s.seeds,
            s.solved,
            s.solve_rate,
            if s.mean_return.is_nan() { String::new() } else { format!("{:.6}", s.mean_return) },
            if s.ci95.is_nan() { String::new() } else { format!("{:.6}", s.ci95) },
        ));
    }
    std::fs::write(out.join("study.md"), md)?;
    std::fs::write(out.join("summary.csv"), summary_csv)?;
    Ok(())
}

pub fn run(
    base_config: Option<&Path>,
    profile: Option<&str>,
    kind_or_spec: &str,
    out: &Path,
    seeds: Option<Vec<u64>>,
) -> Result<()> {
    let base = load_run_config(base_config, profile)?;
    // The reference env: the base config with the canonical fidelity pinned
    // (baseline latency and zero-mean 4cm ball noise), standing in for the
    // physical robot. Variants perturb the training side only.
    let reference = apply_overrides(
        &base,
        &overlay(
            "[env.fidelity.latency]\nscale = 1.0\n\n[env.fidelity.noise]\nhalf_width = [0.04, 0.04, 0.04]\nbias = [0.0, 0.0, 0.0]",
        ),
    )?;
    let mut spec = if Path::new(kind_or_spec).exists() {
        load_study_spec(Path::new(kind_or_spec))?
    } else {
        builtin_study(kind_or_spec)?
    };
    if let Some(s) = seeds {
        spec.seeds = s;
    }
    let result = run_study(&base, &reference, &spec, out, false)?;
    println!("study `{}`: {} variants, outputs in {}", spec.kind, result.summaries.len(), out.display());
    for s in &result.summaries {
        println!(
            "  {}: solve {}/{}, reference return {}",
            s.variant,
            s.solved,
            s.seeds,
            if s.mean_return.is_nan() { "-".into() } else { format!("{:.3}", s.mean_return) }
        );
    }
    Ok(())
}
