//! `rallysim eval`

use crate::config::RunConfig;
use anyhow::{bail, Context, Result};
use rallysim_core::nalgebra::DVector;
use rallysim_core::env::Env;
use rallysim_core::seed;
use rallysim_core::trainer::{Checkpoint, EvalSummary, PolicySpec, RunningNorm};
use rallysim_core::env::OBS_HISTORY;
use std::io::Write;
use std::path::Path;

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("read checkpoint {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// Episode-level evaluation with JSON-lines logging.
pub struct EvalOutput {
    pub summary: EvalSummary,
    pub rows: Vec<(u64, f64, String)>,
}

pub fn evaluate(
    cfg: &RunConfig,
    ckpt: &Checkpoint,
    episodes: usize,
    eval_seed: u64,
    log_dir: Option<&Path>,
) -> Result<EvalOutput> {
    let env_cfg = cfg.env.evaluation_variant();
    let spec = PolicySpec {
        architecture: ckpt.architecture,
        per_step: cfg.env.per_step_obs_dim(),
        history: OBS_HISTORY,
        action_dim: cfg.env.action_dim(),
        action_lo: Env::new(cfg.env.clone())?.action_bounds().0,
        action_hi: Env::new(cfg.env.clone())?.action_bounds().1,
    };
    if ckpt.theta.len() != spec.param_count() {
        bail!(
            "checkpoint/config mismatch: checkpoint has {} parameters, the env config \
             ({:?} observations x {:?} actions, {:?}) needs {}",
            ckpt.theta.len(),
            spec.obs_dim(),
            spec.action_dim,
            ckpt.architecture,
            spec.param_count()
        );
    }
    let theta = DVector::from_vec(ckpt.theta.clone());
    let norm: RunningNorm = ckpt.norm.clone();

    let mut env = Env::new(env_cfg)?;
    let logging = log_dir.is_some();
    env.set_logging(logging);
    let mut rows = Vec::with_capacity(episodes);
    let mut returns = Vec::with_capacity(episodes);
    let mut scratch; // normalized observation
    let mut log_file = match log_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Some(std::io::BufWriter::new(std::fs::File::create(dir.join("episodes.jsonl"))?))
        }
        None => None,
    };
    for e in 0..episodes {
        let ep_seed = seed::eval_seed(eval_seed, e as u64);
        let mut obs = env.reset_with_seed(ep_seed)?;
        let mut total = 0.0;
        let mut outcome = String::from("none");
        loop {
            scratch = norm.normalize(&obs.data);
            let action = spec.act(theta.as_slice(), &scratch);
            let r = env.step(&action)?;
            total += r.reward;
            obs = r.observation;
            if r.done {
                if let Some(o) = r.info.outcome {
                    outcome = format!("{o:?}");
                }
                break;
            }
        }
        if let Some(f) = log_file.as_mut() {
            for rec in env.take_log() {
                writeln!(f, "{}", serde_json::to_string(&rec)?)?;
            }
        }
        rows.push((ep_seed, total, outcome));
        returns.push(total);
    }
    Ok(EvalOutput { summary: EvalSummary::from_returns(returns), rows })
}

pub fn run(
    cfg: &RunConfig,
    checkpoint: &Path,
    episodes: usize,
    eval_seed: u64,
    out: Option<&Path>,
) -> Result<EvalSummary> {
    let ckpt = load_checkpoint(checkpoint)?;
    let log_dir = out.map(|o| o.join("logs"));
    let result = evaluate(cfg, &ckpt, episodes, eval_seed, log_dir.as_deref())?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let mut csv = String::from("episode_seed,return,outcome\n");
        for (s, r, o) in &result.rows {
            csv.push_str(&format!("{s},{r:.6},{o}\n"));
        }
        std::fs::write(dir.join("episodes.csv"), csv)?;
    }
    println!(
        "mean return {:.3} +/- {:.3} (95% CI, {} episodes)",
        result.summary.mean,
        result.summary.ci95(),
        episodes
    );
    Ok(result.summary)
}
