//! Evolutionary-strategies trainer: ARS and the reward-differential variant
//! with orthogonal perturbation blocks, repeat-averaged paired rollouts, state
//! normalization, and deterministic parallel evaluation.

mod norm;
mod perturb;
mod policy;
mod rollout;
mod train;
mod update;

pub use norm::RunningNorm;
pub use perturb::{sample_perturbations, PerturbationBlock};
pub use policy::{Architecture, PolicySpec};
pub use rollout::{QuadraticBandit, RolloutTask, TableTennisTask};
pub use train::{
    evaluate_direction, evaluate_policy, train, train_from, Checkpoint, CurveRow, EvalSummary,
    NullSink, SolveInfo, TrainError, TrainResult, TrainSink, TrainerConfig, CHECKPOINT_VERSION,
};
pub use update::{elite_return_std, rank_elites, update_policy, EliteMode, UpdateError};
