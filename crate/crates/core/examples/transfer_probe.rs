// Train under one fidelity setting, evaluate the solve checkpoint on the
// reference setting: the desk-scale zero-shot transfer experiment.
use rallysim_core::env::*;
use rallysim_core::trainer::*;
use rallysim_core::nalgebra::DVector;

fn desk_env(latency_scale: f64, noise_hw: f64, noise_bias_x: f64, paddle_e: f64, radius: f64, bias_axis: usize) -> EnvConfig {
    let mut cfg = EnvConfig::default();
    cfg.action_mode = ActionMode::TaskPosition;
    cfg.control_hz = 50;
    cfg.max_episode_steps = 100;
    cfg.fidelity.latency = rallysim_core::fidelity::LatencyModel::with_scale(latency_scale);
    let mut bias_vec = [0.0; 3];
    if bias_axis == 3 {
        let per = noise_bias_x / 3f64.sqrt();
        bias_vec = [per, per, per];
    } else {
        bias_vec[bias_axis] = noise_bias_x;
    }
    cfg.fidelity.noise = rallysim_core::fidelity::NoiseModel {
        half_width: [noise_hw; 3],
        bias: bias_vec,
    };
    cfg.fidelity.randomization.paddle_restitution =
        rallysim_core::fidelity::RandomRange::new(paddle_e, 0.1);
    cfg.distribution = BallDistribution {
        velocity_min: [-0.22, -7.0, 0.0],
        velocity_max: [0.22, -6.7, 0.25],
        ..BallDistribution::baseline()
    };
    cfg.surface.paddle_radius = radius;
    cfg.task_space = rallysim_core::dynamics::TaskSpaceParams {
        cube_min: [-0.25, -1.72, 0.06],
        cube_max: [0.85, -1.08, 0.54],
        ..Default::default()
    };
    cfg.task_roll_range = [-0.15, 0.55];
    cfg.task_yaw_range = [-0.4, 0.4];
    cfg.rewards = RewardSpec {
        components: vec![
            ComponentSpec { name: "hit_ball".into(), weight: 1.0 },
            ComponentSpec { name: "land_ball".into(), weight: 1.0 },
            ComponentSpec { name: "near_net_bonus".into(), weight: 0.5 },
        ],
        ..RewardSpec::default()
    };
    cfg
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let latency: f64 = args[1].parse().unwrap();
    let noise_hw: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.04);
    let bias: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0.0);
    let paddle_e: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0.5);
    let iters: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(700);
    let seed: u64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(1);
    let radius: f64 = args.get(7).map(|s| s.parse().unwrap()).unwrap_or(0.11);
    let bias_axis: usize = args.get(8).map(|s| s.parse().unwrap()).unwrap_or(0);

    let train_cfg = desk_env(latency, noise_hw, bias, paddle_e, radius, bias_axis);
    let reference = desk_env(1.0, 0.04, 0.0, paddle_e, radius, 0);
    let task = TableTennisTask::new(&train_cfg, Architecture::Linear).unwrap();
    let tcfg = TrainerConfig {
        num_directions: 32,
        repeats: 3,
        elites: 8,
        sigma: 0.05,
        step_size: 0.002,
        iterations: iters,
        eval_every: 25,
        eval_episodes: 50,
        seed,
        workers: 0,
        checkpoint_every: 0,
        stop_at_solve: true,
        ..TrainerConfig::default()
    };
    let zero = evaluate_policy(&task, &DVector::zeros(task.dim()), &RunningNorm::new(task.obs_dim()), 50, seed);
    let res = train(&tcfg, &task, Some(2.0), &mut NullSink).unwrap();
    let best_eval = res.evals.iter().map(|(_, m)| *m).fold(f64::NEG_INFINITY, f64::max);
    match &res.solve {
        Some(s) => {
            let ref_task = TableTennisTask::new(&reference, Architecture::Linear).unwrap();
            let theta = DVector::from_vec(s.checkpoint.theta.clone());
            let mut means = vec![];
            for rep in 0..3u64 {
                let e = evaluate_policy(&ref_task, &theta, &s.checkpoint.norm, 50, rallysim_core::seed::mix(seed, &[9, rep]));
                means.push(e.mean);
            }
            let m = means.iter().sum::<f64>() / 3.0;
            println!("lat {latency} hw {noise_hw} bias {bias}@{bias_axis} r {radius} seed {seed}: zero {:.2} solve@{} train_eval {:.2} | TRANSFER {m:.3}", zero.mean, s.iteration, s.eval_return);
        }
        None => println!("lat {latency} hw {noise_hw} bias {bias}@{bias_axis} r {radius} seed {seed}: zero {:.2} UNSOLVED best {best_eval:.2}", zero.mean),
    }
}
