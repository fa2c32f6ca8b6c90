// Desk-scale training probe for the ball-return task.
use rallysim_core::env::*;
use rallysim_core::trainer::*;

fn desk_env(latency_scale: f64, dist: &str) -> EnvConfig {
    let mut cfg = EnvConfig::default();
    cfg.action_mode = ActionMode::TaskPosition;
    cfg.control_hz = 50;
    cfg.max_episode_steps = 100;
    cfg.fidelity.latency = rallysim_core::fidelity::LatencyModel::with_scale(latency_scale);
    cfg.distribution = if dist == "desk" {
        BallDistribution {
            velocity_min: [-0.22, -7.0, 0.0],
            velocity_max: [0.22, -6.7, 0.25],
            ..BallDistribution::baseline()
        }
    } else {
        BallDistribution::preset(dist).unwrap()
    };
    cfg.surface.paddle_radius = 0.11;
    cfg.task_space = rallysim_core::dynamics::TaskSpaceParams {
        cube_min: [-0.25, -1.72, 0.06],
        cube_max: [0.85, -1.08, 0.54],
        ..Default::default()
    };
    cfg.task_roll_range = [-0.15, 0.55];
    cfg.task_yaw_range = [-0.4, 0.4];
    cfg.fidelity.randomization.paddle_restitution =
        rallysim_core::fidelity::RandomRange::new(0.8, 0.1);
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

struct PrintSink;
impl TrainSink for PrintSink {
    fn on_eval(&mut self, it: usize, mean: f64) {
        println!("  it {it}: eval {mean:.3}");
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let latency: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1.0);
    let dist = args.get(2).map(|s| s.as_str()).unwrap_or("tiny").to_string();
    let iters: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(300);
    let sigma: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0.025);
    let alpha: f64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(0.02);
    let seed: u64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(1);
    let repeats: usize = args.get(7).map(|s| s.parse().unwrap()).unwrap_or(2);
    let elites: usize = args.get(8).map(|s| s.parse().unwrap()).unwrap_or(8);

    let env_cfg = desk_env(latency, &dist);
    let task = TableTennisTask::new(&env_cfg, Architecture::Linear).unwrap();
    println!("dim = {}, max train return = {}", task.dim(), task.max_training_return());
    let tcfg = TrainerConfig {
        num_directions: 32,
        repeats,
        elites,
        sigma,
        step_size: alpha,
        elite_mode: EliteMode::Bgs,
        orthogonal: true,
        normalize_observations: true,
        iterations: iters,
        architecture: Architecture::Linear,
        seed,
        workers: 0,
        eval_every: 25,
        eval_episodes: 50,
        solve_fraction: 0.975,
        checkpoint_every: 0,
    };
    let zero = evaluate_policy(&task, &nalgebra::DVector::zeros(task.dim()), &RunningNorm::new(task.obs_dim()), 32, seed);
    println!("theta=0 eval: {:.3}", zero.mean);
    let t0 = std::time::Instant::now();
    let res = train(&tcfg, &task, Some(2.0), &mut PrintSink).unwrap();
    println!(
        "latency {latency} dist {dist} sigma {sigma} alpha {alpha} seed {seed}: solve {:?}  wall {:.1}s",
        res.solve.as_ref().map(|s| s.iteration),
        t0.elapsed().as_secs_f64()
    );
}
