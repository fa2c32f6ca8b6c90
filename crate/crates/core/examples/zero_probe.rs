use rallysim_core::env::*;
use rallysim_core::trainer::*;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let roll_c: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.0);
    let mut cfg = EnvConfig::default();
    cfg.action_mode = ActionMode::TaskPosition;
    cfg.control_hz = 50;
    cfg.max_episode_steps = 100;
    cfg.distribution = BallDistribution::tiny();
    cfg.task_space = rallysim_core::dynamics::TaskSpaceParams {
        cube_min: [-0.3, -2.0, 0.07],
        cube_max: [0.9, -1.3, 0.57],
        ..Default::default()
    };
    cfg.task_roll_range = [roll_c - 0.4, roll_c + 0.4];
    cfg.task_yaw_range = [-0.5, 0.5];
    let task = TableTennisTask::new(&cfg, Architecture::Linear).unwrap();
    let norm = RunningNorm::new(task.obs_dim());
    let theta = vec![0.0; task.dim()];
    let mut hits = 0;
    for ep in 0..20 {
        let r = task.eval_rollout(&theta, &norm, 7000 + ep);
        if r >= 1.0 { hits += 1; }
    }
    println!("roll_center {roll_c}: zero-policy hit rate {hits}/20");

    // Where does the paddle sit vs where does the ball cross?
    let mut env = Env::new(cfg).unwrap();
    env.reset_with_seed(7).unwrap();
    let act = vec![0.3, -1.65, 0.32, roll_c, 0.0];
    loop {
        let r = env.step(&act).unwrap();
        let b = env.ball_state().unwrap().position;
        if b.y < -1.3 && b.y > -1.8 {
            let p = env.paddle_pose().unwrap();
            println!("ball ({:.2},{:.2},{:.2})  paddle ({:.2},{:.2},{:.2}) roll {:.2}", b.x, b.y, b.z, p.position.x, p.position.y, p.position.z, p.roll);
        }
        if !r.info.events.is_empty() { println!("events {:?}", r.info.events.iter().map(|e| e.kind).collect::<Vec<_>>()); }
        if r.done { break; }
    }
}
