// Constant-action grid: does any static target land the return?
use rallysim_core::env::*;

fn main() {
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
    cfg.task_roll_range = [-0.15, 0.7];
    cfg.task_yaw_range = [-0.5, 0.5];
    cfg.fidelity.randomization.paddle_restitution =
        rallysim_core::fidelity::RandomRange::new(0.8, 0.1);
    let mut env = Env::new(cfg).unwrap();
    for y in [-1.75_f64, -1.65, -1.55, -1.45, -1.35, -1.3] {
        for roll in [0.0_f64, 0.1, 0.2, 0.3, 0.45, 0.6] {
            let mut hits = 0; let mut lands = 0; let mut min_d = f64::INFINITY;
            for ep in 0..12 {
                env.reset_with_seed(400 + ep).unwrap();
                let act = vec![0.30, y, 0.30, roll, 0.0];
                let mut hit = false;
                loop {
                    let r = env.step(&act).unwrap();
                    for e in &r.info.events {
                        if e.kind == EventKind::PaddleArm { hit = true; }
                    }
                    if r.done {
                        if r.info.outcome == Some(Outcome::WinPoint) { lands += 1; }
                        break;
                    }
                }
                if hit { hits += 1; }
                // net distance proxy: closest |ball.y| after hit unavailable here; skip
                min_d = min_d.min(0.0);
            }
            print!("y{:+.2}/r{:.2}: {:>2}h{:>2}l  ", y, roll, hits, lands);
        }
        println!();
    }
}
