// Scripted returner probe: checks the env is winnable and reports stats.
use rallysim_core::dynamics::*;
use rallysim_core::env::*;
use rallysim_core::Vec3;

// Predict the ball state when it next crosses the plane y = y_plane (after
// the table bounce), using the true physics + this episode's restitution.
fn predict_crossing(ball: &BallState, params: &BallPhysicalParams, surface: &SurfaceParams,
                    table_e: f64, y_plane: f64) -> Option<(f64, Vec3, Vec3)> {
    let mut s = *ball;
    for _ in 0..4000 {
        let next = step_ball_flight(&s, params, 1e-3).ok()?;
        // table bounce
        if s.position.z > 0.0 && next.position.z <= 0.0
            && next.position.x.abs() <= surface.table_half_width
            && next.position.y.abs() <= surface.table_half_length {
            let b = bounce(&next, &Vec3::new(0.0, 0.0, 1.0), table_e).ok()?;
            s = b; s.position.z = 1e-6;
            continue;
        }
        if next.position.y <= y_plane {
            return Some((next.time, next.position, next.velocity));
        }
        if next.position.z < -0.7 { return None; }
        s = next;
    }
    None
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let latency_scale: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.0);
    let episodes: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(20);

    let mut cfg = EnvConfig::default();
    cfg.action_mode = ActionMode::TaskPosition;
    cfg.control_hz = 50;
    cfg.max_episode_steps = 100;
    cfg.fidelity.latency = rallysim_core::fidelity::LatencyModel::with_scale(latency_scale);
    cfg.distribution = BallDistribution::baseline();
    let y_plane = -1.5;

    let mut env = Env::new(cfg.clone()).unwrap();
    let mut hits = 0; let mut lands = 0; let mut rets = 0.0;
    for ep in 0..episodes {
        env.reset_with_seed(1000 + ep as u64).unwrap();
        let table_e = env.surface_overrides().unwrap().table_restitution;
        let launch = *env.ball_state().unwrap();
        let pred = predict_crossing(&launch, &cfg.ball, &cfg.surface, table_e, y_plane);
        let Some((t_hit, p_hit, v_hit)) = pred else { println!("ep {ep}: no crossing"); continue };
        let lat = env.episode_latencies().unwrap();
        // swing so the paddle arrives at contact with forward speed
        let swing_lead = 0.10 + lat.arm_action; // start swing this early
        let roll = 0.18 - 0.06 * v_hit.z; // tilt up more for falling balls
        let mut r_total = 0.0; let mut hit = false; let mut land = false;
        let mut done = false;
        let mut t = 0.0;
        while !done {
            let action = if t + swing_lead >= t_hit {
                vec![p_hit.x, y_plane + 0.25, p_hit.z, roll, 0.0]
            } else {
                vec![p_hit.x, y_plane - 0.12, p_hit.z, roll, 0.0]
            };
            let r = env.step(&action).unwrap();
            r_total += r.reward;
            for e in &r.info.events {
                if e.kind == EventKind::PaddleArm { hit = true; }
            }
            if r.info.outcome == Some(Outcome::WinPoint) { land = true; }
            done = r.done;
            t = env.time();
        }
        if hit { hits += 1; }
        if land { lands += 1; }
        rets += r_total;
        if ep < 8 { println!("ep {ep}: hit={hit} land={land} ret={r_total:.2} pred t={t_hit:.2} p=({:.2},{:.2},{:.2}) vz={:.2}", p_hit.x, p_hit.y, p_hit.z, v_hit.z); }
    }
    println!("latency {latency_scale}: hits {hits}/{episodes} lands {lands}/{episodes} mean shaped ret {:.2}", rets / episodes as f64);
}
