//! Hot-path benchmarks: physics substeps, kinematics, task-space control,
//! environment stepping, fusion, and perturbation sampling.

use criterion::{criterion_group, criterion_main, Criterion};
use rallysim_core::dynamics::{
    default_chain, step_ball_flight, task_space_command, BallPhysicalParams, BallState, JointVec,
    TaskSpaceParams,
};
use rallysim_core::env::{Env, EnvConfig};
use rallysim_core::realbridge::{fuse_sensor_stream, FusionConfig, Modality, SensorStream};
use rallysim_core::trainer::sample_perturbations;
use rallysim_core::Vec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn bench_ball_flight(c: &mut Criterion) {
    let params = BallPhysicalParams::default();
    let state = BallState {
        position: Vec3::new(0.3, 1.7, 0.58),
        velocity: Vec3::new(0.2, -6.8, 0.3),
        angular_velocity: Vec3::zeros(),
        time: 0.0,
    };
    c.bench_function("ball_flight_10ms", |b| {
        b.iter(|| step_ball_flight(black_box(&state), &params, 0.01).unwrap())
    });
}

fn bench_kinematics(c: &mut Criterion) {
    let chain = default_chain();
    let q = JointVec::from_fn(|i, _| (i as f64 * 0.13).sin() * 0.4);
    let qdot = JointVec::from_element(0.5);
    c.bench_function("fk_with_velocity", |b| b.iter(|| chain.fk_with_velocity(black_box(&q), &qdot)));
    c.bench_function("task_jacobian", |b| b.iter(|| chain.jacobian_task(black_box(&q))));
    let target = chain.fk_unchecked(&JointVec::zeros());
    let params = TaskSpaceParams::default();
    c.bench_function("dls_command", |b| {
        b.iter(|| task_space_command(&chain, black_box(&q), &target, &params))
    });
}

fn bench_env_step(c: &mut Criterion) {
    let cfg = EnvConfig::default();
    let mut env = Env::new(cfg).unwrap();
    env.reset_with_seed(1).unwrap();
    let action = vec![0.1; 8];
    c.bench_function("env_step_100hz", |b| {
        b.iter(|| {
            if env.step(black_box(&action)).map(|r| r.done).unwrap_or(true) {
                env.reset_with_seed(1).unwrap();
            }
        })
    });
}

fn bench_fusion(c: &mut Criterion) {
    let mut stream = SensorStream::new(Modality::Ball, 125.0, 3);
    for k in 0..64 {
        let t = k as f64 / 125.0;
        stream.push(t, &[0.3 + 0.01 * t, 1.5 - 6.0 * t, 0.5 - t]);
    }
    let cfg = FusionConfig::default();
    c.bench_function("fuse_sensor_stream", |b| {
        b.iter(|| fuse_sensor_stream(black_box(&stream), 0.51, &cfg).unwrap())
    });
}

fn bench_perturbations(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    c.bench_function("orthogonal_perturbations_32x325", |b| {
        b.iter(|| sample_perturbations(325, 32, true, &mut rng))
    });
}

criterion_group!(
    benches,
    bench_ball_flight,
    bench_kinematics,
    bench_env_step,
    bench_fusion,
    bench_perturbations
);
criterion_main!(benches);
