use criterion::{black_box, criterion_group, criterion_main, Criterion};
use pbso_core::credit::{bounded_returns, pooled_advantages, ReturnConfig, ReturnSequence};
use pbso_core::harness::RunConfig;
use pbso_core::optimizer::{surrogate_loss, OptimStep};
use pbso_core::synthenv::{
    generate_tasks, sample_trajectory, solved_policy, Encoder, EnvConfig, EpisodeConfig,
};
use pbso_core::transcript::{parse_transcript, render_transcript};
use pbso_core::verifiers::RewardVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bench_returns(c: &mut Criterion) {
    let cfg = ReturnConfig::default();
    let rv = RewardVector::new(vec![1, 0, 1, 0, 1], 1);
    c.bench_function("bounded_returns/T5", |b| {
        b.iter(|| bounded_returns(black_box(&rv), black_box(&cfg)).unwrap())
    });

    let group: Vec<ReturnSequence> = (0..16)
        .map(|i| ReturnSequence { values: vec![(i % 3) as f64 * 0.5; 4] })
        .collect();
    c.bench_function("pooled_advantages/16x4", |b| {
        b.iter(|| pooled_advantages(black_box(&group), 1e-8).unwrap())
    });
}

fn bench_episode(c: &mut Criterion) {
    let env = EnvConfig::default();
    let enc = Encoder::new(env, pbso_core::optimizer::PolicyStructure::LinearSoftmax, 5);
    let policy = solved_policy(&enc);
    let tasks = generate_tasks(&env, 7, 4, "bench-");
    let cfg = EpisodeConfig::default();
    c.bench_function("sample_trajectory/default", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        b.iter(|| sample_trajectory(black_box(&policy), &enc, &tasks[0], &cfg, &mut rng))
    });

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let episode = sample_trajectory(&policy, &enc, &tasks[1], &cfg, &mut rng);
    let text = render_transcript(&episode.trajectory).unwrap();
    c.bench_function("parse_transcript/episode", |b| {
        b.iter(|| parse_transcript(black_box(&text)).unwrap())
    });
}

fn bench_step(c: &mut Criterion) {
    let cfg = RunConfig {
        steps: 1,
        tasks_per_batch: 8,
        group_size: 8,
        n_train_tasks: 16,
        ..RunConfig::default()
    };
    c.bench_function("run_training/1step_8x8", |b| {
        b.iter(|| pbso_core::harness::run_training(black_box(&cfg)).unwrap())
    });

    let enc = Encoder::new(cfg.env_config(), cfg.policy, cfg.max_iterations);
    let policy = solved_policy(&enc);
    let tasks = generate_tasks(&cfg.env_config(), 9, 4, "bench-");
    let questions: Vec<_> = tasks.iter().map(|t| t.question(&cfg.env_config())).collect();
    let verifiers = pbso_core::synthenv::oracle_verifiers(&cfg.env_config(), &tasks);
    let data = pbso_core::harness::collect_step(
        &policy,
        &cfg,
        &enc,
        &tasks,
        &questions,
        &verifiers,
        0,
    )
    .unwrap();
    let opt = OptimStep::default();
    c.bench_function("surrogate_loss/batch", |b| {
        b.iter(|| surrogate_loss(black_box(&policy), black_box(&data.batch), &opt).unwrap())
    });
}

criterion_group!(benches, bench_returns, bench_episode, bench_step);
criterion_main!(benches);
