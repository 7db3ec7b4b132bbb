use criterion::{black_box, criterion_group, criterion_main, Criterion};
use mariomix_core::*;

fn simulator(c: &mut Criterion) {
    let level = bundled_levels().remove(0);
    let start = WorldState::initial(&level);
    c.bench_function("macro action RunRight", |b| {
        b.iter(|| apply_macro_action(black_box(&start), &level, Action::RunRight).unwrap())
    });
    c.bench_function("abstract state", |b| b.iter(|| abstract_state(black_box(&start), &level)));
    c.bench_function("episode of JumpRight", |b| {
        b.iter(|| record_episode(&level, |_| Action::JumpRight, 0, 600))
    });
}

fn exploration(c: &mut Criterion) {
    let level = bundled_levels().remove(1);
    c.bench_function("explore 5k actions", |b| {
        b.iter(|| explore(&level, ExploreConfig::with_budget(5_000), 0).unwrap())
    });
}

fn solving(c: &mut Criterion) {
    let level = bundled_levels().remove(2);
    let model = explore(&level, ExploreConfig::with_budget(20_000), 0).unwrap();
    let spec = builtin_reward_specs().remove(0);
    let config = SolverConfig::default();
    c.bench_function("value iteration", |b| {
        b.iter(|| value_iteration(&model, &spec, &config).unwrap())
    });
}

criterion_group!(benches, simulator, exploration, solving);
criterion_main!(benches);
