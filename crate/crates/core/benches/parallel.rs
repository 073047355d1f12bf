use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shiftgame::colouring::{build_generic_pyramid_seeded, seed_colouring, verify_parity_with};
use shiftgame::profiles::{harsanyi_regret_with, mc_regret_with, RegretOptions, StrategyProfile};
use shiftgame::rational::ratio;
use shiftgame::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn profile(depth: u32) -> StrategyProfile {
    StrategyProfile::from_fn(depth, |c| {
        let k = (c.code() % 11) as i64;
        (ratio(k, 10).min(ratio(1, 1)), ratio(10 - k.min(10), 10), ratio(k % 3, 2).min(ratio(1, 1)))
    })
    .unwrap()
}

fn regret(c: &mut Criterion) {
    let mut group = c.benchmark_group("harsanyi_regret");
    group.sample_size(10);
    for depth in [1u32, 2] {
        let p = profile(depth);
        for (name, exec) in MODES {
            let opts = RegretOptions { exec, ..RegretOptions::default() };
            group.bench_with_input(BenchmarkId::new(name, depth), &p, |b, p| {
                b.iter(|| harsanyi_regret_with(p, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_regret");
    group.sample_size(10);
    let p = profile(2);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| mc_regret_with(&p, 20_000, 7, exec).unwrap()));
    }
    group.finish();
}

fn parity(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_parity");
    let g = build_generic_pyramid_seeded(16, 7).unwrap();
    let colouring = seed_colouring(&g).unwrap();
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| verify_parity_with(&g, &colouring, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, regret, monte_carlo, parity);
criterion_main!(benches);
