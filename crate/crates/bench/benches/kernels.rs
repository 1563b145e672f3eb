use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use jumpga::analytics::jump_to_opt_bound;
use jumpga::{standard_bit_mutation, uniform_crossover, BitString, MutationRate, RandomSource, TieBreakRule};
use jumpga_bench::plateau_fixture;

fn bit_ops(c: &mut Criterion) {
    let mut rng = RandomSource::new(1);
    let x = rng.bit_string(1000);
    let y = rng.bit_string(1000);
    c.bench_function("hamming_1000", |b| b.iter(|| black_box(&x).hamming_distance(black_box(&y))));
    c.bench_function("crossover_1000", |b| b.iter(|| uniform_crossover(&x, &y, &mut rng)));
    let rate = MutationRate::new(1.0, 1000).unwrap();
    c.bench_function("mutation_1000", |b| b.iter(|| standard_bit_mutation(&x, &rate, &mut rng)));
    let ones = BitString::ones(1000);
    c.bench_function("ones_count_1000", |b| b.iter(|| black_box(&ones).ones_count()));
}

fn plateau_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("plateau_step_n100_mu50");
    for id in jumpga::diversity::RULE_IDS {
        let rule = TieBreakRule::from_id(id, 8.0, 1.0).unwrap();
        let (engine, pop) = plateau_fixture(100, 4, 50, rule, 7);
        let mut rng = RandomSource::new(3);
        group.bench_function(id, |b| {
            b.iter_batched_ref(|| pop.clone(), |p| engine.step(p, &mut rng), BatchSize::SmallInput)
        });
    }
    group.finish();
}

fn closed_form(c: &mut Criterion) {
    c.bench_function("success_probability_n5000_k5", |b| {
        b.iter(|| jump_to_opt_bound(black_box(5000), 5, 1.0, 5))
    });
}

criterion_group!(benches, bit_ops, plateau_steps, closed_form);
criterion_main!(benches);
