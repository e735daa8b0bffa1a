use criterion::{criterion_group, criterion_main, Criterion};
use regionscore::crps::crps_cases;
use regionscore::evaluation::score_table;
use regionscore::{compare, murphy_curve, CompareOptions, Functional, ScoringSpec, ThetaGrid};
use regionscore_bench::{arctan_at_ten, ensembles, paired_cases, split_at_ten};
use std::hint::black_box;

fn scoring(c: &mut Criterion) {
    let (a, b) = paired_cases(10_000);
    let spec = ScoringSpec::squared_error();
    let rect = split_at_ten();
    let arctan = arctan_at_ten();

    c.bench_function("score_table rectangular 10k", |bench| {
        bench.iter(|| score_table(black_box(&a), &spec, &rect).unwrap())
    });
    c.bench_function("score_table arctan 10k", |bench| {
        bench.iter(|| score_table(black_box(&a), &spec, &arctan).unwrap())
    });
    let huber = ScoringSpec::huber_loss(2.0).unwrap();
    c.bench_function("score_table huber arctan 10k", |bench| {
        bench.iter(|| score_table(black_box(&a), &huber, &arctan).unwrap())
    });
    c.bench_function("compare normal ci 10k", |bench| {
        bench.iter(|| compare(&a, &b, &spec, &rect, &CompareOptions::default()).unwrap())
    });

    let systems = vec![("A".to_string(), a.clone()), ("B".to_string(), b.clone())];
    let grid = ThetaGrid::default();
    let mean = Functional::Expectile { alpha: 0.5 };
    c.bench_function("murphy 501 thresholds 2x10k", |bench| {
        bench.iter(|| murphy_curve(&systems, &mean, &grid).unwrap())
    });

    let ens = ensembles(1_000, 20);
    c.bench_function("crps 1k ensembles of 20", |bench| {
        bench.iter(|| crps_cases(black_box(&ens), &arctan).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = scoring
}
criterion_main!(benches);
