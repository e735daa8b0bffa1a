//! Fixtures shared by the benchmarks.

use regionscore::{
    generate_synthetic, make_arctan_partition, make_rectangular_partition, EnsembleCase,
    ForecastCase, IntervalDomain, PartitionOfUnity, SyntheticConfig,
};

pub fn paired_cases(n: usize) -> (Vec<ForecastCase>, Vec<ForecastCase>) {
    let d = generate_synthetic(&SyntheticConfig {
        n,
        seed: 1,
        ..Default::default()
    })
    .expect("valid synthetic config");
    (d.a, d.b)
}

pub fn split_at_ten() -> PartitionOfUnity {
    make_rectangular_partition(IntervalDomain::real_line(), &[10.0]).expect("valid cutpoint")
}

pub fn arctan_at_ten() -> PartitionOfUnity {
    make_arctan_partition(IntervalDomain::real_line(), 10.0).expect("valid centre")
}

/// Ensembles of `members` forecasts built from consecutive synthetic cases.
pub fn ensembles(n: usize, members: usize) -> Vec<EnsembleCase> {
    let (a, _) = paired_cases(n * members);
    a.chunks(members)
        .enumerate()
        .map(|(i, c)| EnsembleCase {
            case_id: i.to_string(),
            observation: c[0].observation,
            members: c.iter().map(|m| m.forecast).collect(),
        })
        .collect()
}
