//! Consistent scoring functions for point forecasts of quantiles, expectiles
//! and Huber means, their decomposition over partitions of unity, threshold
//! weighted CRPS, Murphy curves and paired forecast comparison.
//!
//! ```
//! use regionscore::{build_decomposition, make_rectangular_partition, score_decomposed};
//! use regionscore::{IntervalDomain, ScoringSpec};
//!
//! let spec = ScoringSpec::squared_error();
//! let p = make_rectangular_partition(IntervalDomain::real_line(), &[10.0]).unwrap();
//! let gens = build_decomposition(&spec, &p).unwrap();
//! let s = score_decomposed(&gens, &spec, 12.0, 8.0).unwrap();
//! assert_eq!(s.per_component, vec![4.0, 12.0]);
//! assert_eq!(s.total, 16.0);
//! ```

// `!(a >= b)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod crps;
pub mod decomposition;
pub mod elementary;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod numeric;
pub mod partition;
pub mod rng;
pub mod scoring;

pub use crps::{crps, crps_decomposed, CrpsDecomposition, EmpiricalCDF, EnsembleCase};
pub use decomposition::{
    build_decomposition, build_decomposition_with, eval_g_j, eval_phi_j, eval_phi_prime_j,
    score_decomposed, DecomposedGenerator, DecomposedScore, DecompositionOptions,
};
pub use elementary::{
    elementary_score, murphy_curve, verify_mixture, MixingMeasure, MixtureGrid, MurphyCurve,
    ThetaGrid,
};
pub use error::{Error, Result};
pub use evaluation::{
    compare, generate_synthetic, simulate_hedging, CiMethod, CompareOptions, ComparisonReport,
    HedgingConfig, HedgingOption, SyntheticConfig,
};
pub use partition::{
    eval_weight, make_arctan_partition, make_normalized_partition, make_rectangular_partition,
    make_trapezoidal_partition, validate_partition, IntervalDomain, PartitionOfUnity,
    PartitionReport, ProbeGrid, RawFunction, WeightFunction,
};
pub use scoring::{
    cap, functional_value, score, DiscreteDistribution, ForecastCase, Functional, FunctionalValue,
    GeneratorSpec, ScoringSpec,
};
