//! Exact lattice-point counting on the first Heisenberg group under the
//! Cygan-Koranyi gauge.
//!
//! The central object is the step function S(x): the number of integer points
//! (a, b, w) with (a² + b²)² + w² < x, equivalently the r₂-weighted count of
//! pairs (m, n) with m² + n² < x. The crate computes S(x) exactly by segmented
//! sieving, evaluates the error term E(x) = S(x) − (π²/2)x and its one-sided
//! limits at every jump, and exposes the smoothed and Riesz-mean companions of
//! S together with the coefficient series that ties them to π²/4.
//!
//! Layers, bottom up:
//!
//! * [`arith`] — integer square roots, the r₂ sieve and the jump density ρ₁,
//!   all exact and windowed so disjoint ranges sieve independently.
//! * [`counting`] — S(x), the smoothed sum M(x), and error samples at jumps.
//! * [`gauge`] — Heisenberg group law, dilations, the gauge family, plus the
//!   two independent oracles (exact enumeration, Monte-Carlo volume).
//! * [`riesz`] — Riesz means E_ϱ, the normalized oscillation Q, the series
//!   coefficients cₙ and the square-root expansion behind them.
//! * [`scanner`] — segment-parallel sweep of all jumps up to a limit, keeping
//!   signed running records of E(x)/√x with deterministic output.
//! * [`verify`] — the release checks, runnable from the CLI or the test suite.

pub mod arith;
pub mod counting;
pub mod fmt;
pub mod gauge;
pub mod riesz;
pub mod scanner;
pub mod verify;

mod num;
mod rng;

pub use arith::{isqrt_floor, isqrt_strict, r2_sieve, rho_segment, R2Table, RhoSegment};
pub use counting::{ball_count, jump_sample, smoothed_sum, CountSample};
pub use gauge::{brute_count, brute_count_exact, mc_volume, GaugeParams, HPoint, McVolume};
pub use riesz::{
    coefficient_table, decomposed_sum, q_value, remainder_ratio, riesz_error, series_coeff,
    series_partial_sum, sqrt_series, taylor_coeff, CoefficientTable, QSample, RieszSample,
    SqrtSeries,
};
pub use scanner::{
    decade_summary, scan, CsvSink, DecadeStats, NullSink, RecordEntry, RecordTable, SampleSink,
    ScanConfig, ScanReport, VecSink,
};
