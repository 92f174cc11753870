//! Shared setup for the kernel benchmarks.

use hbcount::arith::{r2_sieve, R2Table};

/// r₂ table covering [0, limit].
pub fn r2_to(limit: u64) -> R2Table {
    r2_sieve(0, limit + 1).expect("bench table for small limits")
}
