//! Workloads shared by the benchmarks.

use supercong::conjdsl::{builtin_registry, ConjectureSpec};
use supercong::harness::SweepConfig;

/// Primes at which the per-prime kernels are timed.
pub const PRIMES: [u64; 3] = [101, 1009, 9973];

/// Registry entries timed individually, one per evaluation path.
pub const ENTRIES: [&str; 5] = ["2.1", "2.25", "3.1", "3.24", "theorem-mortenson"];

pub fn entry(id: &str) -> &'static ConjectureSpec {
    builtin_registry().get(id).unwrap_or_else(|| panic!("no registry entry {id}"))
}

/// A single-threaded sweep over every entry up to `hi`.
pub fn full_sweep(hi: u64) -> SweepConfig {
    SweepConfig { lo: 3, hi, jobs: 1, ..Default::default() }
}
