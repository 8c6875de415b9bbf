use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conjdsl::{
    builtin_registry, check_conjecture, CheckOptions, ConjectureSpec, Outcome, PrimeServices, Registry,
};
use crate::ntbase::primes_between;

use super::report::{Report, ReportFormat};

/// Largest prime bound accepted without `allow_large`.
pub const DEFAULT_PRIME_LIMIT: u64 = 10_000;
/// Exponent cap applied when none is given.
pub const DEFAULT_EXPONENT_CAP: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lo: u64,
    pub hi: u64,
    /// Glob patterns on entry ids; empty selects every entry.
    pub conjectures: Vec<String>,
    /// Upper bound on the comparison exponent; `None` means the default cap.
    pub exponent_cap: Option<u32>,
    /// Worker threads; 0 uses all available cores.
    pub jobs: usize,
    pub fail_fast: bool,
    pub allow_large: bool,
    pub include_unsupported: bool,
    pub report: Option<PathBuf>,
    pub format: ReportFormat,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            lo: 3,
            hi: 200,
            conjectures: vec![],
            exponent_cap: None,
            jobs: 0,
            fail_fast: false,
            allow_large: false,
            include_unsupported: false,
            report: None,
            format: ReportFormat::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("lower prime bound must be at least 3 (got {0})")]
    LoTooSmall(u64),
    #[error("empty prime range {lo}..{hi}")]
    EmptyRange { lo: u64, hi: u64 },
    #[error("upper bound {hi} is at least {DEFAULT_PRIME_LIMIT}; pass --allow-large to run it")]
    TooLarge { hi: u64 },
    #[error("exponent cap must be between 1 and 5 (got {0})")]
    BadCap(u32),
    #[error("p^{e} does not fit in 64 bits for p up to {hi}")]
    ModulusOverflow { hi: u64, e: u32 },
    #[error("invalid conjecture pattern `{0}`")]
    BadPattern(String),
    #[error("invalid prime range `{0}`; expected LO..HI")]
    BadRange(String),
}

impl SweepConfig {
    /// The exponent cap actually applied.
    pub fn effective_cap(&self) -> u32 {
        self.exponent_cap.unwrap_or(DEFAULT_EXPONENT_CAP)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.lo < 3 {
            return Err(ConfigError::LoTooSmall(self.lo));
        }
        if self.hi < self.lo {
            return Err(ConfigError::EmptyRange { lo: self.lo, hi: self.hi });
        }
        if self.hi >= DEFAULT_PRIME_LIMIT && !self.allow_large {
            return Err(ConfigError::TooLarge { hi: self.hi });
        }
        let e = self.effective_cap();
        if !(1..=5).contains(&e) {
            return Err(ConfigError::BadCap(e));
        }
        if (self.hi as u128).pow(e) > u64::MAX as u128 {
            return Err(ConfigError::ModulusOverflow { hi: self.hi, e });
        }
        self.patterns()?;
        Ok(())
    }

    fn patterns(&self) -> Result<Vec<glob::Pattern>, ConfigError> {
        self.conjectures
            .iter()
            .flat_map(|s| s.split(','))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| glob::Pattern::new(s).map_err(|_| ConfigError::BadPattern(s.to_string())))
            .collect()
    }

    /// Entries of `registry` selected by the id filter, in registry order.
    pub fn select<'r>(&self, registry: &'r Registry) -> Result<Vec<&'r ConjectureSpec>, ConfigError> {
        let pats = self.patterns()?;
        Ok(registry.entries.iter().filter(|e| pats.is_empty() || pats.iter().any(|p| p.matches(&e.id))).collect())
    }
}

/// Parse `LO..HI` (inclusive).
pub fn parse_range(s: &str) -> Result<(u64, u64), ConfigError> {
    let bad = || ConfigError::BadRange(s.to_string());
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let lo = a.trim().parse().map_err(|_| bad())?;
    let hi = b.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

/// Sweep the builtin registry.
pub fn run_sweep(config: &SweepConfig) -> Result<Report, ConfigError> {
    run_sweep_with(builtin_registry(), config)
}

struct PrimeResult {
    records: Vec<crate::conjdsl::VerificationRecord>,
    timings: Vec<Duration>,
}

/// Sweep `registry` over the primes of `config`, one prime per task.
pub fn run_sweep_with(registry: &Registry, config: &SweepConfig) -> Result<Report, ConfigError> {
    config.validate()?;
    let specs = config.select(registry)?;
    let primes = primes_between(config.lo, config.hi);
    let opts =
        CheckOptions { exponent_cap: Some(config.effective_cap()), include_unsupported: config.include_unsupported };
    let first_fail = AtomicU64::new(u64::MAX);
    let started = Instant::now();

    let work = |&p: &u64| -> Option<PrimeResult> {
        if config.fail_fast && p > first_fail.load(Ordering::Relaxed) {
            return None;
        }
        let services = PrimeServices::new(p);
        let mut records = Vec::new();
        let mut timings = Vec::with_capacity(specs.len());
        for spec in &specs {
            let t = Instant::now();
            records.extend(check_conjecture(spec, p, &services, &registry.globals, opts));
            timings.push(t.elapsed());
        }
        if config.fail_fast && records.iter().any(|r| matches!(r.outcome, Outcome::Fail { .. })) {
            first_fail.fetch_min(p, Ordering::Relaxed);
        }
        Some(PrimeResult { records, timings })
    };

    let per_prime: Vec<(u64, Option<PrimeResult>)> = if config.jobs == 1 {
        primes.iter().map(|p| (*p, work(p))).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build().expect("thread pool construction");
        pool.install(|| primes.par_iter().map(|p| (*p, work(p))).collect())
    };

    let stop = first_fail.load(Ordering::Relaxed);
    let mut results = Vec::new();
    let mut seconds = vec![0f64; specs.len()];
    for (p, res) in per_prime {
        if p > stop {
            break;
        }
        let res = res.expect("primes up to the first failure are always checked");
        for (s, t) in seconds.iter_mut().zip(&res.timings) {
            *s += t.as_secs_f64();
        }
        results.extend(res.records);
    }
    let timings = specs.iter().map(|s| s.id.clone()).zip(seconds).collect();
    Ok(Report::assemble(config.clone(), &specs, results, timings, started.elapsed().as_secs_f64()))
}
