//! Frobenius traces of a g-tuple of curves at every good prime up to x.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use smallvec::SmallVec;

use super::sieve;
use crate::curve::{curve_key, trace_with_seed, Curve, TraceCache, TraceMethod};
use crate::error::{Error, Result};

/// Blocks handed to each worker, on average; more blocks balance the uneven
/// per-prime cost without affecting the output.
const BLOCKS_PER_THREAD: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyConfig {
    pub curves: Vec<Curve>,
    pub x: u64,
    pub epsilon: f64,
    pub threads: usize,
    pub method: TraceMethod,
    pub seed: u64,
}

impl SurveyConfig {
    pub const DEFAULT_EPSILON: f64 = 0.1;

    pub fn new(curves: Vec<Curve>, x: u64) -> Result<Self> {
        let cfg = SurveyConfig {
            curves,
            x,
            epsilon: Self::DEFAULT_EPSILON,
            threads: 1,
            method: TraceMethod::Auto,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_method(mut self, method: TraceMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn g(&self) -> usize {
        self.curves.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.curves.is_empty() {
            return Err(Error::domain("a survey needs at least one curve"));
        }
        if self.x < 3 {
            return Err(Error::domain(format!(
                "x must be at least 3, got {}",
                self.x
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::domain(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.threads == 0 {
            return Err(Error::domain("threads must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub p: u64,
    /// `a_p(E_i)` in curve order.
    pub traces: SmallVec<[i64; 4]>,
    /// `−Σ a_p(E_i)`.
    pub a1p: i64,
}

impl TraceRecord {
    pub fn new(p: u64, traces: SmallVec<[i64; 4]>) -> Self {
        let a1p = -traces.iter().sum::<i64>();
        TraceRecord { p, traces, a1p }
    }
}

/// Records for every good prime `≤ x`, ascending, plus the bad primes skipped.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceTable {
    x: u64,
    g: usize,
    records: Vec<TraceRecord>,
    bad_primes: Vec<u64>,
    fallbacks: u64,
}

struct BlockResult {
    records: Vec<TraceRecord>,
    bad: Vec<u64>,
    fresh: Vec<(u64, u64, i64)>,
    fallbacks: u64,
}

fn trace_block(
    cfg: &SurveyConfig,
    keys: &[u64],
    cache: Option<&TraceCache>,
    lo: u64,
    hi: u64,
) -> Result<BlockResult> {
    let mut out = BlockResult {
        records: Vec::new(),
        bad: Vec::new(),
        fresh: Vec::new(),
        fallbacks: 0,
    };
    for p in sieve::primes_in(lo, hi) {
        if cfg.curves.iter().any(|c| !c.is_good(p)) {
            out.bad.push(p);
            continue;
        }
        let mut traces = SmallVec::new();
        for (c, &key) in cfg.curves.iter().zip(keys) {
            let a = match cache.and_then(|k| k.get_by_key(key, p)) {
                Some(a) => a,
                None => {
                    let o = trace_with_seed(c, p, cfg.method, cfg.seed)?;
                    out.fallbacks += o.fell_back as u64;
                    out.fresh.push((key, p, o.a_p));
                    o.a_p
                }
            };
            traces.push(a);
        }
        out.records.push(TraceRecord::new(p, traces));
    }
    Ok(out)
}

/// Contiguous blocks covering `[2, x]`.
fn blocks(x: u64, n: usize) -> Vec<(u64, u64)> {
    let span = x - 1;
    let n = (n as u64).clamp(1, span);
    (0..n)
        .map(|i| (2 + span * i / n, 1 + span * (i + 1) / n))
        .collect()
}

impl TraceTable {
    /// Computes every trace from scratch.
    pub fn compute(cfg: &SurveyConfig) -> Result<Self> {
        Self::build(cfg, None).map(|(t, _)| t)
    }

    /// Reads known traces from `cache` and appends the new ones.
    pub fn compute_cached(cfg: &SurveyConfig, cache: &mut TraceCache) -> Result<Self> {
        let (table, fresh) = Self::build(cfg, Some(cache))?;
        for (key, p, a) in fresh {
            cache.insert_by_key(key, p, a)?;
        }
        cache.flush()?;
        Ok(table)
    }

    fn build(
        cfg: &SurveyConfig,
        cache: Option<&TraceCache>,
    ) -> Result<(Self, Vec<(u64, u64, i64)>)> {
        cfg.validate()?;
        let keys: Vec<u64> = cfg.curves.iter().map(curve_key).collect();
        let ranges = blocks(cfg.x, cfg.threads * BLOCKS_PER_THREAD);
        let slots: Vec<Mutex<Option<Result<BlockResult>>>> =
            ranges.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);

        std::thread::scope(|s| {
            for _ in 0..cfg.threads.min(ranges.len()) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&(lo, hi)) = ranges.get(i) else {
                        break;
                    };
                    let r = trace_block(cfg, &keys, cache, lo, hi);
                    *slots[i]
                        .lock()
                        .expect("no worker panics while holding a slot") = Some(r);
                });
            }
        });

        // Merge in block order, so the result is independent of scheduling.
        let mut table = TraceTable {
            x: cfg.x,
            g: cfg.g(),
            records: Vec::new(),
            bad_primes: Vec::new(),
            fallbacks: 0,
        };
        let mut fresh = Vec::new();
        for slot in slots {
            let block = slot
                .into_inner()
                .expect("slot lock")
                .expect("every block was processed")?;
            table.records.extend(block.records);
            table.bad_primes.extend(block.bad);
            table.fallbacks += block.fallbacks;
            fresh.extend(block.fresh);
        }
        Ok((table, fresh))
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    /// Primes `≤ x` dividing some discriminant.
    pub fn bad_primes(&self) -> &[u64] {
        &self.bad_primes
    }

    /// `π(x)`.
    pub fn prime_count(&self) -> u64 {
        (self.records.len() + self.bad_primes.len()) as u64
    }

    pub fn good_count(&self) -> u64 {
        self.records.len() as u64
    }

    /// Number of primes where BSGS handed over to exhaustive counting.
    pub fn fallbacks(&self) -> u64 {
        self.fallbacks
    }

    /// The same survey truncated at `x' ≤ x`.
    pub fn prefix(&self, x: u64) -> Result<TraceTable> {
        if x > self.x {
            return Err(Error::domain(format!(
                "cannot extend a survey at x = {} to {x}",
                self.x
            )));
        }
        let cut = self.records.partition_point(|r| r.p <= x);
        let bad_cut = self.bad_primes.partition_point(|&p| p <= x);
        Ok(TraceTable {
            x,
            g: self.g,
            records: self.records[..cut].to_vec(),
            bad_primes: self.bad_primes[..bad_cut].to_vec(),
            fallbacks: 0,
        })
    }
}

/// One record per good prime `≤ x`, ascending.
pub fn batch_traces(cfg: &SurveyConfig) -> Result<Vec<TraceRecord>> {
    Ok(TraceTable::compute(cfg)?.records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> Curve {
        Curve::short("E1", 1, 1).unwrap()
    }

    #[test]
    fn single_curve_records() {
        let recs = batch_traces(&SurveyConfig::new(vec![e1()], 7).unwrap()).unwrap();
        let got: Vec<(u64, i64, i64)> = recs.iter().map(|r| (r.p, r.traces[0], r.a1p)).collect();
        assert_eq!(got, vec![(3, 0, 0), (5, -3, 3), (7, 3, -3)]);
    }

    #[test]
    fn duplicate_curve_doubles() {
        let recs = batch_traces(&SurveyConfig::new(vec![e1(), e1()], 7).unwrap()).unwrap();
        let a1p: Vec<i64> = recs.iter().map(|r| r.a1p).collect();
        assert_eq!(a1p, vec![0, 6, -6]);
    }

    #[test]
    fn bad_only_range_is_empty() {
        // x = 3 is the smallest accepted bound; restrict to p = 2 via prefix.
        let t = TraceTable::compute(&SurveyConfig::new(vec![e1()], 3).unwrap()).unwrap();
        let t2 = t.prefix(2).unwrap();
        assert!(t2.records().is_empty());
        assert_eq!(t2.bad_primes(), &[2]);
    }

    #[test]
    fn config_validation() {
        assert!(SurveyConfig::new(vec![], 100).is_err());
        assert!(SurveyConfig::new(vec![e1()], 2).is_err());
        assert!(SurveyConfig::new(vec![e1()], 100)
            .unwrap()
            .with_epsilon(0.0)
            .validate()
            .is_err());
    }

    #[test]
    fn blocks_tile_the_range() {
        for (x, n) in [(3u64, 8usize), (100, 7), (1000, 64), (10, 100)] {
            let b = blocks(x, n);
            assert_eq!(b[0].0, 2);
            assert_eq!(b.last().unwrap().1, x);
            for w in b.windows(2) {
                assert_eq!(w[0].1 + 1, w[1].0);
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_the_table() {
        let curves = vec![e1(), Curve::short("E2", 2, 3).unwrap()];
        let base = SurveyConfig::new(curves, 30_000).unwrap();
        let one = TraceTable::compute(&base).unwrap();
        for threads in [2, 5] {
            assert_eq!(
                TraceTable::compute(&base.clone().with_threads(threads)).unwrap(),
                one
            );
        }
    }

    #[test]
    fn cache_round_trip_gives_same_table() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SurveyConfig::new(vec![e1()], 20_000)
            .unwrap()
            .with_threads(3);
        let fresh = TraceTable::compute(&cfg).unwrap();
        let mut cache = TraceCache::open(dir.path().join("c.ftc")).unwrap();
        assert_eq!(TraceTable::compute_cached(&cfg, &mut cache).unwrap(), fresh);
        assert_eq!(cache.len() as u64, fresh.good_count());
        assert_eq!(TraceTable::compute_cached(&cfg, &mut cache).unwrap(), fresh);
    }
}
