//! Streaming-friendly sample statistics, generic over the float type.
//!
//! The summaries here use nearest-rank percentiles and the sample variance
//! (n−1 divisor). Concrete f64 aliases are exported from the crate root.

use std::collections::BTreeMap;

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

/// Percentile grid stored for every numeric field.
pub const PERCENTILE_GRID: [u8; 7] = [1, 5, 25, 50, 75, 95, 99];

/// Summary of a numeric sample: moments, extremes, and the percentile grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericSummary<F> {
    pub count: u64,
    pub mean: F,
    pub variance: F,
    pub min: F,
    pub max: F,
    pub percentiles: BTreeMap<u8, F>,
}

/// Nearest-rank percentile: the ⌈p/100·n⌉-th order statistic of a sorted sample.
pub fn nearest_rank<F: Float>(sorted: &[F], p: u8) -> F {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = ((p as f64 / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Computes the full numeric summary of a sample. Returns `None` on empty input.
pub fn compute_stats<F: Float + FromPrimitive>(values: &[F]) -> Option<NumericSummary<F>> {
    if values.is_empty() {
        return None;
    }
    let n = values.len();
    let nf = F::from_usize(n)?;
    let sum = values.iter().fold(F::zero(), |acc, &v| acc + v);
    let mean = sum / nf;
    let variance = if n <= 1 {
        F::zero()
    } else {
        let ss = values
            .iter()
            .fold(F::zero(), |acc, &v| acc + (v - mean) * (v - mean));
        ss / F::from_usize(n - 1)?
    };
    let mut sorted: Vec<F> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut percentiles = BTreeMap::new();
    for p in PERCENTILE_GRID {
        percentiles.insert(p, nearest_rank(&sorted, p));
    }
    Some(NumericSummary {
        count: n as u64,
        mean,
        variance,
        min: sorted[0],
        max: sorted[n - 1],
        percentiles,
    })
}

/// Product-moment correlation coefficient. `None` when either series is
/// constant or shorter than 2 (undefined correlation, treated as no dependency).
pub fn pearson<F: Float + FromPrimitive>(x: &[F], y: &[F]) -> Option<F> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let nf = F::from_usize(x.len())?;
    let mx = x.iter().fold(F::zero(), |a, &v| a + v) / nf;
    let my = y.iter().fold(F::zero(), |a, &v| a + v) / nf;
    let mut sxy = F::zero();
    let mut sxx = F::zero();
    let mut syy = F::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= F::zero() || syy <= F::zero() {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Correlation ratio √η² for a categorical controller over a numeric response.
/// `None` when the response is constant or groups are degenerate.
pub fn correlation_ratio<F: Float + FromPrimitive>(groups: &[Vec<F>]) -> Option<F> {
    let total_n: usize = groups.iter().map(|g| g.len()).sum();
    if total_n < 2 || groups.len() < 2 {
        return None;
    }
    let nf = F::from_usize(total_n)?;
    let grand_sum = groups
        .iter()
        .flat_map(|g| g.iter())
        .fold(F::zero(), |a, &v| a + v);
    let grand_mean = grand_sum / nf;
    let mut ss_between = F::zero();
    let mut ss_total = F::zero();
    for g in groups {
        if g.is_empty() {
            continue;
        }
        let gn = F::from_usize(g.len())?;
        let gmean = g.iter().fold(F::zero(), |a, &v| a + v) / gn;
        ss_between = ss_between + gn * (gmean - grand_mean) * (gmean - grand_mean);
        for &v in g {
            ss_total = ss_total + (v - grand_mean) * (v - grand_mean);
        }
    }
    if ss_total <= F::zero() {
        return None;
    }
    Some((ss_between / ss_total).sqrt())
}

/// Bounded value→count table with an overflow bucket.
///
/// Up to `retain_limit` distinct keys are tracked exactly; once the limit is
/// hit, counts for unseen keys accumulate in `overflow`. `finalize(k)` trims
/// the table to the top-k entries by count (ties broken by key order).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreqTable {
    pub entries: BTreeMap<String, u64>,
    pub overflow: u64,
    #[serde(skip, default = "default_retain")]
    retain_limit: usize,
}

// retain_limit is bookkeeping, not part of the observed distribution
impl PartialEq for FreqTable {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && self.overflow == other.overflow
    }
}

impl Eq for FreqTable {}

fn default_retain() -> usize {
    usize::MAX
}

impl FreqTable {
    pub fn new(retain_limit: usize) -> FreqTable {
        FreqTable {
            entries: BTreeMap::new(),
            overflow: 0,
            retain_limit,
        }
    }

    pub fn record(&mut self, key: &str) {
        if let Some(c) = self.entries.get_mut(key) {
            *c += 1;
        } else if self.entries.len() < self.retain_limit {
            self.entries.insert(key.to_string(), 1);
        } else {
            self.overflow += 1;
        }
    }

    /// Σ counts + overflow.
    pub fn total(&self) -> u64 {
        self.entries.values().sum::<u64>() + self.overflow
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    /// True when some observations fell outside the tracked entries.
    pub fn overflowed(&self) -> bool {
        self.overflow > 0
    }

    /// Trims to the `k` highest-count entries, moving the rest to overflow.
    pub fn finalize(&mut self, k: usize) {
        if self.entries.len() <= k {
            return;
        }
        let mut ranked: Vec<(String, u64)> = self
            .entries
            .iter()
            .map(|(key, &c)| (key.clone(), c))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut kept = BTreeMap::new();
        for (key, count) in ranked.iter().take(k) {
            kept.insert(key.clone(), *count);
        }
        for (_, count) in ranked.iter().skip(k) {
            self.overflow += count;
        }
        self.entries = kept;
    }

    pub fn merge(&mut self, other: &FreqTable) {
        for (key, &count) in &other.entries {
            if let Some(c) = self.entries.get_mut(key) {
                *c += count;
            } else if self.entries.len() < self.retain_limit {
                self.entries.insert(key.clone(), count);
            } else {
                self.overflow += count;
            }
        }
        self.overflow += other.overflow;
    }
}
