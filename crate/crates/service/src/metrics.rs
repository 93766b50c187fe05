use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use hdrhistogram::Histogram;
use serde::{Deserialize, Serialize};

/// Service counters and the per-tile render latency histogram.
pub struct Metrics {
    pub tiles_rendered: AtomicU64,
    pub cache_hits: AtomicU64,
    pub cache_misses: AtomicU64,
    /// Requests answered with a transparent tile because the tile lies outside the dataset.
    pub tiles_skipped: AtomicU64,
    /// Requests that joined an identical in-flight task.
    pub deduplicated: AtomicU64,
    pub tasks_enqueued: AtomicU64,
    pub rejected: AtomicU64,
    pub retries: AtomicU64,
    pub failures: AtomicU64,
    render_us: Mutex<Histogram<u64>>,
}

impl Default for Metrics {
    fn default() -> Self {
        Metrics {
            tiles_rendered: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
            cache_misses: AtomicU64::new(0),
            tiles_skipped: AtomicU64::new(0),
            deduplicated: AtomicU64::new(0),
            tasks_enqueued: AtomicU64::new(0),
            rejected: AtomicU64::new(0),
            retries: AtomicU64::new(0),
            failures: AtomicU64::new(0),
            render_us: Mutex::new(Histogram::new_with_bounds(1, 3_600_000_000, 3).expect("valid bounds")),
        }
    }
}

/// Latency quantiles in milliseconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub count: u64,
    pub min: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p90: f64,
    pub p95: f64,
    pub p99: f64,
    pub max: f64,
    pub mean: f64,
}

impl LatencySummary {
    pub fn from_histogram(h: &Histogram<u64>, unit_per_ms: f64) -> Self {
        if h.is_empty() {
            return LatencySummary::default();
        }
        let q = |x: f64| h.value_at_quantile(x) as f64 / unit_per_ms;
        LatencySummary {
            count: h.len(),
            min: h.min() as f64 / unit_per_ms,
            p25: q(0.25),
            p50: q(0.5),
            p75: q(0.75),
            p90: q(0.9),
            p95: q(0.95),
            p99: q(0.99),
            max: h.max() as f64 / unit_per_ms,
            mean: h.mean() / unit_per_ms,
        }
    }

    /// Whether the quantiles are non-decreasing from min to max.
    pub fn is_monotone(&self) -> bool {
        let v = [self.min, self.p25, self.p50, self.p75, self.p90, self.p95, self.p99, self.max];
        v.windows(2).all(|w| w[0] <= w[1])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsSnapshot {
    pub tiles_rendered: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub tiles_skipped: u64,
    pub deduplicated: u64,
    pub tasks_enqueued: u64,
    pub rejected: u64,
    pub retries: u64,
    pub failures: u64,
    pub queue_depth: u64,
    pub in_flight: u64,
    pub cache_entries: u64,
    pub render_latency_ms: LatencySummary,
}

impl Metrics {
    pub fn incr(counter: &AtomicU64) {
        counter.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_render(&self, elapsed: Duration) {
        let us = (elapsed.as_micros() as u64).max(1);
        self.render_us.lock().unwrap().saturating_record(us);
    }

    pub fn render_histogram(&self) -> Histogram<u64> {
        self.render_us.lock().unwrap().clone()
    }

    pub fn snapshot(&self, queue_depth: usize, in_flight: usize, cache_entries: usize) -> MetricsSnapshot {
        let get = |c: &AtomicU64| c.load(Ordering::Relaxed);
        MetricsSnapshot {
            tiles_rendered: get(&self.tiles_rendered),
            cache_hits: get(&self.cache_hits),
            cache_misses: get(&self.cache_misses),
            tiles_skipped: get(&self.tiles_skipped),
            deduplicated: get(&self.deduplicated),
            tasks_enqueued: get(&self.tasks_enqueued),
            rejected: get(&self.rejected),
            retries: get(&self.retries),
            failures: get(&self.failures),
            queue_depth: queue_depth as u64,
            in_flight: in_flight as u64,
            cache_entries: cache_entries as u64,
            render_latency_ms: LatencySummary::from_histogram(&self.render_us.lock().unwrap(), 1000.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_snapshot_is_zero() {
        assert_eq!(Metrics::default().snapshot(0, 0, 0), MetricsSnapshot::default());
    }

    #[test]
    fn quantiles_are_monotone() {
        let m = Metrics::default();
        for ms in [5u64, 1, 40, 3, 3, 9, 120, 7] {
            m.record_render(Duration::from_millis(ms));
        }
        let s = m.snapshot(0, 0, 0).render_latency_ms;
        assert_eq!(s.count, 8);
        assert!(s.is_monotone());
        assert!((s.max - 120.0).abs() < 1.2, "{}", s.max);
    }
}
