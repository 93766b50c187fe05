use std::future::Future;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use hdrhistogram::Histogram;
use pixdrive_core::{Catalog, Style, TileKey};
use pixdrive_service::{GridSource, LatencySummary, ServiceConfig, ServiceError, TileRequest, TileService};
use serde::Serialize;

use crate::workload::Rate;

/// A service over `catalog` with the result cache disabled.
pub fn bench_service(catalog: Arc<Catalog>, workers: usize, threads_per_worker: usize) -> Result<Arc<TileService>> {
    let config = ServiceConfig {
        workers,
        threads_per_worker,
        cache_enabled: false,
        queue_capacity: 1 << 20,
        ..ServiceConfig::default()
    };
    Ok(Arc::new(TileService::new(config, catalog).context("starting tile service")?))
}

/// Runs a future to completion on a fresh multi-threaded runtime.
pub fn block_on<F: Future>(f: F) -> Result<F::Output> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    Ok(rt.block_on(f))
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub dataset: String,
    pub rate: String,
    pub workers: usize,
    pub threads_per_worker: usize,
    pub tiles: usize,
    pub ok: usize,
    /// Tiles answered transparent without rendering.
    pub skipped: usize,
    pub rejected: usize,
    pub failed: usize,
    pub total_s: f64,
    pub tiles_per_s: f64,
    /// From the scheduled dispatch time to the finished PNG.
    pub latency_ms: LatencySummary,
    /// Render time inside the workers.
    pub render_ms: LatencySummary,
    /// Order-sensitive hash of every returned grid.
    pub digest: u64,
}

/// One CSV line per report.
#[derive(Serialize)]
pub struct BenchRow<'a> {
    dataset: &'a str,
    rate: &'a str,
    workers: usize,
    threads_per_worker: usize,
    tiles: usize,
    ok: usize,
    skipped: usize,
    rejected: usize,
    failed: usize,
    total_s: f64,
    tiles_per_s: f64,
    min_ms: f64,
    p25_ms: f64,
    p50_ms: f64,
    p75_ms: f64,
    p90_ms: f64,
    p95_ms: f64,
    max_ms: f64,
    mean_ms: f64,
    render_p50_ms: f64,
    render_p90_ms: f64,
    render_mean_ms: f64,
}

impl BenchReport {
    pub fn row(&self) -> BenchRow<'_> {
        let l = &self.latency_ms;
        BenchRow {
            dataset: &self.dataset,
            rate: &self.rate,
            workers: self.workers,
            threads_per_worker: self.threads_per_worker,
            tiles: self.tiles,
            ok: self.ok,
            skipped: self.skipped,
            rejected: self.rejected,
            failed: self.failed,
            total_s: self.total_s,
            tiles_per_s: self.tiles_per_s,
            min_ms: l.min,
            p25_ms: l.p25,
            p50_ms: l.p50,
            p75_ms: l.p75,
            p90_ms: l.p90,
            p95_ms: l.p95,
            max_ms: l.max,
            mean_ms: l.mean,
            render_p50_ms: self.render_ms.p50,
            render_p90_ms: self.render_ms.p90,
            render_mean_ms: self.render_ms.mean,
        }
    }
}

enum Outcome {
    Done(u64),
    Skipped,
    Rejected,
    Failed,
}

/// Replays `tiles` against `service` at `rate` and waits for every response.
pub async fn run_workload(
    service: &Arc<TileService>,
    dataset: &str,
    tiles: &[TileKey],
    rate: Rate,
    width: u32,
) -> Result<BenchReport> {
    service.catalog().lookup(dataset)?;
    let start = Instant::now();
    let mut pending = Vec::with_capacity(tiles.len());
    for (k, tile) in tiles.iter().enumerate() {
        let due = match rate {
            Rate::Unlimited => start,
            Rate::PerSecond(r) => start + Duration::from_secs_f64(k as f64 / r),
        };
        tokio::time::sleep_until(due.into()).await;
        let svc = Arc::clone(service);
        let req = TileRequest {
            dataset: dataset.to_string(),
            tile: *tile,
            style: Style { stroke_width: width, ..Style::default() },
        };
        pending.push(tokio::spawn(async move {
            let outcome = match svc.respond(&req).await {
                Ok((_, GridSource::Skipped)) => Outcome::Skipped,
                Ok((_, src)) => Outcome::Done(src.grid().map_or(0, |g| g.digest())),
                Err(ServiceError::QueueFull) => Outcome::Rejected,
                Err(_) => Outcome::Failed,
            };
            (due.elapsed(), outcome)
        }));
    }

    let mut latency = Histogram::<u64>::new_with_bounds(1, 3_600_000_000, 3)?;
    let (mut ok, mut skipped, mut rejected, mut failed) = (0, 0, 0, 0);
    let mut digest = FNV_OFFSET;
    for h in pending {
        let (elapsed, outcome) = h.await?;
        let tile_digest = match outcome {
            Outcome::Done(d) => {
                ok += 1;
                d
            }
            Outcome::Skipped => {
                skipped += 1;
                0
            }
            Outcome::Rejected => {
                rejected += 1;
                continue;
            }
            Outcome::Failed => {
                failed += 1;
                continue;
            }
        };
        latency.saturating_record((elapsed.as_micros() as u64).max(1));
        digest = fnv_mix(digest, tile_digest);
    }
    let total_s = start.elapsed().as_secs_f64();
    let config = service.config();
    Ok(BenchReport {
        dataset: dataset.to_string(),
        rate: rate.to_string(),
        workers: config.workers,
        threads_per_worker: config.threads_per_worker,
        tiles: tiles.len(),
        ok,
        skipped,
        rejected,
        failed,
        total_s,
        tiles_per_s: (ok + skipped) as f64 / total_s.max(1e-9),
        latency_ms: LatencySummary::from_histogram(&latency, 1000.0),
        render_ms: LatencySummary::from_histogram(&service.render_histogram(), 1000.0),
        digest,
    })
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;

pub(crate) fn fnv_mix(h: u64, v: u64) -> u64 {
    v.to_le_bytes().iter().fold(h, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::Workload;
    use pixdrive_core::synth::{generate, SynthKind};
    use pixdrive_core::BoundingBox;

    fn setup() -> (Arc<Catalog>, Vec<TileKey>) {
        let extent = BoundingBox::new(0.0, 0.0, 5e4, 5e4);
        let catalog = Arc::new(Catalog::in_memory());
        let h = catalog.register_geometry("lines", &generate(SynthKind::Lines, 60, &extent, 3)).unwrap();
        let mut w = Workload::new("lines", 24);
        w.zoom_min = 8;
        w.zoom_max = 13;
        (catalog, w.generate(&h.mbr).unwrap())
    }

    #[test]
    fn every_request_is_answered() {
        let (catalog, tiles) = setup();
        let svc = bench_service(catalog, 2, 1).unwrap();
        let r = block_on(run_workload(&svc, "lines", &tiles, Rate::Unlimited, 1)).unwrap().unwrap();
        assert_eq!(r.ok + r.skipped, tiles.len());
        assert_eq!((r.rejected, r.failed), (0, 0));
        assert_eq!(r.latency_ms.count as usize, tiles.len());
        assert!(r.latency_ms.is_monotone());
        // repeated tiles in flight at the same time share one render
        let m = svc.metrics();
        assert_eq!(r.render_ms.count + m.deduplicated, r.ok as u64);
        assert!(r.tiles_per_s > 0.0);
        assert_eq!(m.cache_hits, 0);
    }

    #[test]
    fn rate_spreads_dispatch() {
        let (catalog, tiles) = setup();
        let svc = bench_service(catalog, 1, 1).unwrap();
        let r = block_on(run_workload(&svc, "lines", &tiles[..10], Rate::PerSecond(50.0), 1)).unwrap().unwrap();
        // the last request is not due before 9/50 s
        assert!(r.total_s >= 0.18, "{}", r.total_s);
    }

    #[test]
    fn digest_is_stable_across_runs() {
        let (catalog, tiles) = setup();
        let a = block_on(run_workload(
            &bench_service(Arc::clone(&catalog), 1, 1).unwrap(),
            "lines",
            &tiles,
            Rate::Unlimited,
            2,
        ));
        let b = block_on(run_workload(&bench_service(catalog, 3, 2).unwrap(), "lines", &tiles, Rate::Unlimited, 2));
        assert_eq!(a.unwrap().unwrap().digest, b.unwrap().unwrap().digest);
    }

    #[test]
    fn unknown_dataset_is_an_error() {
        let (catalog, tiles) = setup();
        let svc = bench_service(catalog, 1, 1).unwrap();
        assert!(block_on(run_workload(&svc, "nope", &tiles, Rate::Unlimited, 1)).unwrap().is_err());
    }
}
