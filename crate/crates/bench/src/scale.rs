use std::sync::Arc;

use anyhow::{bail, Result};
use pixdrive_core::{Catalog, TileKey};
use serde::Serialize;

use crate::run::{bench_service, run_workload};
use crate::workload::Rate;

#[derive(Clone, Debug, Serialize)]
pub struct ScalingCell {
    pub workers: usize,
    pub threads_per_worker: usize,
    pub total_s: f64,
    pub tiles_per_s: f64,
    /// Throughput relative to the first cell.
    pub speedup: f64,
    pub p50_ms: f64,
    pub p90_ms: f64,
    pub digest: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub cells: Vec<ScalingCell>,
    /// Whether every configuration returned the same grids.
    pub deterministic: bool,
    pub available_cores: usize,
}

/// Replays the same tiles at full speed under every `(workers, threads)`
/// combination, first listed combination first.
pub async fn run_scaling(
    catalog: Arc<Catalog>,
    dataset: &str,
    tiles: &[TileKey],
    width: u32,
    workers: &[usize],
    threads: &[usize],
) -> Result<ScalingReport> {
    if workers.is_empty() || threads.is_empty() {
        bail!("scaling needs at least one worker count and one thread count");
    }
    let mut cells: Vec<ScalingCell> = Vec::new();
    for &w in workers {
        for &t in threads {
            let svc = bench_service(Arc::clone(&catalog), w, t)?;
            let r = run_workload(&svc, dataset, tiles, Rate::Unlimited, width).await?;
            svc.shutdown();
            if r.failed > 0 || r.rejected > 0 {
                bail!("{} failed and {} rejected tiles with {w} workers x {t} threads", r.failed, r.rejected);
            }
            let base = cells.first().map_or(r.tiles_per_s, |c| c.tiles_per_s);
            cells.push(ScalingCell {
                workers: w,
                threads_per_worker: t,
                total_s: r.total_s,
                tiles_per_s: r.tiles_per_s,
                speedup: r.tiles_per_s / base,
                p50_ms: r.latency_ms.p50,
                p90_ms: r.latency_ms.p90,
                digest: r.digest,
            });
        }
    }
    let deterministic = cells.windows(2).all(|p| p[0].digest == p[1].digest);
    let available_cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    Ok(ScalingReport { cells, deterministic, available_cores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::block_on;
    use crate::workload::Workload;
    use pixdrive_core::synth::{generate, SynthKind};
    use pixdrive_core::BoundingBox;

    #[test]
    fn matrix_is_complete_and_deterministic() {
        let extent = BoundingBox::new(0.0, 0.0, 3e4, 3e4);
        let catalog = Arc::new(Catalog::in_memory());
        let h = catalog.register_geometry("pts", &generate(SynthKind::Points, 400, &extent, 5)).unwrap();
        let mut w = Workload::new("pts", 12);
        w.zoom_min = 9;
        w.zoom_max = 12;
        let tiles = w.generate(&h.mbr).unwrap();
        let r = block_on(run_scaling(catalog, "pts", &tiles, 1, &[1, 2], &[1, 2])).unwrap().unwrap();
        assert_eq!(r.cells.len(), 4);
        assert_eq!((r.cells[3].workers, r.cells[3].threads_per_worker), (2, 2));
        assert_eq!(r.cells[0].speedup, 1.0);
        assert!(r.deterministic);
    }
}
