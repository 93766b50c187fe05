use std::sync::Arc;
use std::time::Duration;

use pixdrive_core::synth::{generate, SynthKind};
use pixdrive_core::tile::pixel_containing;
use pixdrive_core::{BoundingBox, Dataset, GeometrySet, TileKey};
use pixdrive_service::{Metrics, ResultPool, Submission, TaskKey, WorkerPool};

fn dataset() -> (Arc<Dataset>, TileKey) {
    let set = generate(SynthKind::Points, 300, &BoundingBox::new(0.0, 0.0, 2e5, 2e5), 4);
    let GeometrySet::Points(pts) = &set else { unreachable!() };
    let tile = pixel_containing(&pts[0], 9).unwrap().tile;
    (Arc::new(Dataset::build("p", &set).unwrap()), tile)
}

fn key(tile: TileKey, width: u32) -> TaskKey {
    TaskKey { dataset: "p".into(), tile, width }
}

fn pending(s: Submission) -> tokio::sync::oneshot::Receiver<pixdrive_service::pool::RenderResult> {
    match s {
        Submission::Pending(rx) => rx,
        Submission::Cached(_) => panic!("unexpected cache hit"),
    }
}

#[test]
fn single_worker_completes_in_fifo_order() {
    let (ds, tile) = dataset();
    let pool = WorkerPool::start(1, 1, 64, None, Arc::new(Metrics::default()));
    pool.set_fault_hook(Some(Arc::new(|_, _| {
        std::thread::sleep(Duration::from_millis(20));
        false
    })));
    let rxs: Vec<_> = (1..=3).map(|w| pending(pool.submit(key(tile, w), Arc::clone(&ds)).unwrap())).collect();
    let seqs: Vec<u64> = rxs.into_iter().map(|rx| rx.blocking_recv().unwrap().unwrap().sequence).collect();
    assert_eq!(seqs, vec![1, 2, 3]);
}

#[test]
fn many_workers_match_one() {
    let (ds, tile) = dataset();
    let n = 1u32 << tile.z;
    let keys: Vec<TaskKey> = (0..100u32)
        .map(|k| key(TileKey::new(tile.z, (tile.x + k % 10) % n, (tile.y + k / 10) % n).unwrap(), 1 + k % 2))
        .collect();
    let run = |workers: usize| {
        let pool = WorkerPool::start(workers, 1, 4096, None, Arc::new(Metrics::default()));
        let rxs: Vec<_> = keys.iter().map(|k| pending(pool.submit(k.clone(), Arc::clone(&ds)).unwrap())).collect();
        rxs.into_iter().map(|rx| rx.blocking_recv().unwrap().unwrap().grid.digest()).collect::<Vec<_>>()
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn finished_grids_are_served_from_the_result_pool() {
    let (ds, tile) = dataset();
    let results = Arc::new(ResultPool::new(8, Duration::from_secs(60)));
    let metrics = Arc::new(Metrics::default());
    let pool = WorkerPool::start(2, 2, 16, Some(Arc::clone(&results)), Arc::clone(&metrics));
    let first = pending(pool.submit(key(tile, 1), Arc::clone(&ds)).unwrap()).blocking_recv().unwrap().unwrap();
    match pool.submit(key(tile, 1), ds).unwrap() {
        Submission::Cached(g) => assert_eq!(g.digest(), first.grid.digest()),
        Submission::Pending(_) => panic!("expected a cache hit"),
    }
    assert_eq!(results.len(), 1);
    pool.shutdown();
    assert!(pool.submit(key(tile, 2), dataset().0).is_err());
}
