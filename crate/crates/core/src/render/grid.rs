use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::sibf::point_in_polygon_sibf;
use super::sibv::{classify_in_tree, StrokeThresholds};
use crate::error::Result;
use crate::index::QueryStats;
use crate::ingest::{Dataset, DatasetIndexes};
use crate::tile::{pixel_center, PixelAddress, TileKey, TILE_SIZE};
use crate::WorldPoint;

pub const GRID_LEN: usize = (TILE_SIZE * TILE_SIZE) as usize;

/// Pixel class: 0 background, 1–3 partially covered, 4 fully covered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassCode(u8);

impl ClassCode {
    pub const BACKGROUND: ClassCode = ClassCode(0);
    pub const FULL: ClassCode = ClassCode(4);

    pub fn new(value: u8) -> Option<Self> {
        (value <= 4).then_some(ClassCode(value))
    }

    /// Code for a pixel with `covered` of its four sub-pixels inside the stroke.
    pub fn from_coverage(covered: u8) -> Self {
        ClassCode(covered.min(4))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_transition(self) -> bool {
        (1..=3).contains(&self.0)
    }
}

/// The style-independent result of rendering one tile.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ClassGrid {
    codes: Vec<ClassCode>,
    fill: Vec<bool>,
}

impl std::fmt::Debug for ClassGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClassGrid")
            .field("nonzero", &self.count_nonzero())
            .field("filled", &self.count_filled())
            .finish()
    }
}

impl Default for ClassGrid {
    fn default() -> Self {
        ClassGrid { codes: vec![ClassCode::BACKGROUND; GRID_LEN], fill: vec![false; GRID_LEN] }
    }
}

impl ClassGrid {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    fn at(i: u32, j: u32) -> usize {
        (j * TILE_SIZE + i) as usize
    }

    pub fn code(&self, i: u32, j: u32) -> ClassCode {
        self.codes[Self::at(i, j)]
    }

    pub fn set_code(&mut self, i: u32, j: u32, c: ClassCode) {
        self.codes[Self::at(i, j)] = c;
    }

    pub fn is_filled(&self, i: u32, j: u32) -> bool {
        self.fill[Self::at(i, j)]
    }

    pub fn set_filled(&mut self, i: u32, j: u32, v: bool) {
        self.fill[Self::at(i, j)] = v;
    }

    /// Codes in row-major order.
    pub fn codes(&self) -> &[ClassCode] {
        &self.codes
    }

    pub fn fill_mask(&self) -> &[bool] {
        &self.fill
    }

    pub fn count_nonzero(&self) -> usize {
        self.codes.iter().filter(|c| c.0 != 0).count()
    }

    pub fn count_filled(&self) -> usize {
        self.fill.iter().filter(|&&f| f).count()
    }

    /// Stable 64-bit FNV-1a digest of codes and fill mask.
    pub fn digest(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let bytes = self.codes.iter().map(|c| c.0).chain(self.fill.iter().map(|&f| u8::from(f)));
        for b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }
}

pub fn render_classgrid(dataset: &Dataset, tile: &TileKey, width: u32, threads: usize) -> Result<ClassGrid> {
    render_classgrid_with_stats(dataset, tile, width, threads).map(|(g, _)| g)
}

/// Renders a tile, splitting rows across `threads` workers, and reports the
/// total index traversal cost.
///
/// Each row is computed independently, so the grid does not depend on the
/// number of threads or on which thread handles which row.
pub fn render_classgrid_with_stats(
    dataset: &Dataset,
    tile: &TileKey,
    width: u32,
    threads: usize,
) -> Result<(ClassGrid, QueryStats)> {
    let tile = TileKey::new(tile.z, tile.x, tile.y)?;
    let th = StrokeThresholds::<f64>::new(tile.z, width)?;
    let mut grid = ClassGrid::new();

    let render_row = |j: u32, codes: &mut [ClassCode], fill: &mut [bool], stats: &mut QueryStats| {
        for i in 0..TILE_SIZE {
            let p: WorldPoint = pixel_center(&PixelAddress { tile, i, j });
            let k = i as usize;
            codes[k] = match dataset.indexes() {
                DatasetIndexes::Points(t) => classify_in_tree(&p, &th, t, stats),
                DatasetIndexes::Lines(t) => classify_in_tree(&p, &th, t, stats),
                DatasetIndexes::Polygons { edges, .. } => classify_in_tree(&p, &th, edges, stats),
            };
            if let DatasetIndexes::Polygons { edges, mbrs } = dataset.indexes() {
                if codes[k] == ClassCode::BACKGROUND {
                    fill[k] = point_in_polygon_sibf(&p, edges, mbrs, stats);
                }
            }
        }
    };

    let rows = grid.codes.chunks_mut(TILE_SIZE as usize).zip(grid.fill.chunks_mut(TILE_SIZE as usize)).enumerate();
    let threads = threads.max(1);
    let mut total = QueryStats::default();
    if threads == 1 {
        for (j, (codes, fill)) in rows {
            render_row(j as u32, codes, fill, &mut total);
        }
    } else {
        let queue = Mutex::new(rows);
        let per_thread: Vec<QueryStats> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|_| {
                    s.spawn(|| {
                        let mut stats = QueryStats::default();
                        loop {
                            let next = queue.lock().unwrap().next();
                            let Some((j, (codes, fill))) = next else { break };
                            render_row(j as u32, codes, fill, &mut stats);
                        }
                        stats
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("row worker panicked")).collect()
        });
        for s in &per_thread {
            total.merge(s);
        }
    }
    Ok((grid, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_bounds() {
        assert!(ClassCode::new(5).is_none());
        assert_eq!(ClassCode::from_coverage(4), ClassCode::FULL);
        assert!(ClassCode::new(2).unwrap().is_transition());
        assert!(!ClassCode::FULL.is_transition());
    }

    #[test]
    fn grid_indexing() {
        let mut g = ClassGrid::new();
        g.set_code(255, 0, ClassCode::FULL);
        g.set_filled(0, 255, true);
        assert_eq!(g.codes()[255], ClassCode::FULL);
        assert!(g.fill_mask()[255 * 256]);
        assert_eq!(g.count_nonzero(), 1);
        assert_ne!(g.digest(), ClassGrid::new().digest());
    }
}
