use std::time::Instant;

use anyhow::{bail, Result};
use pixdrive_core::oracle::{oracle_classify_counted, oracle_nearest, OracleData};
use pixdrive_core::render::{render_classgrid_with_stats, StrokeThresholds, GRID_LEN};
use pixdrive_core::synth::{generate, rng, SynthKind};
use pixdrive_core::tile::{pixel_center, PixelAddress, TILE_SIZE};
use pixdrive_core::{BoundingBox, Dataset, WorldPoint};
use rand::Rng;
use serde::Serialize;

use crate::workload::Workload;

#[derive(Clone, Debug)]
pub struct ComplexitySettings {
    /// Dataset sizes, in points.
    pub sizes: Vec<usize>,
    pub tiles: usize,
    pub zoom_min: u32,
    pub zoom_max: u32,
    pub width: u32,
    /// Pixels per tile classified by the brute-force scan.
    pub oracle_pixels: usize,
    pub seed: u64,
    pub extent: BoundingBox,
}

impl Default for ComplexitySettings {
    fn default() -> Self {
        ComplexitySettings {
            sizes: vec![1_000, 10_000, 100_000, 1_000_000],
            tiles: 20,
            zoom_min: 3,
            zoom_max: 15,
            width: 1,
            oracle_pixels: 64,
            seed: 7,
            extent: BoundingBox::new(0.0, 0.0, 2e6, 2e6),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexityRow {
    pub n: usize,
    pub tiles: usize,
    pub engine_visits_per_pixel: f64,
    pub engine_records_per_pixel: f64,
    pub engine_ms_per_tile: f64,
    pub oracle_pixels: usize,
    pub oracle_touches_per_pixel: f64,
    pub oracle_us_per_pixel: f64,
    /// Sampled pixels where the two renderers disagree.
    pub sampled_mismatches: usize,
    /// Disagreements outside the distance tolerance band.
    pub unexplained: usize,
}

/// Renders the same tiles over uniform point sets of growing size, with the
/// indexed renderer on whole tiles and the brute-force scan on sampled pixels.
pub fn run_complexity(s: &ComplexitySettings) -> Result<Vec<ComplexityRow>> {
    if s.sizes.is_empty() || s.tiles == 0 {
        bail!("complexity run needs at least one size and one tile");
    }
    let mut w = Workload::new("complexity", s.tiles);
    w.zoom_min = s.zoom_min;
    w.zoom_max = s.zoom_max;
    w.seed = s.seed;
    w.width = s.width;
    let tiles = w.generate(&s.extent)?;

    let mut rows = Vec::with_capacity(s.sizes.len());
    for &n in &s.sizes {
        let set = generate(SynthKind::Points, n, &s.extent, s.seed.wrapping_add(n as u64));
        let ds = Dataset::build("complexity", &set)?;
        let oracle = OracleData::from_geometry(&set)?;
        let mut pick = rng(s.seed ^ 0x5eed);

        let (mut visits, mut records, mut engine_s) = (0u64, 0u64, 0.0);
        let (mut touches, mut oracle_s) = (0u64, 0.0);
        let (mut mismatches, mut unexplained) = (0, 0);
        for tile in &tiles {
            let t0 = Instant::now();
            let (grid, stats) = render_classgrid_with_stats(&ds, tile, s.width, 1)?;
            engine_s += t0.elapsed().as_secs_f64();
            visits += stats.nodes_visited;
            records += stats.records_tested;

            let th = StrokeThresholds::new(tile.z, s.width)?;
            for _ in 0..s.oracle_pixels {
                let (i, j) = (pick.gen_range(0..TILE_SIZE), pick.gen_range(0..TILE_SIZE));
                let p: WorldPoint = pixel_center(&PixelAddress { tile: *tile, i, j });
                let t0 = Instant::now();
                let code = oracle_classify_counted(&p, &th, &oracle.primitives, &mut touches);
                oracle_s += t0.elapsed().as_secs_f64();
                if code != grid.code(i, j) {
                    mismatches += 1;
                    let d = oracle_nearest(&p, &oracle.primitives, &mut 0).map(|(_, d)| d);
                    if !d.is_some_and(|d| th.in_band(d)) {
                        unexplained += 1;
                    }
                }
            }
        }
        let pixels = (tiles.len() * GRID_LEN) as f64;
        let sampled = tiles.len() * s.oracle_pixels;
        rows.push(ComplexityRow {
            n,
            tiles: tiles.len(),
            engine_visits_per_pixel: visits as f64 / pixels,
            engine_records_per_pixel: records as f64 / pixels,
            engine_ms_per_tile: engine_s * 1e3 / tiles.len() as f64,
            oracle_pixels: sampled,
            oracle_touches_per_pixel: touches as f64 / sampled.max(1) as f64,
            oracle_us_per_pixel: oracle_s * 1e6 / sampled.max(1) as f64,
            sampled_mismatches: mismatches,
            unexplained,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_cost_is_linear_and_engine_cost_is_not() {
        let s = ComplexitySettings { sizes: vec![500, 5_000], tiles: 4, oracle_pixels: 16, ..Default::default() };
        let rows = run_complexity(&s).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].oracle_touches_per_pixel, 500.0);
        assert_eq!(rows[1].oracle_touches_per_pixel, 5_000.0);
        assert!(rows[1].engine_visits_per_pixel < 5.0 * rows[0].engine_visits_per_pixel.max(1.0));
        assert!(rows.iter().all(|r| r.unexplained == 0));
    }

    #[test]
    fn empty_settings_are_rejected() {
        let s = ComplexitySettings { sizes: vec![], ..Default::default() };
        assert!(run_complexity(&s).is_err());
    }
}
