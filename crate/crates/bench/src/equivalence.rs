//! Randomized agreement checks between the indexed renderer and the
//! brute-force reference.

use anyhow::{bail, Result};
use pixdrive_core::index::{build_polygon_indexes, PolygonRings};
use pixdrive_core::oracle::{
    compare_with_oracle, oracle_point_in_polygon, oracle_render_tile, scanline_near_vertex, GridComparison, OracleData,
};
use pixdrive_core::render::{point_in_polygon_sibf, render_classgrid};
use pixdrive_core::synth::{random_polygons, random_walk_lines, rng, uniform_points};
use pixdrive_core::tile::pixel_containing;
use pixdrive_core::{BoundingBox, Dataset, GeometrySet, QueryStats, WorldPoint};
use rand::Rng;
use serde::Serialize;

#[derive(Clone, Debug, Default, Serialize)]
pub struct EquivalenceSummary {
    pub datasets: usize,
    pub tiles: usize,
    pub pixels: usize,
    pub code_mismatches: usize,
    pub unexplained: usize,
    pub agreement: f64,
}

/// Random point and line datasets of at most `max_primitives` primitives,
/// each rendered on `tiles_per_dataset` random tiles near its data by both
/// renderers.
pub fn oracle_equivalence(
    datasets: usize,
    tiles_per_dataset: usize,
    max_primitives: usize,
    seed: u64,
) -> Result<EquivalenceSummary> {
    if max_primitives == 0 {
        bail!("datasets need at least one primitive");
    }
    let mut r = rng(seed);
    let mut total = GridComparison::default();
    let mut tiles = 0;
    for k in 0..datasets {
        let c = WorldPoint::new(r.gen_range(-1.5e7..1.5e7), r.gen_range(-1.5e7..1.5e7));
        let half = 10f64.powf(r.gen_range(3.0..6.0));
        let extent = BoundingBox::around(c, half);
        let n = r.gen_range(1..=max_primitives);
        let sub_seed = r.gen();
        let set = if k % 2 == 0 {
            GeometrySet::Points(uniform_points(n, &extent, sub_seed))
        } else {
            // eight vertices, seven segments per line
            let lines = (n / 7).max(1);
            GeometrySet::Lines(random_walk_lines(lines, 8, half / (lines as f64).sqrt(), &extent, sub_seed))
        };
        let vertices: Vec<WorldPoint> = match &set {
            GeometrySet::Points(p) => p.clone(),
            GeometrySet::Lines(l) => l.iter().flatten().copied().collect(),
            GeometrySet::Polygons(_) => unreachable!(),
        };
        let ds = Dataset::build("eq", &set)?;
        let oracle = OracleData::from_geometry(&set)?;
        for _ in 0..tiles_per_dataset {
            let v = vertices[r.gen_range(0..vertices.len())];
            let tile = pixel_containing(&v, r.gen_range(3..=15))?.tile;
            let width = r.gen_range(1..=4);
            let engine = render_classgrid(&ds, &tile, width, 1)?;
            let reference = oracle_render_tile(&oracle, &tile, width)?;
            total.merge(&compare_with_oracle(&engine, &reference, &oracle, &tile, width)?);
            tiles += 1;
        }
    }
    Ok(EquivalenceSummary {
        datasets,
        tiles,
        pixels: total.pixels,
        code_mismatches: total.code_mismatches,
        unexplained: total.unexplained,
        agreement: total.agreement(),
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FillSummary {
    pub polygons: usize,
    pub with_holes: usize,
    pub probes: usize,
    /// Probes skipped because their scan line passes within 1e-9 m of a vertex.
    pub excluded: usize,
    pub mismatches: usize,
}

/// Interior tests on random polygons, indexed ray casting against a plain
/// even-odd scan, with `probes` random points around each polygon.
pub fn fill_equivalence(polygons: usize, probes: usize, seed: u64) -> Result<FillSummary> {
    let extent = BoundingBox::new(-1e5, -1e5, 1e5, 1e5);
    let polys = random_polygons(polygons, 2e4, 0.3, &extent, seed);
    let mut r = rng(seed.wrapping_add(1));
    let mut s =
        FillSummary { polygons, with_holes: polys.iter().filter(|p| p.len() > 1).count(), ..Default::default() };
    for rings in &polys {
        let (edges, mbrs) = build_polygon_indexes(&[PolygonRings { id: 0, rings: rings.clone() }])?;
        let b = BoundingBox::from_points(rings.iter().flatten().copied()).buffered(1e3);
        for _ in 0..probes {
            let p = WorldPoint::new(r.gen_range(b.min_x..b.max_x), r.gen_range(b.min_y..b.max_y));
            s.probes += 1;
            if scanline_near_vertex(p.y, rings, 1e-9) {
                s.excluded += 1;
                continue;
            }
            if point_in_polygon_sibf(&p, &edges, &mbrs, &mut QueryStats::default())
                != oracle_point_in_polygon(&p, rings)
            {
                s.mismatches += 1;
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_random_suite_agrees() {
        let s = oracle_equivalence(4, 1, 60, 11).unwrap();
        assert_eq!((s.datasets, s.tiles), (4, 4));
        assert_eq!(s.pixels, 4 * 65_536);
        assert_eq!(s.unexplained, 0);
        assert!(s.agreement >= 0.9999);
    }

    #[test]
    fn fill_suite_agrees() {
        let s = fill_equivalence(50, 20, 3).unwrap();
        assert_eq!(s.probes, 1_000);
        assert_eq!(s.mismatches, 0);
    }
}
