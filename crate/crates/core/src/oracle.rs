//! Brute-force reference rasterizer.
//!
//! Every pixel scans every primitive. No index, no pruning: the cost is
//! linear in the number of primitives by construction, which makes it both
//! a correctness reference for the indexed renderer and a baseline for its
//! cost.

use crate::error::Result;
use crate::geometry::dist_point_segment;
use crate::index::cut_edges;
use crate::ingest::{line_segments, GeometrySet};
use crate::render::{ClassCode, ClassGrid, StrokeThresholds, GRID_LEN};
use crate::tile::{pixel_center, PixelAddress, TileKey, TILE_SIZE};
use crate::{SegmentGeom, WorldPoint};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Primitive {
    Point(WorldPoint),
    Segment(SegmentGeom),
}

impl Primitive {
    #[inline]
    pub fn distance_to(&self, p: &WorldPoint) -> f64 {
        match self {
            Primitive::Point(q) => q.distance(p),
            Primitive::Segment(s) => dist_point_segment(p, s),
        }
    }
}

/// Flat primitive list plus raw polygon rings.
///
/// Primitive `k` corresponds to the index record with id `k`, so nearest
/// ties resolve to the same object in both renderers.
#[derive(Clone, Debug, Default)]
pub struct OracleData {
    pub primitives: Vec<Primitive>,
    pub polygons: Vec<Vec<Vec<WorldPoint>>>,
}

impl OracleData {
    pub fn from_geometry(set: &GeometrySet) -> Result<Self> {
        Ok(match set {
            GeometrySet::Points(pts) => {
                OracleData { primitives: pts.iter().map(|&p| Primitive::Point(p)).collect(), polygons: Vec::new() }
            }
            GeometrySet::Lines(lines) => OracleData {
                primitives: line_segments(lines).into_iter().map(Primitive::Segment).collect(),
                polygons: Vec::new(),
            },
            GeometrySet::Polygons(polys) => {
                let mut primitives = Vec::new();
                for (id, rings) in polys.iter().enumerate() {
                    for ring in rings {
                        let edges = cut_edges(ring, id as u64, primitives.len() as u64)?;
                        primitives.extend(edges.iter().map(|e| Primitive::Segment(e.geom)));
                    }
                }
                OracleData { primitives, polygons: polys.clone() }
            }
        })
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }
}

/// The nearest primitive by linear scan, ties to the lowest index.
/// Adds the number of primitives examined to `touches`.
pub fn oracle_nearest(p: &WorldPoint, primitives: &[Primitive], touches: &mut u64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, prim) in primitives.iter().enumerate() {
        let d = prim.distance_to(p);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((k, d));
        }
    }
    *touches += primitives.len() as u64;
    best
}

pub fn oracle_classify(p: &WorldPoint, z: u32, width: u32, primitives: &[Primitive]) -> Result<ClassCode> {
    let th = StrokeThresholds::new(z, width)?;
    Ok(oracle_classify_counted(p, &th, primitives, &mut 0))
}

/// [`oracle_classify`] with precomputed thresholds, adding the primitives
/// examined to `touches`.
pub fn oracle_classify_counted(
    p: &WorldPoint,
    th: &StrokeThresholds<f64>,
    primitives: &[Primitive],
    touches: &mut u64,
) -> ClassCode {
    match oracle_nearest(p, primitives, touches) {
        Some((_, d)) if d <= th.inner => ClassCode::FULL,
        Some((k, d)) if d <= th.outer => {
            let obj = primitives[k];
            ClassCode::from_coverage(th.covered_subpixels(p, |c| obj.distance_to(c)))
        }
        _ => ClassCode::BACKGROUND,
    }
}

/// Even-odd test of a horizontal ray from `p` towards +x over every ring
/// edge. An edge counts when `p.y` lies in its half-open span `(min_y, max_y]`.
pub fn oracle_point_in_polygon(p: &WorldPoint, rings: &[Vec<WorldPoint>]) -> bool {
    let mut inside = false;
    for ring in rings {
        for w in ring.windows(2) {
            let (lo, hi) = if w[0].y <= w[1].y { (w[0], w[1]) } else { (w[1], w[0]) };
            if lo.y == hi.y || !(lo.y < p.y && p.y <= hi.y) {
                continue;
            }
            let x = lo.x + (p.y - lo.y) * (hi.x - lo.x) / (hi.y - lo.y);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Whether the horizontal line through `y` passes within `tol` of a ring vertex.
pub fn scanline_near_vertex(y: f64, rings: &[Vec<WorldPoint>], tol: f64) -> bool {
    rings.iter().flatten().any(|v| (v.y - y).abs() <= tol)
}

pub fn oracle_render_tile(data: &OracleData, tile: &TileKey, width: u32) -> Result<ClassGrid> {
    oracle_render_tile_counted(data, tile, width).map(|(g, _)| g)
}

/// Renders a tile by brute force, returning the grid and the total number
/// of primitives examined.
pub fn oracle_render_tile_counted(data: &OracleData, tile: &TileKey, width: u32) -> Result<(ClassGrid, u64)> {
    let tile = TileKey::new(tile.z, tile.x, tile.y)?;
    let th = StrokeThresholds::new(tile.z, width)?;
    let mut grid = ClassGrid::new();
    let mut touches = 0;
    for j in 0..TILE_SIZE {
        for i in 0..TILE_SIZE {
            let p: WorldPoint = pixel_center(&PixelAddress { tile, i, j });
            let code = oracle_classify_counted(&p, &th, &data.primitives, &mut touches);
            grid.set_code(i, j, code);
            if code == ClassCode::BACKGROUND && data.polygons.iter().any(|rings| oracle_point_in_polygon(&p, rings)) {
                grid.set_filled(i, j, true);
            }
        }
    }
    Ok((grid, touches))
}

/// Pixel-level agreement between an engine grid and an oracle grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GridComparison {
    pub pixels: usize,
    pub code_mismatches: usize,
    pub fill_mismatches: usize,
    /// Mismatches not explained by the tolerance band around `R₁`/`R₂` or,
    /// for fill, by a scan line passing within 1e-9 m of a ring vertex.
    pub unexplained: usize,
}

impl GridComparison {
    pub fn merge(&mut self, o: &GridComparison) {
        self.pixels += o.pixels;
        self.code_mismatches += o.code_mismatches;
        self.fill_mismatches += o.fill_mismatches;
        self.unexplained += o.unexplained;
    }

    pub fn mismatches(&self) -> usize {
        self.code_mismatches + self.fill_mismatches
    }

    /// Fraction of pixels on which the two grids agree.
    pub fn agreement(&self) -> f64 {
        if self.pixels == 0 {
            1.0
        } else {
            1.0 - self.mismatches() as f64 / self.pixels as f64
        }
    }
}

/// Compares two grids of the same tile, checking every disagreement against
/// the tolerance rules.
pub fn compare_with_oracle(
    engine: &ClassGrid,
    oracle: &ClassGrid,
    data: &OracleData,
    tile: &TileKey,
    width: u32,
) -> Result<GridComparison> {
    let th = StrokeThresholds::new(tile.z, width)?;
    let mut cmp = GridComparison { pixels: GRID_LEN, ..Default::default() };
    for j in 0..TILE_SIZE {
        for i in 0..TILE_SIZE {
            let p: WorldPoint = pixel_center(&PixelAddress { tile: *tile, i, j });
            let (a, b) = (engine.code(i, j), oracle.code(i, j));
            if a != b {
                cmp.code_mismatches += 1;
                let d = oracle_nearest(&p, &data.primitives, &mut 0).map(|(_, d)| d);
                if !d.is_some_and(|d| th.in_band(d)) {
                    cmp.unexplained += 1;
                }
            } else if engine.is_filled(i, j) != oracle.is_filled(i, j) {
                cmp.fill_mismatches += 1;
                if !data.polygons.iter().any(|rings| scanline_near_vertex(p.y, rings, 1e-9)) {
                    cmp.unexplained += 1;
                }
            }
        }
    }
    Ok(cmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<WorldPoint> {
        [(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)].iter().map(|&(x, y)| WorldPoint::new(x, y)).collect()
    }

    #[test]
    fn no_objects_is_background() {
        assert_eq!(oracle_classify(&WorldPoint::new(0.0, 0.0), 5, 1, &[]).unwrap(), ClassCode::BACKGROUND);
    }

    #[test]
    fn coincident_point_is_full() {
        let p = WorldPoint::new(10.0, 20.0);
        assert_eq!(oracle_classify(&p, 5, 1, &[Primitive::Point(p)]).unwrap(), ClassCode::FULL);
    }

    #[test]
    fn parity() {
        let rings = vec![square(-0.5, -0.5, 0.5, 0.5)];
        assert!(oracle_point_in_polygon(&WorldPoint::new(0.0, 0.0), &rings));
        assert!(!oracle_point_in_polygon(&WorldPoint::new(100.0, 0.0), &rings));
        let holed = vec![square(0.0, 0.0, 4.0, 4.0), square(1.0, 1.0, 3.0, 3.0)];
        assert!(!oracle_point_in_polygon(&WorldPoint::new(2.0, 2.0), &holed));
        assert!(oracle_point_in_polygon(&WorldPoint::new(0.5, 2.0), &holed));
    }

    #[test]
    fn empty_dataset_tile() {
        let g = oracle_render_tile(&OracleData::default(), &TileKey::new(3, 1, 1).unwrap(), 1).unwrap();
        assert_eq!(g, ClassGrid::new());
    }

    #[test]
    fn touches_are_linear() {
        let data = OracleData::from_geometry(&GeometrySet::Points(vec![WorldPoint::new(0.0, 0.0); 7])).unwrap();
        let (_, t) = oracle_render_tile_counted(&data, &TileKey::new(0, 0, 0).unwrap(), 1).unwrap();
        assert_eq!(t, 7 * 65536);
    }
}
