//! The two-level polygon organization: an edge tree and a polygon MBR tree.

use super::record::{IndexedEdge, PolygonMbrEntry};
use super::rtree::PackedRTree;
use crate::error::{Error, Result};
use crate::{BoundingBox, SegmentGeom, WorldPoint};

/// A polygon in projected coordinates: one outer ring followed by any holes,
/// each ring closed (first vertex repeated at the end).
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonRings {
    pub id: u64,
    pub rings: Vec<Vec<WorldPoint>>,
}

impl PolygonRings {
    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::from_points(self.rings.iter().flatten().copied())
    }
}

/// Splits a closed ring into annotated edges with ids starting at `first_edge_id`.
///
/// Vertex cutting is not applied geometrically: every edge owns the half-open
/// scan-line interval `(min_y, max_y]` (see [`IndexedEdge::owns_scanline`]),
/// which gives a vertex shared by two y-monotone edges to exactly one of
/// them and a turning vertex to both or neither. Repeated consecutive
/// vertices produce no edge.
pub fn cut_edges(ring: &[WorldPoint], polygon_id: u64, first_edge_id: u64) -> Result<Vec<IndexedEdge>> {
    let invalid = |message: &str| Error::InvalidGeometry { record: polygon_id as usize, message: message.to_string() };
    if ring.len() < 4 {
        return Err(invalid("ring needs at least 4 vertices"));
    }
    if ring.first() != ring.last() {
        return Err(invalid("ring is not closed"));
    }
    let mut edges = Vec::with_capacity(ring.len() - 1);
    for w in ring.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let id = first_edge_id + edges.len() as u64;
        edges.push(IndexedEdge::new(SegmentGeom::new(w[0], w[1]), id, polygon_id));
    }
    if edges.len() < 3 {
        return Err(invalid("ring needs at least 3 distinct vertices"));
    }
    Ok(edges)
}

/// Builds the edge tree over every ring edge and the MBR tree with one entry per polygon.
pub fn build_polygon_indexes(
    polygons: &[PolygonRings],
) -> Result<(PackedRTree<IndexedEdge>, PackedRTree<PolygonMbrEntry>)> {
    if polygons.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut edges = Vec::new();
    let mut mbrs = Vec::with_capacity(polygons.len());
    for poly in polygons {
        let mut bbox = BoundingBox::empty();
        for ring in &poly.rings {
            let cut = cut_edges(ring, poly.id, edges.len() as u64)?;
            for e in &cut {
                bbox.expand_box(&e.geom.bbox());
            }
            edges.extend(cut);
        }
        if bbox.is_empty() {
            return Err(Error::InvalidGeometry { record: poly.id as usize, message: "polygon has no rings".into() });
        }
        mbrs.push(PolygonMbrEntry { bbox, polygon_id: poly.id });
    }
    Ok((PackedRTree::build(edges)?, PackedRTree::build(mbrs)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(pts: &[(f64, f64)]) -> Vec<WorldPoint> {
        let mut r: Vec<WorldPoint> = pts.iter().map(|&(x, y)| WorldPoint::new(x, y)).collect();
        r.push(r[0]);
        r
    }

    fn crossings_right(edges: &[IndexedEdge], p: WorldPoint) -> usize {
        edges.iter().filter(|e| e.owns_scanline(p.y) && e.crossing_x(p.y) > p.x).count()
    }

    #[test]
    fn unit_square() {
        let sq = PolygonRings { id: 0, rings: vec![ring(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])] };
        let (edges, mbrs) = build_polygon_indexes(&[sq]).unwrap();
        assert_eq!(edges.len(), 4);
        assert_eq!(edges.records().filter(|e| e.is_level).count(), 2);
        assert_eq!(mbrs.len(), 1);
        assert_eq!(mbrs.records().next().unwrap().x_span(), 1.0);
    }

    #[test]
    fn square_with_hole_shares_polygon_id() {
        let p = PolygonRings {
            id: 3,
            rings: vec![
                ring(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]),
                ring(&[(1.0, 1.0), (1.0, 3.0), (3.0, 3.0), (3.0, 1.0)]),
            ],
        };
        let (edges, mbrs) = build_polygon_indexes(&[p]).unwrap();
        assert_eq!(edges.len(), 8);
        assert!(edges.records().all(|e| e.polygon_id == 3));
        assert_eq!(mbrs.len(), 1);
    }

    #[test]
    fn horizontal_edge_never_counts() {
        let e = cut_edges(&ring(&[(0.0, 0.0), (2.0, 0.0), (1.0, 2.0)]), 0, 0).unwrap();
        assert!(e[0].is_level);
        assert!(!e[0].owns_scanline(0.0));
    }

    #[test]
    fn triangle_apex_counts_twice() {
        let e = cut_edges(&ring(&[(0.0, 0.0), (2.0, 0.0), (1.0, 2.0)]), 0, 0).unwrap();
        // a ray along y = 2 from the left passes the apex: both slanted edges own it
        assert_eq!(crossings_right(&e, WorldPoint::new(-1.0, 2.0)), 2);
        assert_eq!(crossings_right(&e, WorldPoint::new(1.0, 1.0)), 1);
    }

    #[test]
    fn rejects_bad_rings() {
        let open = vec![
            WorldPoint::new(0.0, 0.0),
            WorldPoint::new(1.0, 0.0),
            WorldPoint::new(1.0, 1.0),
            WorldPoint::new(0.0, 1.0),
        ];
        assert!(cut_edges(&open, 0, 0).is_err());
        assert!(cut_edges(&ring(&[(0.0, 0.0), (1.0, 0.0)]), 0, 0).is_err());
        assert!(matches!(build_polygon_indexes(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn duplicate_vertices_are_skipped() {
        let r = ring(&[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (1.0, 1.0)]);
        let e = cut_edges(&r, 0, 10).unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e.iter().map(|e| e.id).collect::<Vec<_>>(), vec![10, 11, 12]);
    }
}
