//! Index-backed ray casting for polygon interiors.

use std::ops::ControlFlow;

use crate::index::{IndexedEdge, PackedRTree, PolygonMbrEntry, QueryStats};
use crate::{BoundingBox, WorldPoint};

/// Whether `p` lies inside any polygon of the dataset.
///
/// Candidate polygons are those whose MBR contains `p`, tried narrowest
/// first. For each, a horizontal query segment runs from `p` to the nearer
/// vertical side of the MBR; the edges of that polygon it crosses are
/// counted under the half-open scan-line rule, and an odd count settles the
/// answer.
pub fn point_in_polygon_sibf(
    p: &WorldPoint,
    edges: &PackedRTree<IndexedEdge>,
    mbrs: &PackedRTree<PolygonMbrEntry>,
    stats: &mut QueryStats,
) -> bool {
    let mut candidates: Vec<PolygonMbrEntry> = Vec::new();
    mbrs.visit(&BoundingBox::from_point(*p), true, stats, |m| {
        candidates.push(*m);
        ControlFlow::Continue(())
    });
    candidates.sort_by(|a, b| a.x_span().total_cmp(&b.x_span()).then(a.polygon_id.cmp(&b.polygon_id)));

    for v in &candidates {
        let toward_min = p.x - v.bbox.min_x < v.bbox.max_x - p.x;
        let query = if toward_min {
            BoundingBox { min_x: v.bbox.min_x, min_y: p.y, max_x: p.x, max_y: p.y }
        } else {
            BoundingBox { min_x: p.x, min_y: p.y, max_x: v.bbox.max_x, max_y: p.y }
        };
        let mut count = 0u32;
        edges.visit(&query, false, stats, |e| {
            if e.polygon_id == v.polygon_id && e.owns_scanline(p.y) {
                let x = e.crossing_x(p.y);
                if (toward_min && x < p.x) || (!toward_min && x > p.x) {
                    count += 1;
                }
            }
            ControlFlow::Continue(())
        });
        if count % 2 == 1 {
            return true;
        }
    }
    false
}
