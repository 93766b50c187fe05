//! Spatial indexes over points, linestring segments and polygon edges.

mod polygon;
mod record;
mod rtree;

use std::path::Path;

pub use polygon::{build_polygon_indexes, cut_edges, PolygonRings};
pub use record::{IndexKind, IndexedEdge, Measurable, PointRecord, PolygonMbrEntry, Record, SegmentRecord};
pub use rtree::{peek_kind, PackedRTree, QueryStats, FANOUT, FORMAT_VERSION, MAGIC, PAGE_SIZE};

use crate::error::Result;
use crate::{BoundingBox, SegmentGeom, WorldPoint};

/// An index of any node type, as loaded from disk.
#[derive(Debug)]
pub enum SpatialIndex {
    Points(PackedRTree<PointRecord>),
    Segments(PackedRTree<SegmentRecord>),
    Edges(PackedRTree<IndexedEdge>),
    Mbrs(PackedRTree<PolygonMbrEntry>),
}

impl SpatialIndex {
    pub fn kind(&self) -> IndexKind {
        match self {
            SpatialIndex::Points(_) => IndexKind::Point,
            SpatialIndex::Segments(_) => IndexKind::Segment,
            SpatialIndex::Edges(_) => IndexKind::Edge,
            SpatialIndex::Mbrs(_) => IndexKind::Mbr,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SpatialIndex::Points(t) => t.len(),
            SpatialIndex::Segments(t) => t.len(),
            SpatialIndex::Edges(t) => t.len(),
            SpatialIndex::Mbrs(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mbr(&self) -> BoundingBox {
        match self {
            SpatialIndex::Points(t) => t.mbr(),
            SpatialIndex::Segments(t) => t.mbr(),
            SpatialIndex::Edges(t) => t.mbr(),
            SpatialIndex::Mbrs(t) => t.mbr(),
        }
    }

    pub fn persist(&self, path: &Path) -> Result<()> {
        match self {
            SpatialIndex::Points(t) => t.persist(path),
            SpatialIndex::Segments(t) => t.persist(path),
            SpatialIndex::Edges(t) => t.persist(path),
            SpatialIndex::Mbrs(t) => t.persist(path),
        }
    }

    /// Maps an index file of whatever kind its header declares.
    pub fn load(path: &Path) -> Result<Self> {
        Ok(match peek_kind(path)? {
            IndexKind::Point => SpatialIndex::Points(PackedRTree::load(path)?),
            IndexKind::Segment => SpatialIndex::Segments(PackedRTree::load(path)?),
            IndexKind::Edge => SpatialIndex::Edges(PackedRTree::load(path)?),
            IndexKind::Mbr => SpatialIndex::Mbrs(PackedRTree::load(path)?),
        })
    }
}

/// Builds a point index; ids are the input ordinals.
pub fn build_point_index(points: &[WorldPoint]) -> Result<PackedRTree<PointRecord>> {
    PackedRTree::build(points.iter().enumerate().map(|(id, &pos)| PointRecord { pos, id: id as u64 }).collect())
}

/// Builds a segment index; ids are the input ordinals.
pub fn build_segment_index(segments: &[SegmentGeom]) -> Result<PackedRTree<SegmentRecord>> {
    PackedRTree::build(segments.iter().enumerate().map(|(id, &geom)| SegmentRecord { geom, id: id as u64 }).collect())
}

pub fn persist_index(index: &SpatialIndex, path: &Path) -> Result<()> {
    index.persist(path)
}

pub fn load_index(path: &Path) -> Result<SpatialIndex> {
    SpatialIndex::load(path)
}
