//! Leaf record types and their fixed-size little-endian encodings.

use serde::{Deserialize, Serialize};

use crate::geometry::dist_point_segment;
use crate::{BoundingBox, SegmentGeom, WorldPoint};

/// Node type of an index file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u32)]
pub enum IndexKind {
    Point = 1,
    Segment = 2,
    Edge = 3,
    Mbr = 4,
}

impl IndexKind {
    pub fn from_u32(v: u32) -> Option<Self> {
        match v {
            1 => Some(IndexKind::Point),
            2 => Some(IndexKind::Segment),
            3 => Some(IndexKind::Edge),
            4 => Some(IndexKind::Mbr),
            _ => None,
        }
    }

    /// Conventional file name of an index of this kind within a dataset directory.
    pub fn file_name(&self) -> &'static str {
        match self {
            IndexKind::Point => "RtreeP.idx",
            IndexKind::Segment => "RtreeL.idx",
            IndexKind::Edge => "RtreeE.idx",
            IndexKind::Mbr => "RtreeMBR.idx",
        }
    }
}

/// A value stored in the leaves of a [`PackedRTree`](super::PackedRTree).
pub trait Record: Copy + Send + Sync + 'static {
    const KIND: IndexKind;
    /// Encoded size in bytes.
    const SIZE: usize;

    fn encode(&self, out: &mut [u8]);
    fn decode(buf: &[u8]) -> Self;
    fn bbox(&self) -> BoundingBox;
    /// Exact intersection with a closed box.
    fn intersects_box(&self, b: &BoundingBox) -> bool;
    /// Stable identifier; breaks ties in nearest-neighbour search.
    fn id(&self) -> u64;
}

/// Records that have a distance to a query point.
pub trait Measurable: Record {
    fn distance_to(&self, p: &WorldPoint) -> f64;
}

#[inline]
pub(crate) fn get_f64(buf: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(buf[off..off + 8].try_into().unwrap())
}

#[inline]
pub(crate) fn get_u64(buf: &[u8], off: usize) -> u64 {
    u64::from_le_bytes(buf[off..off + 8].try_into().unwrap())
}

#[inline]
pub(crate) fn put_f64(buf: &mut [u8], off: usize, v: f64) {
    buf[off..off + 8].copy_from_slice(&v.to_le_bytes());
}

#[inline]
pub(crate) fn put_u64(buf: &mut [u8], off: usize, v: u64) {
    buf[off..off + 8].copy_from_slice(&v.to_le_bytes());
}

fn encode_segment(s: &SegmentGeom, out: &mut [u8]) {
    put_f64(out, 0, s.a.x);
    put_f64(out, 8, s.a.y);
    put_f64(out, 16, s.b.x);
    put_f64(out, 24, s.b.y);
}

fn decode_segment(buf: &[u8]) -> SegmentGeom {
    SegmentGeom::new(
        WorldPoint::new(get_f64(buf, 0), get_f64(buf, 8)),
        WorldPoint::new(get_f64(buf, 16), get_f64(buf, 24)),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointRecord {
    pub pos: WorldPoint,
    pub id: u64,
}

impl Record for PointRecord {
    const KIND: IndexKind = IndexKind::Point;
    const SIZE: usize = 24;

    fn encode(&self, out: &mut [u8]) {
        put_f64(out, 0, self.pos.x);
        put_f64(out, 8, self.pos.y);
        put_u64(out, 16, self.id);
    }

    #[inline]
    fn decode(buf: &[u8]) -> Self {
        PointRecord { pos: WorldPoint::new(get_f64(buf, 0), get_f64(buf, 8)), id: get_u64(buf, 16) }
    }

    fn bbox(&self) -> BoundingBox {
        BoundingBox::from_point(self.pos)
    }

    #[inline]
    fn intersects_box(&self, b: &BoundingBox) -> bool {
        b.contains_point(&self.pos)
    }

    fn id(&self) -> u64 {
        self.id
    }
}

impl Measurable for PointRecord {
    #[inline]
    fn distance_to(&self, p: &WorldPoint) -> f64 {
        self.pos.distance(p)
    }
}

/// One segment of a linestring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentRecord {
    pub geom: SegmentGeom,
    pub id: u64,
}

impl Record for SegmentRecord {
    const KIND: IndexKind = IndexKind::Segment;
    const SIZE: usize = 40;

    fn encode(&self, out: &mut [u8]) {
        encode_segment(&self.geom, out);
        put_u64(out, 32, self.id);
    }

    #[inline]
    fn decode(buf: &[u8]) -> Self {
        SegmentRecord { geom: decode_segment(buf), id: get_u64(buf, 32) }
    }

    fn bbox(&self) -> BoundingBox {
        self.geom.bbox()
    }

    #[inline]
    fn intersects_box(&self, b: &BoundingBox) -> bool {
        self.geom.intersects_box(b)
    }

    fn id(&self) -> u64 {
        self.id
    }
}

impl Measurable for SegmentRecord {
    #[inline]
    fn distance_to(&self, p: &WorldPoint) -> f64 {
        dist_point_segment(p, &self.geom)
    }
}

/// A polygon edge as stored in the edge tree.
///
/// Scan-line ownership is half-open: an edge counts as crossing the
/// horizontal line `y = c` only when `min_y < c <= max_y`. A vertex where a
/// ring passes monotonically through `c` is therefore owned by exactly one of
/// its two edges, while a vertex where the ring turns back is owned by both
/// or by neither, which leaves the crossing parity unchanged. Horizontal
/// edges own nothing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndexedEdge {
    pub geom: SegmentGeom,
    /// Ordinal of the edge within its dataset.
    pub id: u64,
    pub polygon_id: u64,
    pub is_level: bool,
}

impl IndexedEdge {
    pub fn new(geom: SegmentGeom, id: u64, polygon_id: u64) -> Self {
        IndexedEdge { geom, id, polygon_id, is_level: geom.a.y == geom.b.y }
    }

    pub fn min_y(&self) -> f64 {
        self.geom.a.y.min(self.geom.b.y)
    }

    pub fn max_y(&self) -> f64 {
        self.geom.a.y.max(self.geom.b.y)
    }

    /// Whether this edge crosses the scan line `y` under the half-open rule.
    #[inline]
    pub fn owns_scanline(&self, y: f64) -> bool {
        !self.is_level && self.min_y() < y && y <= self.max_y()
    }

    /// The x coordinate where the edge meets the scan line `y`.
    ///
    /// Evaluated from the lower endpoint so the result does not depend on
    /// the edge's orientation within its ring.
    #[inline]
    pub fn crossing_x(&self, y: f64) -> f64 {
        let (lo, hi) =
            if self.geom.a.y <= self.geom.b.y { (self.geom.a, self.geom.b) } else { (self.geom.b, self.geom.a) };
        lo.x + (y - lo.y) * (hi.x - lo.x) / (hi.y - lo.y)
    }
}

impl Record for IndexedEdge {
    const KIND: IndexKind = IndexKind::Edge;
    const SIZE: usize = 56;

    fn encode(&self, out: &mut [u8]) {
        encode_segment(&self.geom, out);
        put_u64(out, 32, self.id);
        put_u64(out, 40, self.polygon_id);
        put_u64(out, 48, u64::from(self.is_level));
    }

    #[inline]
    fn decode(buf: &[u8]) -> Self {
        IndexedEdge {
            geom: decode_segment(buf),
            id: get_u64(buf, 32),
            polygon_id: get_u64(buf, 40),
            is_level: get_u64(buf, 48) & 1 == 1,
        }
    }

    fn bbox(&self) -> BoundingBox {
        self.geom.bbox()
    }

    #[inline]
    fn intersects_box(&self, b: &BoundingBox) -> bool {
        self.geom.intersects_box(b)
    }

    fn id(&self) -> u64 {
        self.id
    }
}

impl Measurable for IndexedEdge {
    #[inline]
    fn distance_to(&self, p: &WorldPoint) -> f64 {
        dist_point_segment(p, &self.geom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolygonMbrEntry {
    pub bbox: BoundingBox,
    pub polygon_id: u64,
}

impl PolygonMbrEntry {
    pub fn x_span(&self) -> f64 {
        self.bbox.max_x - self.bbox.min_x
    }
}

impl Record for PolygonMbrEntry {
    const KIND: IndexKind = IndexKind::Mbr;
    const SIZE: usize = 40;

    fn encode(&self, out: &mut [u8]) {
        put_f64(out, 0, self.bbox.min_x);
        put_f64(out, 8, self.bbox.min_y);
        put_f64(out, 16, self.bbox.max_x);
        put_f64(out, 24, self.bbox.max_y);
        put_u64(out, 32, self.polygon_id);
    }

    #[inline]
    fn decode(buf: &[u8]) -> Self {
        PolygonMbrEntry {
            bbox: BoundingBox {
                min_x: get_f64(buf, 0),
                min_y: get_f64(buf, 8),
                max_x: get_f64(buf, 16),
                max_y: get_f64(buf, 24),
            },
            polygon_id: get_u64(buf, 32),
        }
    }

    fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    #[inline]
    fn intersects_box(&self, b: &BoundingBox) -> bool {
        self.bbox.intersects(b)
    }

    fn id(&self) -> u64 {
        self.polygon_id
    }
}
