//! Display-driven rasterization of vector data.
//!
//! Instead of plotting every object and merging the results, each output
//! pixel asks a spatial index which objects are near it. Points, linestring
//! segments and polygon edges live in packed R-trees; polygons additionally
//! carry an MBR tree so that interior tests can run as short, index-backed
//! horizontal ray casts.
//!
//! The geometric primitives and tile math are generic over the floating
//! point type (see [`Scalar`]); the index files and the renderer work in
//! `f64` Web Mercator meters, which is what the aliases below name.

pub mod error;
pub mod geometry;
pub mod index;
pub mod ingest;
pub mod oracle;
pub mod render;
pub mod scalar;
pub mod synth;
pub mod tile;

pub use error::{Error, Result};
pub use index::{
    IndexKind, IndexedEdge, PackedRTree, PointRecord, PolygonMbrEntry, QueryStats, SegmentRecord, SpatialIndex,
};
pub use ingest::{Catalog, Dataset, DatasetHandle, GeomType, GeometrySet, InputFormat, RawFeature, RawGeometry};
pub use render::{ClassCode, ClassGrid, FillMode, PatternLibrary, Rgba, RgbaImage, Style};
pub use scalar::Scalar;
pub use tile::{PixelAddress, TileKey};

/// A Web Mercator position in meters.
pub type WorldPoint = geometry::Point<f64>;
/// A straight segment between two Web Mercator positions.
pub type SegmentGeom = geometry::Segment<f64>;
/// An axis-aligned box in Web Mercator meters.
pub type BoundingBox = geometry::BBox<f64>;

/// Single precision variants, for callers that only need screen-space math.
pub type WorldPointF32 = geometry::Point<f32>;
pub type SegmentGeomF32 = geometry::Segment<f32>;
pub type BoundingBoxF32 = geometry::BBox<f32>;
