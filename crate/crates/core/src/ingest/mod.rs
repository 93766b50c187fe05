//! Parsing, projection and registration of vector datasets.

mod dataset;
mod parse;

pub use dataset::{
    line_segments, register_dataset, Catalog, Dataset, DatasetCounts, DatasetHandle, DatasetIndexes, GeomType,
    GeometrySet,
};
pub use parse::{parse_dataset, ring_self_intersects, InputFormat, ParseOptions, RawFeature, RawGeometry};
