use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::parse::{RawFeature, RawGeometry};
use crate::error::{Error, Result};
use crate::index::{
    build_point_index, build_polygon_indexes, build_segment_index, IndexKind, IndexedEdge, PackedRTree, PointRecord,
    PolygonMbrEntry, PolygonRings, SegmentRecord,
};
use crate::tile::lonlat_to_mercator;
use crate::{BoundingBox, SegmentGeom, WorldPoint};

const META_FILE: &str = "meta.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeomType {
    Point,
    Line,
    Polygon,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetCounts {
    /// Features after multi-geometry flattening.
    pub records: u64,
    /// Points, segments, or polygon edges before cutting.
    pub primitives: u64,
    /// Edge records in the edge index; polygons only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_edges: Option<u64>,
}

/// Metadata of a registered dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetHandle {
    pub name: String,
    pub geom_type: GeomType,
    pub mbr: BoundingBox,
    pub counts: DatasetCounts,
    /// Index files, relative to the dataset directory. Empty for in-memory datasets.
    pub index_paths: Vec<PathBuf>,
}

/// Projected geometry, ready for indexing.
#[derive(Clone, Debug, PartialEq)]
pub enum GeometrySet {
    Points(Vec<WorldPoint>),
    Lines(Vec<Vec<WorldPoint>>),
    /// Each polygon is a list of closed rings, outer first.
    Polygons(Vec<Vec<Vec<WorldPoint>>>),
}

impl GeometrySet {
    /// Projects lon/lat features; all must share one geometry kind.
    pub fn from_features(features: &[RawFeature]) -> Result<Self> {
        let project = |record: usize, pts: &[crate::geometry::Point<f64>]| -> Result<Vec<WorldPoint>> {
            pts.iter()
                .map(|p| {
                    lonlat_to_mercator(p.x, p.y).map_err(|e| match e {
                        Error::ProjectionOutOfRange { .. } => e,
                        other => Error::Parse { record, message: other.to_string() },
                    })
                })
                .collect()
        };
        let first = features.first().ok_or(Error::NoFeatures)?;
        let mismatch = |k: usize| Error::Parse { record: k + 1, message: "mixed geometry types".into() };
        Ok(match &first.geometry {
            RawGeometry::Point(_) => {
                let mut out = Vec::with_capacity(features.len());
                for (k, f) in features.iter().enumerate() {
                    let RawGeometry::Point(p) = &f.geometry else { return Err(mismatch(k)) };
                    out.push(project(k + 1, std::slice::from_ref(p))?[0]);
                }
                GeometrySet::Points(out)
            }
            RawGeometry::LineString(_) => {
                let mut out = Vec::with_capacity(features.len());
                for (k, f) in features.iter().enumerate() {
                    let RawGeometry::LineString(v) = &f.geometry else { return Err(mismatch(k)) };
                    out.push(project(k + 1, v)?);
                }
                GeometrySet::Lines(out)
            }
            RawGeometry::Polygon(_) => {
                let mut out = Vec::with_capacity(features.len());
                for (k, f) in features.iter().enumerate() {
                    let RawGeometry::Polygon(rings) = &f.geometry else { return Err(mismatch(k)) };
                    out.push(rings.iter().map(|r| project(k + 1, r)).collect::<Result<Vec<_>>>()?);
                }
                GeometrySet::Polygons(out)
            }
        })
    }

    pub fn geom_type(&self) -> GeomType {
        match self {
            GeometrySet::Points(_) => GeomType::Point,
            GeometrySet::Lines(_) => GeomType::Line,
            GeometrySet::Polygons(_) => GeomType::Polygon,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            GeometrySet::Points(v) => v.len(),
            GeometrySet::Lines(v) => v.len(),
            GeometrySet::Polygons(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Splits linestrings into segments. Repeated vertices are skipped; a
/// linestring whose vertices all coincide keeps one zero-length segment so it
/// still renders as a point.
pub fn line_segments(lines: &[Vec<WorldPoint>]) -> Vec<SegmentGeom> {
    let mut out = Vec::new();
    for line in lines {
        let before = out.len();
        out.extend(line.windows(2).filter(|w| w[0] != w[1]).map(|w| SegmentGeom::new(w[0], w[1])));
        if out.len() == before {
            if let Some(&p) = line.first() {
                out.push(SegmentGeom::new(p, p));
            }
        }
    }
    out
}

/// The indexes backing one dataset.
#[derive(Debug)]
pub enum DatasetIndexes {
    Points(PackedRTree<PointRecord>),
    Lines(PackedRTree<SegmentRecord>),
    Polygons { edges: PackedRTree<IndexedEdge>, mbrs: PackedRTree<PolygonMbrEntry> },
}

impl DatasetIndexes {
    fn kinds(&self) -> Vec<IndexKind> {
        match self {
            DatasetIndexes::Points(_) => vec![IndexKind::Point],
            DatasetIndexes::Lines(_) => vec![IndexKind::Segment],
            DatasetIndexes::Polygons { .. } => vec![IndexKind::Edge, IndexKind::Mbr],
        }
    }

    fn persist(&self, dir: &Path) -> Result<()> {
        match self {
            DatasetIndexes::Points(t) => t.persist(&dir.join(IndexKind::Point.file_name())),
            DatasetIndexes::Lines(t) => t.persist(&dir.join(IndexKind::Segment.file_name())),
            DatasetIndexes::Polygons { edges, mbrs } => {
                edges.persist(&dir.join(IndexKind::Edge.file_name()))?;
                mbrs.persist(&dir.join(IndexKind::Mbr.file_name()))
            }
        }
    }

    fn primary_len(&self) -> usize {
        match self {
            DatasetIndexes::Points(t) => t.len(),
            DatasetIndexes::Lines(t) => t.len(),
            DatasetIndexes::Polygons { edges, .. } => edges.len(),
        }
    }

    fn mbr(&self) -> BoundingBox {
        match self {
            DatasetIndexes::Points(t) => t.mbr(),
            DatasetIndexes::Lines(t) => t.mbr(),
            DatasetIndexes::Polygons { edges, .. } => edges.mbr(),
        }
    }
}

/// A registered dataset: metadata plus its (possibly memory-mapped) indexes.
#[derive(Debug)]
pub struct Dataset {
    handle: DatasetHandle,
    indexes: DatasetIndexes,
}

impl Dataset {
    /// Builds in-memory indexes.
    pub fn build(name: &str, set: &GeometrySet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::NoFeatures);
        }
        let records = set.len() as u64;
        let (indexes, primitives) = match set {
            GeometrySet::Points(pts) => (DatasetIndexes::Points(build_point_index(pts)?), pts.len() as u64),
            GeometrySet::Lines(lines) => {
                let segs = line_segments(lines);
                (DatasetIndexes::Lines(build_segment_index(&segs)?), segs.len() as u64)
            }
            GeometrySet::Polygons(polys) => {
                let rings: Vec<PolygonRings> = polys
                    .iter()
                    .enumerate()
                    .map(|(id, rings)| PolygonRings { id: id as u64, rings: rings.clone() })
                    .collect();
                let before: usize = polys.iter().flatten().map(|r| r.len().saturating_sub(1)).sum();
                let (edges, mbrs) = build_polygon_indexes(&rings)?;
                (DatasetIndexes::Polygons { edges, mbrs }, before as u64)
            }
        };
        let cut_edges = match &indexes {
            DatasetIndexes::Polygons { edges, .. } => Some(edges.len() as u64),
            _ => None,
        };
        let handle = DatasetHandle {
            name: name.to_string(),
            geom_type: set.geom_type(),
            mbr: indexes.mbr(),
            counts: DatasetCounts { records, primitives, cut_edges },
            index_paths: Vec::new(),
        };
        Ok(Dataset { handle, indexes })
    }

    /// Writes index files and `meta.json` into `dir`, which must exist.
    pub fn persist(&self, dir: &Path) -> Result<DatasetHandle> {
        self.indexes.persist(dir)?;
        let mut handle = self.handle.clone();
        handle.index_paths = self.indexes.kinds().iter().map(|k| PathBuf::from(k.file_name())).collect();
        let tmp = dir.join(format!("{META_FILE}.tmp"));
        fs::write(&tmp, serde_json::to_vec_pretty(&handle)?)?;
        fs::rename(&tmp, dir.join(META_FILE))?;
        Ok(handle)
    }

    /// Opens a persisted dataset directory, memory-mapping its indexes.
    pub fn open(dir: &Path) -> Result<Self> {
        let handle: DatasetHandle = serde_json::from_slice(&fs::read(dir.join(META_FILE))?)?;
        let path = |k: IndexKind| dir.join(k.file_name());
        let indexes = match handle.geom_type {
            GeomType::Point => DatasetIndexes::Points(PackedRTree::load(&path(IndexKind::Point))?),
            GeomType::Line => DatasetIndexes::Lines(PackedRTree::load(&path(IndexKind::Segment))?),
            GeomType::Polygon => DatasetIndexes::Polygons {
                edges: PackedRTree::load(&path(IndexKind::Edge))?,
                mbrs: PackedRTree::load(&path(IndexKind::Mbr))?,
            },
        };
        let expected = match handle.geom_type {
            GeomType::Polygon => handle.counts.cut_edges.unwrap_or(handle.counts.primitives),
            _ => handle.counts.primitives,
        };
        if indexes.primary_len() as u64 != expected {
            return Err(Error::IndexFormat(format!(
                "{}: metadata lists {expected} primitives, index holds {}",
                handle.name,
                indexes.primary_len()
            )));
        }
        Ok(Dataset { handle, indexes })
    }

    pub fn handle(&self) -> &DatasetHandle {
        &self.handle
    }

    pub fn name(&self) -> &str {
        &self.handle.name
    }

    pub fn geom_type(&self) -> GeomType {
        self.handle.geom_type
    }

    pub fn mbr(&self) -> BoundingBox {
        self.handle.mbr
    }

    pub fn indexes(&self) -> &DatasetIndexes {
        &self.indexes
    }
}

fn validate_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name.len() <= 128
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidName(name.to_string()))
    }
}

/// The set of registered datasets, optionally backed by a directory with one
/// subdirectory per dataset.
#[derive(Debug)]
pub struct Catalog {
    root: Option<PathBuf>,
    datasets: RwLock<BTreeMap<String, Arc<Dataset>>>,
    pending: Mutex<HashSet<String>>,
}

impl Catalog {
    /// A catalog that keeps indexes in memory only.
    pub fn in_memory() -> Self {
        Catalog { root: None, datasets: RwLock::default(), pending: Mutex::default() }
    }

    /// Opens (creating if needed) a catalog directory and loads every dataset in it.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        let mut datasets = BTreeMap::new();
        for entry in fs::read_dir(&root)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.starts_with('.') || !entry.path().join(META_FILE).is_file() {
                continue;
            }
            let ds = Dataset::open(&entry.path())?;
            datasets.insert(ds.name().to_string(), Arc::new(ds));
        }
        Ok(Catalog { root: Some(root), datasets: RwLock::new(datasets), pending: Mutex::default() })
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    /// Projects, indexes and (for directory catalogs) persists `features`.
    pub fn register(&self, name: &str, features: &[RawFeature]) -> Result<DatasetHandle> {
        validate_name(name)?;
        self.reserved(name, || GeometrySet::from_features(features).and_then(|set| self.install(name, &set)))
    }

    pub fn register_geometry(&self, name: &str, set: &GeometrySet) -> Result<DatasetHandle> {
        validate_name(name)?;
        self.reserved(name, || self.install(name, set))
    }

    /// Runs `f` while holding `name` so that concurrent registrations of the
    /// same name fail fast instead of racing.
    fn reserved<F>(&self, name: &str, f: F) -> Result<DatasetHandle>
    where
        F: FnOnce() -> Result<DatasetHandle>,
    {
        {
            let mut pending = self.pending.lock().unwrap();
            if self.datasets.read().unwrap().contains_key(name) || !pending.insert(name.to_string()) {
                return Err(Error::DuplicateDataset(name.to_string()));
            }
        }
        let out = f();
        self.pending.lock().unwrap().remove(name);
        out
    }

    fn install(&self, name: &str, set: &GeometrySet) -> Result<DatasetHandle> {
        let built = Dataset::build(name, set)?;
        let dataset = match &self.root {
            None => built,
            Some(root) => {
                let staging = root.join(format!(".staging-{name}"));
                let target = root.join(name);
                let attempt = (|| {
                    if staging.exists() {
                        fs::remove_dir_all(&staging)?;
                    }
                    fs::create_dir_all(&staging)?;
                    built.persist(&staging)?;
                    fs::rename(&staging, &target)?;
                    Dataset::open(&target)
                })();
                if attempt.is_err() {
                    let _ = fs::remove_dir_all(&staging);
                }
                attempt?
            }
        };
        let handle = dataset.handle().clone();
        self.datasets.write().unwrap().insert(name.to_string(), Arc::new(dataset));
        Ok(handle)
    }

    pub fn get(&self, name: &str) -> Option<Arc<Dataset>> {
        self.datasets.read().unwrap().get(name).cloned()
    }

    pub fn lookup(&self, name: &str) -> Result<Arc<Dataset>> {
        self.get(name).ok_or_else(|| Error::UnknownDataset(name.to_string()))
    }

    /// Handles of all datasets, ordered by name.
    pub fn list(&self) -> Vec<DatasetHandle> {
        self.datasets.read().unwrap().values().map(|d| d.handle().clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.datasets.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Registers `features` under `name` in `catalog`.
pub fn register_dataset(catalog: &Catalog, name: &str, features: &[RawFeature]) -> Result<DatasetHandle> {
    catalog.register(name, features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::ingest::{parse_dataset, InputFormat, ParseOptions};

    fn features(text: &str) -> Vec<RawFeature> {
        parse_dataset(text.as_bytes(), InputFormat::WktLines, ParseOptions::default()).unwrap()
    }

    #[test]
    fn three_points() {
        let c = Catalog::in_memory();
        let h = c.register("pts", &features("POINT(0 0)\nPOINT(10 5)\nPOINT(-3 -7)")).unwrap();
        assert_eq!(h.counts.primitives, 3);
        assert_eq!(h.geom_type, GeomType::Point);
        let lo = lonlat_to_mercator(-3.0, -7.0).unwrap();
        let hi = lonlat_to_mercator(10.0, 5.0).unwrap();
        assert_eq!(h.mbr, BoundingBox::new(lo.x, lo.y, hi.x, hi.y));
    }

    #[test]
    fn triangle_edges() {
        let c = Catalog::in_memory();
        let h = c.register("tri", &features("POLYGON((0 0,2 0,1 2,0 0))")).unwrap();
        assert_eq!(h.counts.primitives, 3);
        assert_eq!(h.counts.cut_edges, Some(3));
        assert_eq!(h.counts.records, 1);
    }

    #[test]
    fn linestring_segments() {
        let c = Catalog::in_memory();
        let h = c.register("l", &features("LINESTRING(0 0,1 1,2 0)")).unwrap();
        assert_eq!(h.counts.primitives, 2);
    }

    #[test]
    fn duplicate_name() {
        let c = Catalog::in_memory();
        c.register("a", &features("POINT(0 0)")).unwrap();
        assert!(matches!(c.register("a", &features("POINT(1 1)")), Err(Error::DuplicateDataset(_))));
        assert!(matches!(c.register("../x", &features("POINT(1 1)")), Err(Error::InvalidName(_))));
    }

    #[test]
    fn projection_failure_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let c = Catalog::open(dir.path()).unwrap();
        let bad = vec![RawFeature { id: 0, geometry: RawGeometry::Point(Point::new(200.0, 0.0)) }];
        assert!(c.register("bad", &bad).is_err());
        assert!(c.get("bad").is_none());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
        // the name is free again
        c.register("bad", &features("POINT(0 0)")).unwrap();
    }

    #[test]
    fn persisted_catalog_reopens() {
        let dir = tempfile::tempdir().unwrap();
        let h = {
            let c = Catalog::open(dir.path()).unwrap();
            c.register("poly", &features("POLYGON((0 0,4 0,4 4,0 4,0 0),(1 1,1 3,3 3,3 1,1 1))")).unwrap()
        };
        assert_eq!(h.counts.primitives, 8);
        assert_eq!(h.index_paths, vec![PathBuf::from("RtreeE.idx"), PathBuf::from("RtreeMBR.idx")]);
        let c = Catalog::open(dir.path()).unwrap();
        let ds = c.get("poly").unwrap();
        assert_eq!(ds.handle(), &h);
        match ds.indexes() {
            DatasetIndexes::Polygons { edges, mbrs } => {
                assert!(edges.is_mapped());
                assert_eq!(mbrs.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_linestring_kept_as_point() {
        let p = WorldPoint::new(1.0, 1.0);
        let segs = line_segments(&[vec![p, p, p], vec![p, WorldPoint::new(2.0, 1.0), WorldPoint::new(2.0, 1.0)]]);
        assert_eq!(segs.len(), 2);
        assert!(segs[0].is_degenerate());
    }
}
