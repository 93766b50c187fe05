//! Readers for the supported input formats. Coordinates are lon/lat degrees.

use std::io::{BufRead, BufReader, Read};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ring_signed_area2, segments_intersect, Point, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// One WKT geometry per line.
    WktLines,
    /// A FeatureCollection; properties are ignored.
    GeoJson,
    /// `lon,lat` per line.
    CsvPoints,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "wkt-lines" | "wkt" => Ok(InputFormat::WktLines),
            "geojson" => Ok(InputFormat::GeoJson),
            "csv-points" | "csv" => Ok(InputFormat::CsvPoints),
            other => Err(format!("unknown format `{other}` (expected wkt-lines, geojson or csv-points)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// The first CSV line is a header.
    pub csv_header: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RawGeometry {
    Point(Point<f64>),
    LineString(Vec<Point<f64>>),
    /// Outer ring first, then holes; rings are closed.
    Polygon(Vec<Vec<Point<f64>>>),
}

impl RawGeometry {
    pub fn type_name(&self) -> &'static str {
        match self {
            RawGeometry::Point(_) => "point",
            RawGeometry::LineString(_) => "linestring",
            RawGeometry::Polygon(_) => "polygon",
        }
    }

    fn same_kind(&self, o: &RawGeometry) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(o)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawFeature {
    pub id: u64,
    pub geometry: RawGeometry,
}

/// Collects features, enforcing one geometry kind per dataset and the
/// structural rules for linestrings and rings.
struct Collector {
    features: Vec<RawFeature>,
}

impl Collector {
    fn push(&mut self, record: usize, geometry: RawGeometry) -> Result<()> {
        if let Some(first) = self.features.first() {
            if !first.geometry.same_kind(&geometry) {
                return Err(Error::Parse {
                    record,
                    message: format!(
                        "mixed geometry types: dataset holds {}, found {}",
                        first.geometry.type_name(),
                        geometry.type_name()
                    ),
                });
            }
        }
        validate(record, &geometry)?;
        let id = self.features.len() as u64;
        self.features.push(RawFeature { id, geometry });
        Ok(())
    }

    fn finish(self) -> Result<Vec<RawFeature>> {
        if self.features.is_empty() {
            return Err(Error::NoFeatures);
        }
        Ok(self.features)
    }
}

fn validate(record: usize, g: &RawGeometry) -> Result<()> {
    let invalid = |message: String| Error::InvalidGeometry { record, message };
    let check_points = |pts: &[Point<f64>]| -> Result<()> {
        match pts.iter().find(|p| !p.is_finite()) {
            Some(p) => Err(Error::Parse { record, message: format!("non-finite coordinate {p:?}") }),
            None => Ok(()),
        }
    };
    match g {
        RawGeometry::Point(p) => check_points(std::slice::from_ref(p)),
        RawGeometry::LineString(v) => {
            check_points(v)?;
            if v.len() < 2 {
                return Err(invalid("linestring needs at least 2 vertices".into()));
            }
            Ok(())
        }
        RawGeometry::Polygon(rings) => {
            if rings.is_empty() {
                return Err(invalid("polygon has no rings".into()));
            }
            for (k, ring) in rings.iter().enumerate() {
                check_points(ring)?;
                if ring.len() < 4 {
                    return Err(invalid(format!("ring {k} has fewer than 4 vertices")));
                }
                if ring.first() != ring.last() {
                    return Err(invalid(format!("ring {k} is not closed")));
                }
                if ring_signed_area2(ring) == 0.0 {
                    return Err(invalid(format!("ring {k} has zero area")));
                }
                if ring_self_intersects(ring) {
                    return Err(invalid(format!("ring {k} self-intersects")));
                }
            }
            Ok(())
        }
    }
}

/// Whether any two non-adjacent edges of a closed ring touch.
pub fn ring_self_intersects(ring: &[Point<f64>]) -> bool {
    let edges: Vec<Segment<f64>> = ring.windows(2).filter(|w| w[0] != w[1]).map(|w| Segment::new(w[0], w[1])).collect();
    let n = edges.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // adjacent edges may only share their common vertex; folding
                // back over each other is an overlap
                let (s, t) = (&edges[i], &edges[j]);
                let cross = (s.b.x - s.a.x) * (t.b.y - t.a.y) - (s.b.y - s.a.y) * (t.b.x - t.a.x);
                let dot = (s.b.x - s.a.x) * (t.b.x - t.a.x) + (s.b.y - s.a.y) * (t.b.y - t.a.y);
                if cross == 0.0 && dot < 0.0 && n > 2 {
                    return true;
                }
                continue;
            }
            if segments_intersect(&edges[i], &edges[j]) {
                return true;
            }
        }
    }
    false
}

/// Reads a whole dataset. Multi-geometries are flattened, one feature per part.
pub fn parse_dataset<R: Read>(source: R, format: InputFormat, opts: ParseOptions) -> Result<Vec<RawFeature>> {
    let mut out = Collector { features: Vec::new() };
    match format {
        InputFormat::WktLines => parse_wkt_lines(BufReader::new(source), &mut out)?,
        InputFormat::GeoJson => parse_geojson(source, &mut out)?,
        InputFormat::CsvPoints => parse_csv(source, opts, &mut out)?,
    }
    out.finish()
}

fn parse_wkt_lines<R: BufRead>(source: R, out: &mut Collector) -> Result<()> {
    for (k, line) in source.lines().enumerate() {
        let record = k + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let geom = wkt::Wkt::<f64>::from_str(text).map_err(|e| Error::Parse { record, message: e.to_string() })?;
        flatten_wkt(record, &geom, out)?;
    }
    Ok(())
}

fn wkt_coords(record: usize, ls: &wkt::types::LineString<f64>) -> Result<Vec<Point<f64>>> {
    Ok(ls.coords().iter().map(|c| Point::new(c.x, c.y)).collect::<Vec<_>>()).and_then(|v| {
        if v.is_empty() {
            Err(Error::Parse { record, message: "empty geometry".into() })
        } else {
            Ok(v)
        }
    })
}

fn wkt_polygon(record: usize, p: &wkt::types::Polygon<f64>) -> Result<RawGeometry> {
    let rings = p.rings().iter().map(|r| wkt_coords(record, r)).collect::<Result<Vec<_>>>()?;
    Ok(RawGeometry::Polygon(rings))
}

fn flatten_wkt(record: usize, g: &wkt::Wkt<f64>, out: &mut Collector) -> Result<()> {
    use wkt::Wkt;
    let empty = || Error::Parse { record, message: "empty geometry".into() };
    match g {
        Wkt::Point(p) => {
            let c = p.coord().ok_or_else(empty)?;
            out.push(record, RawGeometry::Point(Point::new(c.x, c.y)))
        }
        Wkt::MultiPoint(mp) => {
            for p in mp.points() {
                let c = p.coord().ok_or_else(empty)?;
                out.push(record, RawGeometry::Point(Point::new(c.x, c.y)))?;
            }
            Ok(())
        }
        Wkt::LineString(ls) => out.push(record, RawGeometry::LineString(wkt_coords(record, ls)?)),
        Wkt::MultiLineString(mls) => {
            for ls in mls.line_strings() {
                out.push(record, RawGeometry::LineString(wkt_coords(record, ls)?))?;
            }
            Ok(())
        }
        Wkt::Polygon(p) => out.push(record, wkt_polygon(record, p)?),
        Wkt::MultiPolygon(mp) => {
            for p in mp.polygons() {
                out.push(record, wkt_polygon(record, p)?)?;
            }
            Ok(())
        }
        Wkt::GeometryCollection(gc) => {
            for g in gc.geometries() {
                flatten_wkt(record, g, out)?;
            }
            Ok(())
        }
    }
}

fn position(record: usize, p: &[f64]) -> Result<Point<f64>> {
    match p {
        [x, y, ..] => Ok(Point::new(*x, *y)),
        _ => Err(Error::Parse { record, message: "position needs two coordinates".into() }),
    }
}

fn positions(record: usize, ps: &[Vec<f64>]) -> Result<Vec<Point<f64>>> {
    ps.iter().map(|p| position(record, p)).collect()
}

fn flatten_geojson(record: usize, v: &geojson::Value, out: &mut Collector) -> Result<()> {
    use geojson::Value;
    match v {
        Value::Point(p) => out.push(record, RawGeometry::Point(position(record, p)?)),
        Value::MultiPoint(ps) => {
            for p in ps {
                out.push(record, RawGeometry::Point(position(record, p)?))?;
            }
            Ok(())
        }
        Value::LineString(ls) => out.push(record, RawGeometry::LineString(positions(record, ls)?)),
        Value::MultiLineString(mls) => {
            for ls in mls {
                out.push(record, RawGeometry::LineString(positions(record, ls)?))?;
            }
            Ok(())
        }
        Value::Polygon(rings) => {
            let rings = rings.iter().map(|r| positions(record, r)).collect::<Result<Vec<_>>>()?;
            out.push(record, RawGeometry::Polygon(rings))
        }
        Value::MultiPolygon(polys) => {
            for rings in polys {
                let rings = rings.iter().map(|r| positions(record, r)).collect::<Result<Vec<_>>>()?;
                out.push(record, RawGeometry::Polygon(rings))?;
            }
            Ok(())
        }
        Value::GeometryCollection(gs) => {
            for g in gs {
                flatten_geojson(record, &g.value, out)?;
            }
            Ok(())
        }
    }
}

fn parse_geojson<R: Read>(source: R, out: &mut Collector) -> Result<()> {
    let doc = geojson::GeoJson::from_reader(source).map_err(|e| Error::Parse { record: 0, message: e.to_string() })?;
    match doc {
        geojson::GeoJson::FeatureCollection(fc) => {
            for (k, f) in fc.features.iter().enumerate() {
                let record = k + 1;
                let g = f
                    .geometry
                    .as_ref()
                    .ok_or_else(|| Error::Parse { record, message: "feature has no geometry".into() })?;
                flatten_geojson(record, &g.value, out)?;
            }
        }
        geojson::GeoJson::Feature(f) => {
            let g = f
                .geometry
                .as_ref()
                .ok_or_else(|| Error::Parse { record: 1, message: "feature has no geometry".into() })?;
            flatten_geojson(1, &g.value, out)?;
        }
        geojson::GeoJson::Geometry(g) => flatten_geojson(1, &g.value, out)?,
    }
    Ok(())
}

fn parse_csv<R: Read>(source: R, opts: ParseOptions, out: &mut Collector) -> Result<()> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(opts.csv_header).flexible(true).trim(csv::Trim::All).from_reader(source);
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            record: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let record = row.position().map(|p| p.line() as usize).unwrap_or(0);
        if row.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |k: usize| -> Result<f64> {
            let raw = row.get(k).ok_or_else(|| Error::Parse { record, message: "expected lon,lat".into() })?;
            raw.parse::<f64>().map_err(|_| Error::Parse { record, message: format!("bad number `{raw}`") })
        };
        out.push(record, RawGeometry::Point(Point::new(field(0)?, field(1)?)))?;
    }
    Ok(())
}
