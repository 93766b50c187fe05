//! Stroke classification of a pixel against buffered points or segments.
//!
//! With `R = N·R_z` the stroke radius, a pixel whose nearest object lies
//! within `R₁ = R − (√2/4)·R_z` is fully covered, one whose nearest object
//! lies beyond `R₂ = R + (√2/4)·R_z` is background, and anything in between
//! is a transition pixel whose value is the number of its four sub-pixel
//! centers (offset ±R_z/4) lying within `R` of that nearest object.
//!
//! The index is consulted in increasing order of cost: a limit-1 box query
//! with the square inscribed in the `R₁` circle, then a nearest query bounded
//! by `R₁`, then one bounded by `R₂`.

use crate::error::{Error, Result};
use crate::geometry::{BBox, Point};
use crate::index::{Measurable, PackedRTree, QueryStats, SpatialIndex};
use crate::scalar::Scalar;
use crate::tile::resolution;
use crate::WorldPoint;

use super::grid::ClassCode;

/// Distance thresholds for one zoom level and stroke width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrokeThresholds<T = f64> {
    /// `R_z`, meters per pixel.
    pub resolution: T,
    /// `R = N · R_z`.
    pub radius: T,
    /// `R₁`; at or below it a pixel is fully covered.
    pub inner: T,
    /// `R₂`; beyond it a pixel is background.
    pub outer: T,
    /// Half-width of the square inscribed in the `R₁` circle.
    pub inner_half_width: T,
}

impl<T: Scalar> StrokeThresholds<T> {
    pub fn new(z: u32, width: u32) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidWidth(width));
        }
        let rz = resolution::<T>(z)?;
        let radius = T::lit(f64::from(width)) * rz;
        let quarter_diag = T::SQRT_2() / T::lit(4.0) * rz;
        let inner = radius - quarter_diag;
        Ok(StrokeThresholds {
            resolution: rz,
            radius,
            inner,
            outer: radius + quarter_diag,
            inner_half_width: T::SQRT_2() / T::two() * inner,
        })
    }

    /// Floating point tolerance around `R₁` and `R₂`: `1e-9 · R_z`.
    pub fn band_epsilon(&self) -> T {
        self.resolution * T::lit(1e-9)
    }

    /// Whether `d` lies so close to `R₁` or `R₂` that rounding may flip its class.
    pub fn in_band(&self, d: T) -> bool {
        let eps = self.band_epsilon();
        (d - self.inner).abs() < eps || (d - self.outer).abs() < eps
    }

    /// The four sub-pixel sample points: top-left, top-right, bottom-left, bottom-right.
    pub fn subpixel_centers(&self, p: &Point<T>) -> [Point<T>; 4] {
        let q = self.resolution / T::lit(4.0);
        [p.offset(-q, q), p.offset(q, q), p.offset(-q, -q), p.offset(q, -q)]
    }

    /// Number of sub-pixel centers within `R` according to `distance`.
    pub fn covered_subpixels<F: Fn(&Point<T>) -> T>(&self, p: &Point<T>, distance: F) -> u8 {
        self.subpixel_centers(p).iter().filter(|c| distance(c) <= self.radius).count() as u8
    }
}

/// Classifies the pixel centered at `p` against the objects of `tree`.
pub fn classify_in_tree<R: Measurable>(
    p: &WorldPoint,
    th: &StrokeThresholds<f64>,
    tree: &PackedRTree<R>,
    stats: &mut QueryStats,
) -> ClassCode {
    let inner_box = BBox::around(*p, th.inner_half_width);
    if tree.any_intersecting(&inner_box, stats).is_some() {
        return ClassCode::FULL;
    }
    if tree.nearest_within(p, th.inner, stats).is_some() {
        return ClassCode::FULL;
    }
    match tree.nearest_within(p, th.outer, stats) {
        Some((nearest, _)) => ClassCode::from_coverage(th.covered_subpixels(p, |c| nearest.distance_to(c))),
        None => ClassCode::BACKGROUND,
    }
}

/// Classifies a pixel center at zoom `z` with stroke width `width` pixels.
pub fn classify_pixel_sibv(p: &WorldPoint, z: u32, width: u32, index: &SpatialIndex) -> Result<ClassCode> {
    let th = StrokeThresholds::new(z, width)?;
    let mut stats = QueryStats::default();
    match index {
        SpatialIndex::Points(t) => Ok(classify_in_tree(p, &th, t, &mut stats)),
        SpatialIndex::Segments(t) => Ok(classify_in_tree(p, &th, t, &mut stats)),
        SpatialIndex::Edges(t) => Ok(classify_in_tree(p, &th, t, &mut stats)),
        SpatialIndex::Mbrs(_) => Err(Error::IndexFormat("MBR indexes carry no stroke geometry".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{build_point_index, build_segment_index};
    use crate::SegmentGeom;

    #[test]
    fn thresholds() {
        let th = StrokeThresholds::<f64>::new(10, 2).unwrap();
        let rz = resolution::<f64>(10).unwrap();
        assert_eq!(th.radius, 2.0 * rz);
        assert!((th.inner - (2.0 - 2f64.sqrt() / 4.0) * rz).abs() < 1e-9);
        assert!((th.outer - (2.0 + 2f64.sqrt() / 4.0) * rz).abs() < 1e-9);
        assert!((th.inner_half_width * 2f64.sqrt() - th.inner).abs() < 1e-9);
        assert!(StrokeThresholds::<f64>::new(10, 0).is_err());
        assert!(StrokeThresholds::<f32>::new(3, 1).is_ok());
    }

    #[test]
    fn empty_region_is_background() {
        let idx = SpatialIndex::Points(build_point_index(&[WorldPoint::new(1e6, 1e6)]).unwrap());
        assert_eq!(classify_pixel_sibv(&WorldPoint::new(0.0, 0.0), 10, 1, &idx).unwrap(), ClassCode::BACKGROUND);
    }

    #[test]
    fn coincident_point_is_full() {
        let p = WorldPoint::new(1234.5, -987.0);
        let idx = SpatialIndex::Points(build_point_index(&[p]).unwrap());
        for width in 1..5 {
            assert_eq!(classify_pixel_sibv(&p, 12, width, &idx).unwrap(), ClassCode::FULL);
        }
    }

    #[test]
    fn point_at_stroke_radius() {
        // Object exactly R away along +x: the two sub-pixels on the near side
        // are within R, the two on the far side are not.
        let (z, n) = (10, 2);
        let th = StrokeThresholds::<f64>::new(z, n).unwrap();
        let p = WorldPoint::new(5000.0, 5000.0);
        let obj = p.offset(th.radius, 0.0);
        let idx = SpatialIndex::Points(build_point_index(&[obj]).unwrap());
        let expected = th.subpixel_centers(&p).iter().filter(|c| c.distance(&obj) <= th.radius).count();
        assert_eq!(expected, 2);
        assert_eq!(classify_pixel_sibv(&p, z, n, &idx).unwrap().value(), 2);

        // along the diagonal only the nearest sub-pixel is inside
        let d = th.radius / 2f64.sqrt();
        let obj = p.offset(d, d);
        let idx = SpatialIndex::Points(build_point_index(&[obj]).unwrap());
        let expected = th.subpixel_centers(&p).iter().filter(|c| c.distance(&obj) <= th.radius).count();
        assert_eq!(expected, 1);
        assert_eq!(classify_pixel_sibv(&p, z, n, &idx).unwrap().value(), 1);
    }

    #[test]
    fn segment_interior_is_found_by_inner_box() {
        let seg = SegmentGeom::new(WorldPoint::new(-1e5, 0.0), WorldPoint::new(1e5, 0.0));
        let tree = build_segment_index(&[seg]).unwrap();
        let th = StrokeThresholds::new(8, 1).unwrap();
        let mut stats = QueryStats::default();
        let code = classify_in_tree(&WorldPoint::new(0.0, th.inner_half_width * 0.5), &th, &tree, &mut stats);
        assert_eq!(code, ClassCode::FULL);
        assert_eq!(stats.nodes_visited, 1);
    }

    #[test]
    fn mbr_index_is_rejected() {
        use crate::index::{build_polygon_indexes, PolygonRings};
        let ring = vec![
            WorldPoint::new(0.0, 0.0),
            WorldPoint::new(1.0, 0.0),
            WorldPoint::new(1.0, 1.0),
            WorldPoint::new(0.0, 0.0),
        ];
        let (_, mbrs) = build_polygon_indexes(&[PolygonRings { id: 0, rings: vec![ring] }]).unwrap();
        assert!(classify_pixel_sibv(&WorldPoint::new(0.0, 0.0), 3, 1, &SpatialIndex::Mbrs(mbrs)).is_err());
    }
}
