//! Planar primitives and the predicates the index and renderer are built on.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point<T = f64> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn distance_sq(&self, other: &Point<T>) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn distance(&self, other: &Point<T>) -> T {
        self.distance_sq(other).sqrt()
    }

    #[inline]
    pub fn offset(&self, dx: T, dy: T) -> Self {
        Point::new(self.x + dx, self.y + dy)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment<T = f64> {
    pub a: Point<T>,
    pub b: Point<T>,
}

impl<T: Scalar> Segment<T> {
    #[inline]
    pub fn new(a: Point<T>, b: Point<T>) -> Self {
        Segment { a, b }
    }

    #[inline]
    pub fn bbox(&self) -> BBox<T> {
        BBox {
            min_x: self.a.x.min(self.b.x),
            min_y: self.a.y.min(self.b.y),
            max_x: self.a.x.max(self.b.x),
            max_y: self.a.y.max(self.b.y),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    pub fn reversed(&self) -> Self {
        Segment::new(self.b, self.a)
    }

    #[inline]
    pub fn distance_to(&self, p: &Point<T>) -> T {
        dist_point_segment(p, self)
    }

    /// Exact segment/box intersection on closed sets.
    ///
    /// Envelopes must overlap and the box corners must not all lie strictly
    /// on one side of the supporting line.
    pub fn intersects_box(&self, b: &BBox<T>) -> bool {
        if !self.bbox().intersects(b) {
            return false;
        }
        if b.contains_point(&self.a) || b.contains_point(&self.b) {
            return true;
        }
        let dx = self.b.x - self.a.x;
        let dy = self.b.y - self.a.y;
        let side = |x: T, y: T| dx * (y - self.a.y) - dy * (x - self.a.x);
        let s = [side(b.min_x, b.min_y), side(b.max_x, b.min_y), side(b.max_x, b.max_y), side(b.min_x, b.max_y)];
        let zero = T::zero();
        !(s.iter().all(|&v| v > zero) || s.iter().all(|&v| v < zero))
    }
}

/// Euclidean distance from `p` to the closed segment `s`.
///
/// Projections that fall outside the segment are clamped to the nearer
/// endpoint, and the endpoint distance is then computed directly so that two
/// segments sharing a vertex report bit-identical distances there.
#[inline]
pub fn dist_point_segment<T: Scalar>(p: &Point<T>, s: &Segment<T>) -> T {
    let dx = s.b.x - s.a.x;
    let dy = s.b.y - s.a.y;
    let len_sq = dx * dx + dy * dy;
    if len_sq == T::zero() {
        return p.distance(&s.a);
    }
    let t = ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len_sq;
    if t <= T::zero() {
        p.distance(&s.a)
    } else if t >= T::one() {
        p.distance(&s.b)
    } else {
        let foot = Point::new(s.a.x + t * dx, s.a.y + t * dy);
        p.distance(&foot)
    }
}

/// Axis-aligned bounding box; the MBR of whatever it was built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox<T = f64> {
    pub min_x: T,
    pub min_y: T,
    pub max_x: T,
    pub max_y: T,
}

impl<T: Scalar> BBox<T> {
    pub fn new(min_x: T, min_y: T, max_x: T, max_y: T) -> Self {
        BBox { min_x: min_x.min(max_x), min_y: min_y.min(max_y), max_x: min_x.max(max_x), max_y: min_y.max(max_y) }
    }

    /// The identity for [`BBox::union`]; contains nothing.
    pub fn empty() -> Self {
        BBox { min_x: T::infinity(), min_y: T::infinity(), max_x: T::neg_infinity(), max_y: T::neg_infinity() }
    }

    pub fn from_point(p: Point<T>) -> Self {
        BBox { min_x: p.x, min_y: p.y, max_x: p.x, max_y: p.y }
    }

    /// Square box of half-width `r` centered on `p`.
    #[inline]
    pub fn around(p: Point<T>, r: T) -> Self {
        BBox { min_x: p.x - r, min_y: p.y - r, max_x: p.x + r, max_y: p.y + r }
    }

    pub fn from_points<I: IntoIterator<Item = Point<T>>>(points: I) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.expand_point(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min_x > self.max_x || self.min_y > self.max_y
    }

    #[inline]
    pub fn expand_point(&mut self, p: Point<T>) {
        self.min_x = self.min_x.min(p.x);
        self.min_y = self.min_y.min(p.y);
        self.max_x = self.max_x.max(p.x);
        self.max_y = self.max_y.max(p.y);
    }

    #[inline]
    pub fn expand_box(&mut self, o: &BBox<T>) {
        self.min_x = self.min_x.min(o.min_x);
        self.min_y = self.min_y.min(o.min_y);
        self.max_x = self.max_x.max(o.max_x);
        self.max_y = self.max_y.max(o.max_y);
    }

    pub fn union(mut self, o: &BBox<T>) -> Self {
        self.expand_box(o);
        self
    }

    /// Grows every side by `d`.
    pub fn buffered(&self, d: T) -> Self {
        BBox { min_x: self.min_x - d, min_y: self.min_y - d, max_x: self.max_x + d, max_y: self.max_y + d }
    }

    pub fn width(&self) -> T {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> T {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> T {
        if self.is_empty() {
            T::zero()
        } else {
            self.width() * self.height()
        }
    }

    pub fn center(&self) -> Point<T> {
        Point::new((self.min_x + self.max_x) * T::half(), (self.min_y + self.max_y) * T::half())
    }

    /// Closed-set overlap: boxes that only touch along an edge intersect.
    #[inline]
    pub fn intersects(&self, o: &BBox<T>) -> bool {
        self.min_x <= o.max_x && o.min_x <= self.max_x && self.min_y <= o.max_y && o.min_y <= self.max_y
    }

    #[inline]
    pub fn contains_point(&self, p: &Point<T>) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn contains_box(&self, o: &BBox<T>) -> bool {
        o.min_x >= self.min_x && o.max_x <= self.max_x && o.min_y >= self.min_y && o.max_y <= self.max_y
    }

    pub fn intersection(&self, o: &BBox<T>) -> Option<BBox<T>> {
        let b = BBox {
            min_x: self.min_x.max(o.min_x),
            min_y: self.min_y.max(o.min_y),
            max_x: self.max_x.min(o.max_x),
            max_y: self.max_y.min(o.max_y),
        };
        (!b.is_empty()).then_some(b)
    }

    /// Squared distance from `p` to the nearest point of the box (0 inside).
    #[inline]
    pub fn distance_sq_to(&self, p: &Point<T>) -> T {
        let zero = T::zero();
        let dx = (self.min_x - p.x).max(p.x - self.max_x).max(zero);
        let dy = (self.min_y - p.y).max(p.y - self.max_y).max(zero);
        dx * dx + dy * dy
    }
}

impl<T: Scalar> Default for BBox<T> {
    fn default() -> Self {
        Self::empty()
    }
}

/// Twice the signed area of a closed ring (positive when counter-clockwise).
pub fn ring_signed_area2<T: Scalar>(ring: &[Point<T>]) -> T {
    ring.windows(2).fold(T::zero(), |acc, w| acc + (w[0].x * w[1].y - w[1].x * w[0].y))
}

/// Whether two closed segments share at least one point.
pub fn segments_intersect<T: Scalar>(s: &Segment<T>, t: &Segment<T>) -> bool {
    fn orient<T: Scalar>(a: &Point<T>, b: &Point<T>, c: &Point<T>) -> T {
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    }
    fn sign<T: Scalar>(v: T) -> i8 {
        if v > T::zero() {
            1
        } else if v < T::zero() {
            -1
        } else {
            0
        }
    }
    if !s.bbox().intersects(&t.bbox()) {
        return false;
    }
    let d1 = sign(orient(&s.a, &s.b, &t.a));
    let d2 = sign(orient(&s.a, &s.b, &t.b));
    let d3 = sign(orient(&t.a, &t.b, &s.a));
    let d4 = sign(orient(&t.a, &t.b, &s.b));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    // collinear or touching cases; envelopes already overlap
    (d1 == 0 && s.bbox().contains_point(&t.a))
        || (d2 == 0 && s.bbox().contains_point(&t.b))
        || (d3 == 0 && t.bbox().contains_point(&s.a))
        || (d4 == 0 && t.bbox().contains_point(&s.b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type P = Point<f64>;

    #[test]
    fn point_on_segment_has_zero_distance() {
        let s = Segment::new(P::new(-1.0, 0.0), P::new(1.0, 0.0));
        assert_eq!(dist_point_segment(&P::new(0.25, 0.0), &s), 0.0);
        assert_eq!(dist_point_segment(&P::new(1.0, 0.0), &s), 0.0);
    }

    #[test]
    fn perpendicular_foot_inside_segment() {
        let s = Segment::new(P::new(-1.0, 0.0), P::new(1.0, 0.0));
        assert_eq!(dist_point_segment(&P::new(0.0, 1.0), &s), 1.0);
    }

    #[test]
    fn clamps_to_endpoint() {
        let s = Segment::new(P::new(-1.0, 0.0), P::new(1.0, 0.0));
        assert_eq!(dist_point_segment(&P::new(2.0, 1.0), &s), 2f64.sqrt());
    }

    #[test]
    fn degenerate_segment_is_a_point() {
        let s = Segment::new(P::new(3.0, 4.0), P::new(3.0, 4.0));
        assert_eq!(dist_point_segment(&P::new(0.0, 0.0), &s), 5.0);
    }

    #[test]
    fn works_in_single_precision() {
        let s = Segment::new(Point::<f32>::new(-1.0, 0.0), Point::new(1.0, 0.0));
        assert_eq!(dist_point_segment(&Point::new(0.0f32, 2.0), &s), 2.0f32);
    }

    #[test]
    fn segment_box_intersection() {
        let b = BBox::new(0.0, 0.0, 1.0, 1.0);
        // passes through the interior without touching a corner region
        assert!(Segment::new(P::new(-1.0, 0.5), P::new(2.0, 0.5)).intersects_box(&b));
        // envelope overlaps, segment misses the box corner
        assert!(!Segment::new(P::new(0.5, 2.5), P::new(2.5, 0.5)).intersects_box(&b));
        // touching a corner counts
        assert!(Segment::new(P::new(0.0, 2.0), P::new(2.0, 0.0)).intersects_box(&b));
        // degenerate box: a horizontal query segment
        let h = BBox::new(0.0, 0.5, 2.0, 0.5);
        assert!(Segment::new(P::new(1.0, 0.0), P::new(1.0, 1.0)).intersects_box(&h));
        assert!(!Segment::new(P::new(3.0, 0.0), P::new(3.0, 1.0)).intersects_box(&h));
    }

    #[test]
    fn crossing_segments() {
        let s = Segment::new(P::new(0.0, 0.0), P::new(2.0, 2.0));
        assert!(segments_intersect(&s, &Segment::new(P::new(0.0, 2.0), P::new(2.0, 0.0))));
        assert!(segments_intersect(&s, &Segment::new(P::new(2.0, 2.0), P::new(3.0, 0.0))));
        assert!(!segments_intersect(&s, &Segment::new(P::new(1.0, 0.0), P::new(3.0, 0.0))));
    }

    #[test]
    fn box_distance() {
        let b = BBox::new(0.0, 0.0, 1.0, 1.0);
        assert_eq!(b.distance_sq_to(&P::new(0.5, 0.5)), 0.0);
        assert_eq!(b.distance_sq_to(&P::new(4.0, 5.0)), 9.0 + 16.0);
    }

    fn coord() -> impl Strategy<Value = f64> {
        -1.0e6..1.0e6f64
    }

    proptest! {
        #[test]
        fn distance_symmetric_under_endpoint_swap(
            px in coord(), py in coord(), ax in coord(), ay in coord(), bx in coord(), by in coord()
        ) {
            let p = P::new(px, py);
            let s = Segment::new(P::new(ax, ay), P::new(bx, by));
            let d1 = dist_point_segment(&p, &s);
            let d2 = dist_point_segment(&p, &s.reversed());
            prop_assert!((d1 - d2).abs() <= 1e-9 * (1.0 + d1));
        }

        #[test]
        fn distance_bounded_by_endpoints(
            px in coord(), py in coord(), ax in coord(), ay in coord(), bx in coord(), by in coord()
        ) {
            let p = P::new(px, py);
            let s = Segment::new(P::new(ax, ay), P::new(bx, by));
            let d = dist_point_segment(&p, &s);
            let bound = p.distance(&s.a).min(p.distance(&s.b));
            prop_assert!(d <= bound * (1.0 + 1e-12) + 1e-9);
            prop_assert!(d >= 0.0);
        }

        #[test]
        fn segment_box_test_agrees_with_sampling(
            ax in -2.0..3.0f64, ay in -2.0..3.0f64, bx in -2.0..3.0f64, by in -2.0..3.0f64
        ) {
            let b = BBox::new(0.0, 0.0, 1.0, 1.0);
            let s = Segment::new(P::new(ax, ay), P::new(bx, by));
            // dense sampling can only find hits, never refute them
            let sampled_hit = (0..=2000).any(|k| {
                let t = k as f64 / 2000.0;
                b.contains_point(&P::new(ax + t * (bx - ax), ay + t * (by - ay)))
            });
            if sampled_hit {
                prop_assert!(s.intersects_box(&b));
            }
            if s.intersects_box(&b) {
                // a hit means the segment comes within the box's reach
                let d = dist_point_segment(&b.center(), &s);
                prop_assert!(d <= 0.5f64.hypot(0.5) + 1e-12);
            }
        }
    }
}
