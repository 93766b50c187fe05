//! Spherical Web Mercator and the XYZ tile pyramid (row 0 at the north edge).

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, Point};
use crate::scalar::Scalar;

pub const TILE_SIZE: u32 = 256;
pub const MAX_ZOOM: u32 = 22;
pub const EARTH_RADIUS: f64 = 6_378_137.0;
/// Half the width of the projected world, `π · EARTH_RADIUS`.
pub const WORLD_HALF_WIDTH: f64 = std::f64::consts::PI * EARTH_RADIUS;
pub const WORLD_WIDTH: f64 = 2.0 * WORLD_HALF_WIDTH;
pub const MAX_LATITUDE: f64 = 85.051_128_78;

/// Ground resolution in meters per pixel at zoom `z`.
pub fn resolution<T: Scalar>(z: u32) -> Result<T> {
    if z > MAX_ZOOM {
        return Err(Error::ZoomOutOfRange(z));
    }
    Ok(T::lit(WORLD_WIDTH) / T::lit(f64::from(TILE_SIZE) * f64::from(1u32 << z)))
}

/// The full projected world.
pub fn world_bounds<T: Scalar>() -> BBox<T> {
    let h = T::lit(WORLD_HALF_WIDTH);
    BBox { min_x: -h, min_y: -h, max_x: h, max_y: h }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileKey {
    pub z: u32,
    pub x: u32,
    pub y: u32,
}

impl TileKey {
    pub fn new(z: u32, x: u32, y: u32) -> Result<Self> {
        if z > MAX_ZOOM {
            return Err(Error::ZoomOutOfRange(z));
        }
        let n = 1u32 << z;
        if x >= n || y >= n {
            return Err(Error::InvalidTile { z, x, y });
        }
        Ok(TileKey { z, x, y })
    }

    /// Number of tiles along one axis at this zoom.
    pub fn tiles_per_axis(&self) -> u32 {
        1 << self.z
    }

    pub fn resolution(&self) -> f64 {
        resolution::<f64>(self.z).expect("validated zoom")
    }

    pub fn bounds(&self) -> crate::BoundingBox {
        tile_bounds(self)
    }

    pub fn children(&self) -> Option<[TileKey; 4]> {
        if self.z >= MAX_ZOOM {
            return None;
        }
        let (z, x, y) = (self.z + 1, self.x * 2, self.y * 2);
        Some([
            TileKey { z, x, y },
            TileKey { z, x: x + 1, y },
            TileKey { z, x, y: y + 1 },
            TileKey { z, x: x + 1, y: y + 1 },
        ])
    }

    pub fn parent(&self) -> Option<TileKey> {
        (self.z > 0).then(|| TileKey { z: self.z - 1, x: self.x / 2, y: self.y / 2 })
    }
}

impl std::fmt::Display for TileKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.z, self.x, self.y)
    }
}

/// A single pixel of a tile; `i` is the column, `j` the row (0 at the top).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PixelAddress {
    pub tile: TileKey,
    pub i: u32,
    pub j: u32,
}

impl PixelAddress {
    pub fn new(tile: TileKey, i: u32, j: u32) -> Result<Self> {
        if i >= TILE_SIZE || j >= TILE_SIZE {
            return Err(Error::InvalidPixel { i, j });
        }
        Ok(PixelAddress { tile, i, j })
    }

    /// Column and row in the global pixel space of the tile's zoom level.
    pub fn global(&self) -> (u64, u64) {
        (
            u64::from(self.tile.x) * u64::from(TILE_SIZE) + u64::from(self.i),
            u64::from(self.tile.y) * u64::from(TILE_SIZE) + u64::from(self.j),
        )
    }
}

pub fn tile_bounds(t: &TileKey) -> crate::BoundingBox {
    tile_bounds_in::<f64>(t)
}

/// Tile box in an arbitrary scalar type. Neighbouring tiles evaluate their
/// shared edge with the same expression, so they meet exactly.
pub fn tile_bounds_in<T: Scalar>(t: &TileKey) -> BBox<T> {
    let h = T::lit(WORLD_HALF_WIDTH);
    let span = T::lit(WORLD_WIDTH) / T::lit(f64::from(t.tiles_per_axis()));
    let edge = |k: u32| -h + T::lit(f64::from(k)) * span;
    BBox {
        min_x: edge(t.x),
        max_x: edge(t.x + 1),
        // rows count down from the north edge
        min_y: -edge(t.y + 1),
        max_y: -edge(t.y),
    }
}

/// World coordinate of a pixel's center.
pub fn pixel_center<T: Scalar>(p: &PixelAddress) -> Point<T> {
    let rz = resolution::<T>(p.tile.z).expect("validated zoom");
    let (gx, gy) = p.global();
    let h = T::lit(WORLD_HALF_WIDTH);
    let half = T::half();
    Point::new(-h + (T::lit(gx as f64) + half) * rz, h - (T::lit(gy as f64) + half) * rz)
}

/// Inverse of [`pixel_center`]: the pixel at zoom `z` whose square contains `p`.
pub fn pixel_containing(p: &crate::WorldPoint, z: u32) -> Result<PixelAddress> {
    let rz = resolution::<f64>(z)?;
    let world_px = u64::from(TILE_SIZE) << z;
    let gx = ((p.x + WORLD_HALF_WIDTH) / rz).floor();
    let gy = ((WORLD_HALF_WIDTH - p.y) / rz).floor();
    if !(gx >= 0.0 && gy >= 0.0 && (gx as u64) < world_px && (gy as u64) < world_px) {
        return Err(Error::ProjectionOutOfRange { lon: p.x, lat: p.y });
    }
    let (gx, gy) = (gx as u64, gy as u64);
    let ts = u64::from(TILE_SIZE);
    Ok(PixelAddress {
        tile: TileKey { z, x: (gx / ts) as u32, y: (gy / ts) as u32 },
        i: (gx % ts) as u32,
        j: (gy % ts) as u32,
    })
}

/// Spherical Mercator forward projection; latitude is clamped to the square world.
pub fn lonlat_to_mercator<T: Scalar>(lon: T, lat: T) -> Result<Point<T>> {
    if !lon.is_finite() || !lat.is_finite() || lon.abs() > T::lit(180.0) {
        return Err(Error::ProjectionOutOfRange {
            lon: lon.to_f64().unwrap_or(f64::NAN),
            lat: lat.to_f64().unwrap_or(f64::NAN),
        });
    }
    let max_lat = T::lit(MAX_LATITUDE);
    let lat = lat.max(-max_lat).min(max_lat);
    let r = T::lit(EARTH_RADIUS);
    let x = lon.to_radians() * r;
    // ln(tan(π/4 + φ/2)) written as asinh(tan φ), exact at the equator
    let y = lat.to_radians().tan().asinh() * r;
    Ok(Point::new(x, y))
}

pub fn mercator_to_lonlat<T: Scalar>(p: &Point<T>) -> Point<T> {
    let r = T::lit(EARTH_RADIUS);
    let lon = (p.x / r).to_degrees();
    let lat = (p.y / r).sinh().atan().to_degrees();
    Point::new(lon, lat)
}

/// Column and row ranges of the tiles at zoom `z` that touch `b`.
pub fn tile_range(b: &crate::BoundingBox, z: u32) -> Result<(RangeInclusive<u32>, RangeInclusive<u32>)> {
    let n = 1u32 << z.min(MAX_ZOOM);
    if z > MAX_ZOOM {
        return Err(Error::ZoomOutOfRange(z));
    }
    let span = WORLD_WIDTH / f64::from(n);
    let clamp = |v: f64| (v.floor().max(0.0) as u64).min(u64::from(n - 1)) as u32;
    let x0 = clamp((b.min_x + WORLD_HALF_WIDTH) / span);
    let x1 = clamp((b.max_x + WORLD_HALF_WIDTH) / span);
    let y0 = clamp((WORLD_HALF_WIDTH - b.max_y) / span);
    let y1 = clamp((WORLD_HALF_WIDTH - b.min_y) / span);
    Ok((x0..=x1, y0..=y1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn resolution_values() {
        assert_relative_eq!(resolution::<f64>(0).unwrap(), 156_543.033_928_041, max_relative = 1e-14);
        assert_relative_eq!(resolution::<f64>(1).unwrap(), 78_271.516_964_020_5, max_relative = 1e-14);
        assert!((resolution::<f64>(15).unwrap() - 4.777_314_267_16).abs() < 1e-9);
        assert!(matches!(resolution::<f64>(23), Err(Error::ZoomOutOfRange(23))));
    }

    #[test]
    fn resolution_in_f32() {
        assert_relative_eq!(resolution::<f32>(0).unwrap(), 156_543.03f32, max_relative = 1e-6);
    }

    #[test]
    fn root_tile_is_the_world() {
        let b = tile_bounds(&TileKey::new(0, 0, 0).unwrap());
        assert_eq!(b, world_bounds());
    }

    #[test]
    fn south_east_quadrant() {
        let b = tile_bounds(&TileKey::new(1, 1, 1).unwrap());
        assert_eq!(b.min_x, 0.0);
        assert_eq!(b.max_y, 0.0);
        assert_eq!(b.max_x, WORLD_HALF_WIDTH);
        assert_eq!(b.min_y, -WORLD_HALF_WIDTH);
    }

    #[test]
    fn children_nest_in_parent() {
        let parent = TileKey::new(1, 0, 0).unwrap();
        let union =
            parent.children().unwrap().iter().fold(crate::BoundingBox::empty(), |acc, c| acc.union(&c.bounds()));
        assert_eq!(union, parent.bounds());
    }

    #[test]
    fn invalid_tiles() {
        assert!(TileKey::new(2, 4, 0).is_err());
        assert!(TileKey::new(23, 0, 0).is_err());
        assert!(PixelAddress::new(TileKey::new(0, 0, 0).unwrap(), 256, 0).is_err());
    }

    #[test]
    fn pixel_center_left_of_and_above_world_center() {
        let p = PixelAddress::new(TileKey::new(0, 0, 0).unwrap(), 127, 127).unwrap();
        let c = pixel_center::<f64>(&p);
        assert_relative_eq!(c.x, -78_271.516_964_020_5, max_relative = 1e-12);
        assert_relative_eq!(c.y, 78_271.516_964_020_5, max_relative = 1e-12);
    }

    #[test]
    fn seamless_tile_adjacency() {
        let z = 7;
        let rz = resolution::<f64>(z).unwrap();
        let left = PixelAddress::new(TileKey::new(z, 10, 20).unwrap(), 255, 0).unwrap();
        let right = PixelAddress::new(TileKey::new(z, 11, 20).unwrap(), 0, 0).unwrap();
        let d = pixel_center::<f64>(&right).x - pixel_center::<f64>(&left).x;
        assert_relative_eq!(d, rz, max_relative = 1e-9);
    }

    #[test]
    fn projection_examples() {
        let o = lonlat_to_mercator(0.0f64, 0.0).unwrap();
        assert_eq!((o.x, o.y), (0.0, 0.0));
        let e = lonlat_to_mercator(180.0f64, 0.0).unwrap();
        assert_relative_eq!(e.x, std::f64::consts::PI * EARTH_RADIUS, max_relative = 1e-15);
        assert_relative_eq!(e.x, WORLD_HALF_WIDTH, max_relative = 1e-15);
        let n = lonlat_to_mercator(0.0f64, 85.051_128_78).unwrap();
        assert!((n.y - WORLD_HALF_WIDTH).abs() < 1e-3);
        // clamped beyond the limit
        let pole = lonlat_to_mercator(0.0f64, 90.0).unwrap();
        assert_eq!(pole.y, n.y);
        assert!(lonlat_to_mercator(f64::NAN, 0.0).is_err());
        assert!(lonlat_to_mercator(181.0f64, 0.0).is_err());
    }

    #[test]
    fn projection_round_trip() {
        let p = lonlat_to_mercator(116.39f64, 39.90).unwrap();
        let back = mercator_to_lonlat(&p);
        assert_relative_eq!(back.x, 116.39, max_relative = 1e-12);
        assert_relative_eq!(back.y, 39.90, max_relative = 1e-12);
    }

    #[test]
    fn tile_range_covers_box() {
        let t = TileKey::new(5, 7, 9).unwrap();
        let b = t.bounds().buffered(-1.0);
        let (xs, ys) = tile_range(&b, 5).unwrap();
        assert_eq!((xs, ys), (7..=7, 9..=9));
        let (xs, ys) = tile_range(&world_bounds(), 3).unwrap();
        assert_eq!((xs, ys), (0..=7, 0..=7));
    }
}
