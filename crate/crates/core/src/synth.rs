//! Seeded synthetic datasets in Web Mercator coordinates.

use std::f64::consts::TAU;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::GeometrySet;
use crate::tile::mercator_to_lonlat;
use crate::{BoundingBox, WorldPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    Points,
    Lines,
    Polygons,
}

impl FromStr for SynthKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "points" | "point" => Ok(SynthKind::Points),
            "lines" | "line" => Ok(SynthKind::Lines),
            "polygons" | "polygon" => Ok(SynthKind::Polygons),
            other => Err(format!("unknown kind `{other}` (expected points, lines or polygons)")),
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_in<R: Rng>(rng: &mut R, b: &BoundingBox) -> WorldPoint {
    WorldPoint::new(rng.gen_range(b.min_x..=b.max_x), rng.gen_range(b.min_y..=b.max_y))
}

pub fn uniform_points(n: usize, extent: &BoundingBox, seed: u64) -> Vec<WorldPoint> {
    let mut rng = rng(seed);
    (0..n).map(|_| uniform_in(&mut rng, extent)).collect()
}

/// Linestrings that wander with a slowly turning heading, clamped to `extent`.
pub fn random_walk_lines(
    n: usize,
    vertices: usize,
    step: f64,
    extent: &BoundingBox,
    seed: u64,
) -> Vec<Vec<WorldPoint>> {
    let mut rng = rng(seed);
    (0..n)
        .map(|_| {
            let mut p = uniform_in(&mut rng, extent);
            let mut heading = rng.gen_range(0.0..TAU);
            let mut line = vec![p];
            for _ in 1..vertices.max(2) {
                heading += rng.gen_range(-0.8..0.8);
                p = WorldPoint::new(
                    (p.x + step * heading.cos()).clamp(extent.min_x, extent.max_x),
                    (p.y + step * heading.sin()).clamp(extent.min_y, extent.max_y),
                );
                line.push(p);
            }
            line
        })
        .collect()
}

/// A closed ring around `c` with jittered, strictly increasing angles and
/// radii drawn from `[r_min, r_max]`. Any such ring is star-shaped about `c`
/// and therefore simple.
fn star_ring<R: Rng>(rng: &mut R, c: WorldPoint, r_min: f64, r_max: f64, k: usize, clockwise: bool) -> Vec<WorldPoint> {
    let spacing = TAU / k as f64;
    let phase = rng.gen_range(0.0..TAU);
    let mut ring: Vec<WorldPoint> = (0..k)
        .map(|i| {
            let a = phase + spacing * (i as f64 + rng.gen_range(-0.4..0.4));
            let r = if r_min < r_max { rng.gen_range(r_min..=r_max) } else { r_max };
            WorldPoint::new(c.x + r * a.cos(), c.y + r * a.sin())
        })
        .collect();
    if clockwise {
        ring.reverse();
    }
    ring.push(ring[0]);
    ring
}

/// Random convex and star-shaped polygons; a `hole_ratio` share of them
/// carries one hole.
pub fn random_polygons(
    n: usize,
    max_radius: f64,
    hole_ratio: f64,
    extent: &BoundingBox,
    seed: u64,
) -> Vec<Vec<Vec<WorldPoint>>> {
    let mut rng = rng(seed);
    (0..n)
        .map(|_| {
            let c = uniform_in(&mut rng, extent);
            let r = rng.gen_range(0.2 * max_radius..=max_radius);
            let k = rng.gen_range(6..=24);
            let convex = rng.gen_bool(0.5);
            let outer = star_ring(&mut rng, c, if convex { r } else { 0.5 * r }, r, k, false);
            let mut rings = vec![outer];
            if rng.gen_bool(hole_ratio.clamp(0.0, 1.0)) {
                let hk = rng.gen_range(6..=12);
                rings.push(star_ring(&mut rng, c, 0.1 * r, 0.25 * r, hk, true));
            }
            rings
        })
        .collect()
}

/// `n` objects of `kind` spread over `extent`, with object sizes scaled to
/// the extent and the count.
pub fn generate(kind: SynthKind, n: usize, extent: &BoundingBox, seed: u64) -> GeometrySet {
    let scale = (extent.width().min(extent.height()) / (n.max(1) as f64).sqrt()).max(f64::MIN_POSITIVE);
    match kind {
        SynthKind::Points => GeometrySet::Points(uniform_points(n, extent, seed)),
        SynthKind::Lines => GeometrySet::Lines(random_walk_lines(n, 8, scale * 0.25, extent, seed)),
        SynthKind::Polygons => GeometrySet::Polygons(random_polygons(n, scale * 0.5, 0.2, extent, seed)),
    }
}

fn write_coords<W: Write>(out: &mut W, pts: &[WorldPoint]) -> io::Result<()> {
    for (k, p) in pts.iter().enumerate() {
        let ll = mercator_to_lonlat(p);
        if k > 0 {
            out.write_all(b",")?;
        }
        write!(out, "{} {}", ll.x, ll.y)?;
    }
    Ok(())
}

/// Writes `set` as WKT lines in lon/lat degrees.
pub fn write_wkt<W: Write>(set: &GeometrySet, out: &mut W) -> io::Result<()> {
    match set {
        GeometrySet::Points(pts) => {
            for p in pts {
                out.write_all(b"POINT(")?;
                write_coords(out, std::slice::from_ref(p))?;
                out.write_all(b")\n")?;
            }
        }
        GeometrySet::Lines(lines) => {
            for l in lines {
                out.write_all(b"LINESTRING(")?;
                write_coords(out, l)?;
                out.write_all(b")\n")?;
            }
        }
        GeometrySet::Polygons(polys) => {
            for rings in polys {
                out.write_all(b"POLYGON(")?;
                for (k, r) in rings.iter().enumerate() {
                    out.write_all(if k == 0 { b"(" } else { b",(" })?;
                    write_coords(out, r)?;
                    out.write_all(b")")?;
                }
                out.write_all(b")\n")?;
            }
        }
    }
    Ok(())
}
