use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use pixdrive_core::synth::rng;
use pixdrive_core::tile::{tile_range, MAX_ZOOM};
use pixdrive_core::{BoundingBox, TileKey};
use pixdrive_service::MAX_STROKE_WIDTH;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Request dispatch rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rate {
    PerSecond(f64),
    /// Every request is dispatched at once.
    Unlimited,
}

impl FromStr for Rate {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "unlimited" | "max" => Ok(Rate::Unlimited),
            _ => {
                let r: f64 = s.parse().with_context(|| format!("invalid rate `{s}`"))?;
                if !(r.is_finite() && r > 0.0) {
                    bail!("rate must be positive, got `{s}`");
                }
                Ok(Rate::PerSecond(r))
            }
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::PerSecond(r) => write!(f, "{r}"),
            Rate::Unlimited => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Workload {
    pub dataset: String,
    pub tiles: usize,
    pub zoom_min: u32,
    pub zoom_max: u32,
    pub seed: u64,
    pub rate: Rate,
    /// Stroke radius in pixels.
    pub width: u32,
}

impl Workload {
    pub fn new(dataset: &str, tiles: usize) -> Self {
        Workload {
            dataset: dataset.to_string(),
            tiles,
            zoom_min: 3,
            zoom_max: 15,
            seed: 1,
            rate: Rate::Unlimited,
            width: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.zoom_min > self.zoom_max || self.zoom_max > MAX_ZOOM {
            bail!("zoom range {}..={} must lie within 0..={MAX_ZOOM}", self.zoom_min, self.zoom_max);
        }
        if !(1..=MAX_STROKE_WIDTH).contains(&self.width) {
            bail!("width {} must lie within 1..={MAX_STROKE_WIDTH}", self.width);
        }
        Ok(())
    }

    /// The request sequence: each request draws a zoom uniformly from the
    /// range, then a tile uniformly from those touching `mbr` at that zoom.
    pub fn generate(&self, mbr: &BoundingBox) -> Result<Vec<TileKey>> {
        self.validate()?;
        if mbr.is_empty() {
            bail!("dataset `{}` has an empty extent", self.dataset);
        }
        let mut rng = rng(self.seed);
        (0..self.tiles)
            .map(|_| {
                let z = rng.gen_range(self.zoom_min..=self.zoom_max);
                let (xs, ys) = tile_range(mbr, z)?;
                Ok(TileKey::new(z, rng.gen_range(xs), rng.gen_range(ys))?)
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct TileRow {
    z: u32,
    x: u32,
    y: u32,
}

/// Writes a request sequence as `z,x,y` CSV.
pub fn write_tiles_csv<W: Write>(tiles: &[TileKey], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in tiles {
        w.serialize(TileRow { z: t.z, x: t.x, y: t.y })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tiles_csv<R: Read>(src: R) -> Result<Vec<TileKey>> {
    csv::Reader::from_reader(src)
        .deserialize::<TileRow>()
        .enumerate()
        .map(|(k, row)| {
            let row = row.with_context(|| format!("tile row {}", k + 1))?;
            TileKey::new(row.z, row.x, row.y).with_context(|| format!("tile row {}", k + 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn extent() -> BoundingBox {
        BoundingBox::new(1e6, 2e6, 1.5e6, 2.2e6)
    }

    #[test]
    fn rates_parse() {
        assert_eq!("inf".parse::<Rate>().unwrap(), Rate::Unlimited);
        assert_eq!("12.5".parse::<Rate>().unwrap(), Rate::PerSecond(12.5));
        assert!("0".parse::<Rate>().is_err());
        assert!("-3".parse::<Rate>().is_err());
        assert!("fast".parse::<Rate>().is_err());
    }

    #[test]
    fn sequence_is_seeded_and_inside_extent() {
        let mut w = Workload::new("d", 500);
        w.zoom_min = 4;
        w.zoom_max = 12;
        let a = w.generate(&extent()).unwrap();
        assert_eq!(a, w.generate(&extent()).unwrap());
        for t in &a {
            assert!((4..=12).contains(&t.z));
            assert!(t.bounds().intersects(&extent()), "{t:?}");
        }
        w.seed = 2;
        assert_ne!(a, w.generate(&extent()).unwrap());
    }

    #[test]
    fn every_zoom_in_range_is_drawn() {
        let mut w = Workload::new("d", 2000);
        w.zoom_min = 0;
        w.zoom_max = 9;
        let tiles = w.generate(&extent()).unwrap();
        for z in 0..=9 {
            assert!(tiles.iter().any(|t| t.z == z), "zoom {z} missing");
        }
    }

    #[test]
    fn bad_ranges_are_rejected() {
        let mut w = Workload::new("d", 1);
        w.zoom_max = 23;
        assert!(w.generate(&extent()).is_err());
        w.zoom_max = 2;
        w.zoom_min = 5;
        assert!(w.generate(&extent()).is_err());
        let w = Workload::new("d", 1);
        assert!(w.generate(&BoundingBox::empty()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let tiles = Workload::new("d", 50).generate(&extent()).unwrap();
        let mut buf = Vec::new();
        write_tiles_csv(&tiles, &mut buf).unwrap();
        assert!(buf.starts_with(b"z,x,y\n"));
        assert_eq!(read_tiles_csv(buf.as_slice()).unwrap(), tiles);
        assert!(read_tiles_csv("z,x,y\n3,9,0\n".as_bytes()).is_err());
    }
}
