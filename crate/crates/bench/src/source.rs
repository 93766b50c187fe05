use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{Context, Result};
use pixdrive_core::ingest::{parse_dataset, ParseOptions};
use pixdrive_core::synth::{generate, SynthKind};
use pixdrive_core::tile::world_bounds;
use pixdrive_core::{BoundingBox, GeometrySet, InputFormat};

/// Where benchmark geometry comes from.
#[derive(Clone, Debug)]
pub enum DataSource {
    File { path: PathBuf, format: InputFormat, csv_header: bool },
    Synthetic { kind: SynthKind, count: usize, seed: u64, extent: BoundingBox },
}

impl DataSource {
    /// `count` seeded objects spread over the whole Web Mercator square.
    pub fn synthetic(kind: SynthKind, count: usize, seed: u64) -> Self {
        DataSource::Synthetic { kind, count, seed, extent: world_bounds() }
    }

    pub fn load(&self) -> Result<GeometrySet> {
        match self {
            DataSource::File { path, format, csv_header } => {
                let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                let features = parse_dataset(BufReader::new(f), *format, ParseOptions { csv_header: *csv_header })
                    .with_context(|| format!("parsing {}", path.display()))?;
                Ok(GeometrySet::from_features(&features)?)
            }
            DataSource::Synthetic { kind, count, seed, extent } => Ok(generate(*kind, *count, extent, *seed)),
        }
    }
}
