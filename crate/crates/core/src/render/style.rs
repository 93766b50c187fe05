//! Turning a [`ClassGrid`] into pixels.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::{ClassCode, ClassGrid};
use crate::error::{Error, Result};
use crate::tile::{TileKey, TILE_SIZE};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rgba(pub [u8; 4]);

impl Rgba {
    pub const TRANSPARENT: Rgba = Rgba([0, 0, 0, 0]);
    pub const BLACK: Rgba = Rgba([0, 0, 0, 255]);

    pub fn new(r: u8, g: u8, b: u8, a: u8) -> Self {
        Rgba([r, g, b, a])
    }

    pub fn alpha(&self) -> u8 {
        self.0[3]
    }

    pub fn with_alpha(mut self, a: u8) -> Self {
        self.0[3] = a;
        self
    }

    /// Non-premultiplied source-over compositing.
    pub fn over(self, dst: Rgba) -> Rgba {
        let sa = f64::from(self.0[3]) / 255.0;
        let da = f64::from(dst.0[3]) / 255.0;
        let oa = sa + da * (1.0 - sa);
        if oa <= 0.0 {
            return Rgba::TRANSPARENT;
        }
        let mut out = [0u8; 4];
        for ((o, &s), &d) in out.iter_mut().zip(&self.0).zip(&dst.0).take(3) {
            let v = (f64::from(s) * sa + f64::from(d) * da * (1.0 - sa)) / oa;
            *o = v.round().clamp(0.0, 255.0) as u8;
        }
        out[3] = (oa * 255.0).round() as u8;
        Rgba(out)
    }
}

impl FromStr for Rgba {
    type Err = String;

    /// `RRGGBBAA` or `RRGGBB` hex, with an optional leading `#`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let hex = s.strip_prefix('#').unwrap_or(s);
        if !(hex.len() == 6 || hex.len() == 8) || !hex.is_ascii() {
            return Err(format!("bad color `{s}`"));
        }
        let mut out = [255u8; 4];
        for (k, chunk) in hex.as_bytes().chunks(2).enumerate() {
            let pair = std::str::from_utf8(chunk).map_err(|_| format!("bad color `{s}`"))?;
            out[k] = u8::from_str_radix(pair, 16).map_err(|_| format!("bad color `{s}`"))?;
        }
        Ok(Rgba(out))
    }
}

impl fmt::Display for Rgba {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b, a] = self.0;
        write!(f, "{r:02X}{g:02X}{b:02X}{a:02X}")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FillMode {
    #[default]
    None,
    Mono,
    Pattern(String),
}

impl FromStr for FillMode {
    type Err = String;

    /// `none`, `mono` or `pattern:<id>`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(FillMode::None),
            "mono" => Ok(FillMode::Mono),
            _ => match s.strip_prefix("pattern:") {
                Some(id) if !id.is_empty() => Ok(FillMode::Pattern(id.to_string())),
                _ => Err(format!("bad fill mode `{s}`")),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Style {
    /// Stroke radius `N` in pixels.
    pub stroke_width: u32,
    pub stroke_color: Rgba,
    pub fill: FillMode,
    pub fill_color: Rgba,
    pub background: Rgba,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            stroke_width: 1,
            stroke_color: Rgba::BLACK,
            fill: FillMode::None,
            fill_color: Rgba::new(0x33, 0x88, 0xff, 0x80),
            background: Rgba::TRANSPARENT,
        }
    }
}

/// A small RGBA texture tiled over the global pixel plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgba>,
}

impl Pattern {
    pub fn new(width: u32, height: u32, pixels: Vec<Rgba>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != (width * height) as usize {
            return Err(Error::Png("pattern dimensions do not match its pixels".into()));
        }
        Ok(Pattern { width, height, pixels })
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self> {
        let mut decoder = png::Decoder::new(bytes);
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder.read_info().map_err(|e| Error::Png(e.to_string()))?;
        let mut buf = vec![0; reader.output_buffer_size()];
        let info = reader.next_frame(&mut buf).map_err(|e| Error::Png(e.to_string()))?;
        let data = &buf[..info.buffer_size()];
        let pixels: Vec<Rgba> = match info.color_type {
            png::ColorType::Rgba => data.chunks(4).map(|c| Rgba([c[0], c[1], c[2], c[3]])).collect(),
            png::ColorType::Rgb => data.chunks(3).map(|c| Rgba([c[0], c[1], c[2], 255])).collect(),
            png::ColorType::GrayscaleAlpha => data.chunks(2).map(|c| Rgba([c[0], c[0], c[0], c[1]])).collect(),
            png::ColorType::Grayscale => data.iter().map(|&v| Rgba([v, v, v, 255])).collect(),
            png::ColorType::Indexed => return Err(Error::Png("unexpanded palette".into())),
        };
        Pattern::new(info.width, info.height, pixels)
    }

    /// Texel under global pixel `(gx, gy)`.
    #[inline]
    pub fn sample(&self, gx: u64, gy: u64) -> Rgba {
        let x = (gx % u64::from(self.width)) as usize;
        let y = (gy % u64::from(self.height)) as usize;
        self.pixels[y * self.width as usize + x]
    }
}

/// Fill patterns addressed by name.
#[derive(Clone, Debug, Default)]
pub struct PatternLibrary {
    patterns: HashMap<String, Pattern>,
}

impl PatternLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads every `*.png` in `dir`, named by file stem.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut lib = Self::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()).map(|e| e.eq_ignore_ascii_case("png")) != Some(true) {
                continue;
            }
            let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
            let pattern = Pattern::decode_png(&std::fs::read(&path)?)?;
            lib.insert(stem, pattern);
        }
        Ok(lib)
    }

    pub fn insert(&mut self, name: &str, pattern: Pattern) {
        self.patterns.insert(name.to_string(), pattern);
    }

    pub fn get(&self, name: &str) -> Option<&Pattern> {
        self.patterns.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.patterns.keys().map(String::as_str)
    }
}

/// 256×256 RGBA8, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RgbaImage {
    data: Vec<u8>,
}

impl std::fmt::Debug for RgbaImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RgbaImage").finish_non_exhaustive()
    }
}

impl RgbaImage {
    pub fn transparent() -> Self {
        RgbaImage { data: vec![0; (TILE_SIZE * TILE_SIZE * 4) as usize] }
    }

    pub fn pixel(&self, i: u32, j: u32) -> Rgba {
        let k = ((j * TILE_SIZE + i) * 4) as usize;
        Rgba(self.data[k..k + 4].try_into().unwrap())
    }

    fn put(&mut self, i: u32, j: u32, c: Rgba) {
        let k = ((j * TILE_SIZE + i) * 4) as usize;
        self.data[k..k + 4].copy_from_slice(&c.0);
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }
}

pub fn style_tile(grid: &ClassGrid, style: &Style, tile: &TileKey, patterns: &PatternLibrary) -> Result<RgbaImage> {
    let pattern = match &style.fill {
        FillMode::Pattern(id) => Some(patterns.get(id).ok_or_else(|| Error::UnknownPattern(id.clone()))?),
        _ => None,
    };
    let mut img = RgbaImage::transparent();
    let (ox, oy) = (u64::from(tile.x) * u64::from(TILE_SIZE), u64::from(tile.y) * u64::from(TILE_SIZE));
    for j in 0..TILE_SIZE {
        for i in 0..TILE_SIZE {
            let code = grid.code(i, j);
            let base = if code == ClassCode::BACKGROUND && grid.is_filled(i, j) {
                match (&style.fill, pattern) {
                    (FillMode::Mono, _) => style.fill_color.over(style.background),
                    (FillMode::Pattern(_), Some(p)) => {
                        p.sample(ox + u64::from(i), oy + u64::from(j)).over(style.background)
                    }
                    _ => style.background,
                }
            } else {
                style.background
            };
            let out = if code == ClassCode::BACKGROUND {
                base
            } else {
                let a = (f64::from(style.stroke_color.alpha()) * f64::from(code.value()) / 4.0).round() as u8;
                style.stroke_color.with_alpha(a).over(base)
            };
            img.put(i, j, out);
        }
    }
    Ok(img)
}

/// Lossless, non-interlaced RGBA8 PNG.
pub fn encode_png(img: &RgbaImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, TILE_SIZE, TILE_SIZE);
        enc.set_color(png::ColorType::Rgba);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(|e| Error::Png(e.to_string()))?;
        writer.write_image_data(img.as_bytes()).map_err(|e| Error::Png(e.to_string()))?;
    }
    Ok(out)
}

pub fn transparent_png() -> Vec<u8> {
    encode_png(&RgbaImage::transparent()).expect("encoding an in-memory image cannot fail")
}
