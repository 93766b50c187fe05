//! Per-pixel classification, polygon filling, tile assembly and styling.

mod grid;
mod sibf;
mod sibv;
mod style;

pub use grid::{render_classgrid, render_classgrid_with_stats, ClassCode, ClassGrid, GRID_LEN};
pub use sibf::point_in_polygon_sibf;
pub use sibv::{classify_in_tree, classify_pixel_sibv, StrokeThresholds};
pub use style::{encode_png, style_tile, transparent_png, FillMode, Pattern, PatternLibrary, Rgba, RgbaImage, Style};
