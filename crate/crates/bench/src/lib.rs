//! Benchmarks for the tile service.
//!
//! A [`Workload`] is a seeded sequence of tile requests over a dataset's
//! extent, replayed at a fixed rate or all at once. The runners drive an
//! in-process [`TileService`](pixdrive_service::TileService) with caching
//! disabled, so every request is a real render.

pub mod complexity;
pub mod equivalence;
pub mod report;
pub mod run;
pub mod scale;
pub mod source;
pub mod workload;

pub use complexity::{run_complexity, ComplexityRow, ComplexitySettings};
pub use equivalence::{fill_equivalence, oracle_equivalence, EquivalenceSummary, FillSummary};
pub use report::{write_csv, write_json};
pub use run::{bench_service, run_workload, BenchReport};
pub use scale::{run_scaling, ScalingCell, ScalingReport};
pub use source::DataSource;
pub use workload::{read_tiles_csv, write_tiles_csv, Rate, Workload};
