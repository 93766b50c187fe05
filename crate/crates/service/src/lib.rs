//! Tile service: an HTTP endpoint in front of a FIFO render queue, a pool
//! of render workers and a keyed, expiring cache of class grids.
//!
//! Requests outside a dataset's extent are answered with a transparent tile
//! without queuing anything. Identical concurrent requests share one render.
//! Grids are cached independently of style, so restyling a tile never
//! triggers a new render.

pub mod cache;
pub mod config;
pub mod error;
pub mod http;
pub mod metrics;
pub mod pool;
pub mod service;

pub use cache::{ResultPool, TaskKey};
pub use config::ServiceConfig;
pub use error::{ConfigError, ServiceError};
pub use http::{router, serve};
pub use metrics::{LatencySummary, Metrics, MetricsSnapshot};
pub use pool::{FaultHook, RenderOutcome, Submission, WorkerPool};
pub use service::{GridSource, TileRequest, TileService, MAX_STROKE_WIDTH};
