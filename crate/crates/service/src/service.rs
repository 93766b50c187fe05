use std::collections::HashMap;
use std::sync::Arc;

use pixdrive_core::ingest::{parse_dataset, InputFormat, ParseOptions};
use pixdrive_core::render::{encode_png, style_tile, transparent_png};
use pixdrive_core::{Catalog, ClassGrid, DatasetHandle, FillMode, PatternLibrary, Rgba, Style, TileKey};

use crate::cache::{ResultPool, TaskKey};
use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::metrics::{Metrics, MetricsSnapshot};
use crate::pool::{FaultHook, Submission, WorkerPool};

/// Widest stroke accepted from a request, in pixels.
pub const MAX_STROKE_WIDTH: u32 = 64;

/// A parsed tile request.
#[derive(Clone, Debug, PartialEq)]
pub struct TileRequest {
    pub dataset: String,
    pub tile: TileKey,
    pub style: Style,
}

impl TileRequest {
    /// Builds a request from path segments and query parameters
    /// (`width`, `stroke`, `fill`, `fillcolor`, `background`).
    pub fn parse(
        dataset: &str,
        z: &str,
        x: &str,
        y: &str,
        query: &HashMap<String, String>,
    ) -> Result<Self, ServiceError> {
        let bad = |what: &str, v: &str| ServiceError::BadRequest(format!("invalid {what} `{v}`"));
        let num = |what: &str, v: &str| v.parse::<u32>().map_err(|_| bad(what, v));
        let tile = TileKey::new(num("z", z)?, num("x", x)?, num("y", y)?)?;
        let mut style = Style::default();
        for (k, v) in query {
            match k.as_str() {
                "width" => {
                    style.stroke_width = num("width", v)?;
                    if !(1..=MAX_STROKE_WIDTH).contains(&style.stroke_width) {
                        return Err(bad("width", v));
                    }
                }
                "stroke" => style.stroke_color = v.parse::<Rgba>().map_err(|_| bad("stroke", v))?,
                "fill" => style.fill = v.parse::<FillMode>().map_err(|_| bad("fill", v))?,
                "fillcolor" => style.fill_color = v.parse::<Rgba>().map_err(|_| bad("fillcolor", v))?,
                "background" => style.background = v.parse::<Rgba>().map_err(|_| bad("background", v))?,
                _ => return Err(ServiceError::BadRequest(format!("unknown parameter `{k}`"))),
            }
        }
        Ok(TileRequest { dataset: dataset.to_string(), tile, style })
    }
}

/// How a tile grid was obtained.
#[derive(Clone, Debug)]
pub enum GridSource {
    /// The tile lies outside the dataset; nothing was rendered or queued.
    Skipped,
    Cached(Arc<ClassGrid>),
    Rendered(Arc<ClassGrid>),
}

impl GridSource {
    pub fn grid(&self) -> Option<&Arc<ClassGrid>> {
        match self {
            GridSource::Skipped => None,
            GridSource::Cached(g) | GridSource::Rendered(g) => Some(g),
        }
    }
}

/// The tile service: catalog, pattern library, result pool and workers.
pub struct TileService {
    config: ServiceConfig,
    catalog: Arc<Catalog>,
    patterns: PatternLibrary,
    results: Arc<ResultPool>,
    pool: WorkerPool,
    metrics: Arc<Metrics>,
}

impl TileService {
    pub fn new(config: ServiceConfig, catalog: Arc<Catalog>) -> Result<Self, ServiceError> {
        config.validate().map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        let patterns = match &config.pattern_dir {
            Some(dir) => PatternLibrary::load_dir(dir)?,
            None => PatternLibrary::new(),
        };
        let metrics = Arc::new(Metrics::default());
        let results = Arc::new(ResultPool::new(config.result_capacity, config.result_ttl));
        let pool = WorkerPool::start(
            config.workers,
            config.threads_per_worker,
            config.queue_capacity,
            config.cache_enabled.then(|| Arc::clone(&results)),
            Arc::clone(&metrics),
        );
        Ok(TileService { config, catalog, patterns, results, pool, metrics })
    }

    /// A service over a catalog opened from `config.data_dir`, or an empty
    /// in-memory one.
    pub fn from_config(config: ServiceConfig) -> Result<Self, ServiceError> {
        let catalog = match &config.data_dir {
            Some(dir) => Catalog::open(dir)?,
            None => Catalog::in_memory(),
        };
        Self::new(config, Arc::new(catalog))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn set_fault_hook(&self, hook: Option<FaultHook>) {
        self.pool.set_fault_hook(hook);
    }

    /// The style-independent grid for a tile, rendering it if needed.
    pub async fn grid(&self, dataset: &str, tile: &TileKey, width: u32) -> Result<GridSource, ServiceError> {
        let ds = self.catalog.get(dataset).ok_or_else(|| ServiceError::UnknownDataset(dataset.to_string()))?;
        if width == 0 || width > MAX_STROKE_WIDTH {
            return Err(ServiceError::BadRequest(format!("invalid width {width}")));
        }
        let reach = f64::from(width) * tile.resolution();
        if !tile.bounds().intersects(&ds.mbr().buffered(reach)) {
            Metrics::incr(&self.metrics.tiles_skipped);
            return Ok(GridSource::Skipped);
        }
        let key = TaskKey { dataset: dataset.to_string(), tile: *tile, width };
        match self.pool.submit(key, ds)? {
            Submission::Cached(g) => Ok(GridSource::Cached(g)),
            Submission::Pending(rx) => match rx.await {
                Ok(Ok(outcome)) => Ok(GridSource::Rendered(outcome.grid)),
                Ok(Err(msg)) => Err(ServiceError::RenderFailed(msg)),
                Err(_) => Err(ServiceError::ShuttingDown),
            },
        }
    }

    /// Renders and styles a tile to PNG bytes.
    pub async fn tile_png(&self, req: &TileRequest) -> Result<Vec<u8>, ServiceError> {
        self.respond(req).await.map(|(png, _)| png)
    }

    /// Like [`tile_png`](Self::tile_png), also reporting where the grid came from.
    pub async fn respond(&self, req: &TileRequest) -> Result<(Vec<u8>, GridSource), ServiceError> {
        if let FillMode::Pattern(id) = &req.style.fill {
            if self.patterns.get(id).is_none() {
                return Err(ServiceError::BadRequest(format!("unknown pattern `{id}`")));
            }
        }
        let source = self.grid(&req.dataset, &req.tile, req.style.stroke_width).await?;
        let png = match source.grid() {
            None => transparent_png(),
            Some(g) => encode_png(&style_tile(g, &req.style, &req.tile, &self.patterns)?)?,
        };
        Ok((png, source))
    }

    /// Parses and registers an uploaded dataset. Blocking.
    pub fn register(
        &self,
        name: &str,
        format: InputFormat,
        bytes: &[u8],
        opts: ParseOptions,
    ) -> Result<DatasetHandle, ServiceError> {
        if self.catalog.get(name).is_some() {
            return Err(ServiceError::Duplicate(name.to_string()));
        }
        let features = parse_dataset(bytes, format, opts)?;
        Ok(self.catalog.register(name, &features)?)
    }

    pub fn datasets(&self) -> Vec<DatasetHandle> {
        self.catalog.list()
    }

    pub fn metrics(&self) -> MetricsSnapshot {
        self.metrics.snapshot(self.pool.queue_depth(), self.pool.in_flight(), self.results.len())
    }

    pub fn render_histogram(&self) -> hdrhistogram::Histogram<u64> {
        self.metrics.render_histogram()
    }

    pub fn shutdown(&self) {
        self.pool.shutdown();
    }
}
