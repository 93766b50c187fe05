use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pixdrive_bench::run::block_on;
use pixdrive_bench::{
    bench_service, read_tiles_csv, run_complexity, run_scaling, run_workload, write_csv, write_json, write_tiles_csv,
    ComplexitySettings, DataSource, Rate, Workload,
};
use pixdrive_core::ingest::{parse_dataset, ParseOptions};
use pixdrive_core::synth::{write_wkt, SynthKind};
use pixdrive_core::{BoundingBox, Catalog, InputFormat, TileKey};
use pixdrive_service::{serve, ServiceConfig, TileService};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "pixdrive", version, about = "Display-driven vector tile rendering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP tile service.
    Serve {
        /// key = value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides a configuration key, e.g. `--set port=9000`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Parse a dataset and persist its indexes into a data directory.
    Register {
        name: String,
        file: PathBuf,
        #[arg(long, default_value = "wkt-lines")]
        format: InputFormat,
        #[arg(long)]
        data_dir: PathBuf,
        /// The CSV file starts with a header line.
        #[arg(long)]
        header: bool,
    },
    /// Workload generation and benchmarks.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Write a seeded tile request sequence as CSV.
    Gen {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        workload: WorkloadArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also write the dataset as WKT lines in lon/lat.
        #[arg(long)]
        write_data: Option<PathBuf>,
    },
    /// Replay a workload at one or more request rates.
    Run {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        workload: WorkloadArgs,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Requests per second, comma separated; `inf` sends everything at once.
        #[arg(long, value_delimiter = ',', default_value = "inf")]
        rates: Vec<Rate>,
        #[arg(long, default_value = "results")]
        results: PathBuf,
    },
    /// Replay a workload under a matrix of worker and thread counts.
    Scale {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        workload: WorkloadArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        workers: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        threads: Vec<usize>,
        #[arg(long, default_value = "results")]
        results: PathBuf,
    },
    /// Index traversal cost against a brute-force scan over growing datasets.
    Complexity {
        #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000,1000000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        tiles: usize,
        #[arg(long, default_value_t = 3)]
        zoom_min: u32,
        #[arg(long, default_value_t = 15)]
        zoom_max: u32,
        #[arg(long, default_value_t = 1)]
        width: u32,
        /// Pixels per tile classified by the brute-force scan.
        #[arg(long, default_value_t = 64)]
        oracle_pixels: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "results")]
        results: PathBuf,
    },
}

#[derive(Args)]
struct SourceArgs {
    /// Dataset file; without it a synthetic dataset is generated.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "wkt-lines")]
    format: InputFormat,
    #[arg(long)]
    header: bool,
    #[arg(long, default_value = "points")]
    synth: SynthKind,
    /// Number of synthetic objects.
    #[arg(long, default_value_t = 100_000)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    data_seed: u64,
}

impl SourceArgs {
    fn source(&self) -> DataSource {
        match &self.data {
            Some(path) => DataSource::File { path: path.clone(), format: self.format, csv_header: self.header },
            None => DataSource::synthetic(self.synth, self.count, self.data_seed),
        }
    }
}

#[derive(Args)]
struct WorkloadArgs {
    #[arg(long, default_value_t = 1000)]
    tiles: usize,
    #[arg(long, default_value_t = 3)]
    zoom_min: u32,
    #[arg(long, default_value_t = 15)]
    zoom_max: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Stroke radius in pixels.
    #[arg(long, default_value_t = 1)]
    width: u32,
    /// Replay this `z,x,y` CSV instead of generating a sequence.
    #[arg(long)]
    tile_file: Option<PathBuf>,
}

impl WorkloadArgs {
    fn workload(&self, dataset: &str) -> Workload {
        Workload {
            dataset: dataset.to_string(),
            tiles: self.tiles,
            zoom_min: self.zoom_min,
            zoom_max: self.zoom_max,
            seed: self.seed,
            rate: Rate::Unlimited,
            width: self.width,
        }
    }

    fn tiles(&self, dataset: &str, mbr: &BoundingBox) -> Result<Vec<TileKey>> {
        match &self.tile_file {
            Some(path) => {
                let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                read_tiles_csv(BufReader::new(f))
            }
            None => self.workload(dataset).generate(mbr),
        }
    }
}

const BENCH_DATASET: &str = "bench";

/// Loads the source into a fresh in-memory catalog.
fn load_catalog(source: &SourceArgs) -> Result<(Arc<Catalog>, BoundingBox)> {
    let set = source.source().load()?;
    let catalog = Arc::new(Catalog::in_memory());
    let handle = catalog.register_geometry(BENCH_DATASET, &set)?;
    tracing::info!(objects = set.len(), primitives = handle.counts.primitives, "dataset indexed");
    Ok((catalog, handle.mbr))
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Serve { config, overrides } => cmd_serve(config.as_deref(), &overrides),
        Command::Register { name, file, format, data_dir, header } => {
            let f = File::open(&file).with_context(|| format!("opening {}", file.display()))?;
            let features = parse_dataset(BufReader::new(f), format, ParseOptions { csv_header: header })?;
            let handle = Catalog::open(&data_dir)?.register(&name, &features)?;
            println!("{}", serde_json::to_string_pretty(&handle)?);
            Ok(())
        }
        Command::Bench(cmd) => cmd_bench(cmd),
    }
}

fn cmd_serve(config: Option<&Path>, overrides: &[String]) -> Result<()> {
    let mut cfg = match config {
        Some(p) => ServiceConfig::load(p)?,
        None => ServiceConfig::default(),
    };
    for o in overrides {
        let Some((k, v)) = o.split_once('=') else { bail!("override `{o}` is not KEY=VALUE") };
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    let service = Arc::new(TileService::from_config(cfg)?);
    block_on(serve(service))??;
    Ok(())
}

fn cmd_bench(cmd: BenchCommand) -> Result<()> {
    match cmd {
        BenchCommand::Gen { source, workload, out, write_data } => {
            let set = source.source().load()?;
            if let Some(path) = write_data {
                let mut w = BufWriter::new(File::create(&path).with_context(|| format!("writing {}", path.display()))?);
                write_wkt(&set, &mut w)?;
            }
            let mbr = pixdrive_core::Dataset::build(BENCH_DATASET, &set)?.mbr();
            let tiles = workload.tiles(BENCH_DATASET, &mbr)?;
            write_tiles_csv(
                &tiles,
                BufWriter::new(File::create(&out).with_context(|| format!("writing {}", out.display()))?),
            )?;
            println!("wrote {} tiles to {}", tiles.len(), out.display());
            Ok(())
        }
        BenchCommand::Run { source, workload, workers, threads, rates, results } => {
            let (catalog, mbr) = load_catalog(&source)?;
            let tiles = workload.tiles(BENCH_DATASET, &mbr)?;
            let mut reports = Vec::new();
            for rate in rates {
                let svc = bench_service(Arc::clone(&catalog), workers, threads)?;
                let r = block_on(run_workload(&svc, BENCH_DATASET, &tiles, rate, workload.width))??;
                svc.shutdown();
                println!(
                    "rate {:>8}  {:>6} tiles  {:>8.3} s  {:>8.1} tiles/s  p50 {:>8.2} ms  p90 {:>8.2} ms  max {:>8.2} ms",
                    r.rate, r.tiles, r.total_s, r.tiles_per_s, r.latency_ms.p50, r.latency_ms.p90, r.latency_ms.max
                );
                reports.push(r);
            }
            let rows: Vec<_> = reports.iter().map(|r| r.row()).collect();
            write_csv(&results.join("run.csv"), &rows)?;
            write_json(&results.join("run.json"), &reports)?;
            Ok(())
        }
        BenchCommand::Scale { source, workload, workers, threads, results } => {
            let (catalog, mbr) = load_catalog(&source)?;
            let tiles = workload.tiles(BENCH_DATASET, &mbr)?;
            let r = block_on(run_scaling(catalog, BENCH_DATASET, &tiles, workload.width, &workers, &threads))??;
            for c in &r.cells {
                println!(
                    "workers {:>3}  threads {:>3}  {:>8.3} s  {:>8.1} tiles/s  speedup {:>5.2}",
                    c.workers, c.threads_per_worker, c.total_s, c.tiles_per_s, c.speedup
                );
            }
            println!("grids identical across configurations: {}", r.deterministic);
            if r.available_cores < 4 {
                println!("note: {} core(s) available; speedups above that are not attainable", r.available_cores);
            }
            write_csv(&results.join("scale.csv"), &r.cells)?;
            write_json(&results.join("scale.json"), &r)?;
            Ok(())
        }
        BenchCommand::Complexity { sizes, tiles, zoom_min, zoom_max, width, oracle_pixels, seed, results } => {
            let settings = ComplexitySettings {
                sizes,
                tiles,
                zoom_min,
                zoom_max,
                width,
                oracle_pixels,
                seed,
                ..Default::default()
            };
            let rows = run_complexity(&settings)?;
            for r in &rows {
                println!(
                    "n {:>9}  visits/px {:>7.2}  ms/tile {:>8.2}  oracle touches/px {:>10.0}  oracle us/px {:>9.2}  unexplained {}",
                    r.n, r.engine_visits_per_pixel, r.engine_ms_per_tile, r.oracle_touches_per_pixel, r.oracle_us_per_pixel, r.unexplained
                );
            }
            write_csv(&results.join("complexity.csv"), &rows)?;
            write_json(&results.join("complexity.json"), &rows)?;
            Ok(())
        }
    }
}
