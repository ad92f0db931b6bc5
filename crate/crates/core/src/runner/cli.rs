use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

use super::config::{parse_config, Format, Task};
use super::report::emit_report;
use super::tasks::run_experiment;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

/// Run one experiment from a TOML config and write `<task>.json` / `<task>.csv`.
#[derive(Debug, Parser)]
#[command(name = "spectra-lab", version)]
pub struct Cli {
    pub task: Task,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `output.dir`; default `.`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write only this format (default: both).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Parses `args` (program name first) and runs; returns the exit code.
/// Diagnostics, wall time and cache statistics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: {}: {e}", cli.config.display());
            return EXIT_CONFIG;
        }
    };
    let mut cfg = match parse_config(&text, Some(cli.task)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = cli.format {
        cfg.output.format = Some(f);
    }
    let out = cli.out.clone().or_else(|| cfg.output.dir.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    cfg.output.dir = Some(out.display().to_string());
    let cache_dir = cfg.output.cache.then(|| out.join(".cache"));

    let start = Instant::now();
    let (record, stats) = run_experiment(&cfg, cache_dir.as_deref());
    let elapsed = start.elapsed().as_secs_f64();
    let written = match emit_report(&record, &out, cfg.output.format) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("cannot write report to {}: {e}", out.display());
            return EXIT_COMPUTATION;
        }
    };
    for p in &written {
        eprintln!("wrote {}", p.display());
    }
    eprintln!(
        "{}: {} in {elapsed:.3} s; cache hits {}, misses {}, spot checks {}",
        record.task.name(),
        record.status(),
        stats.hits,
        stats.misses,
        stats.spot_checks
    );
    match &record.error {
        Some(e) => {
            eprintln!("error: {e}");
            EXIT_COMPUTATION
        }
        None => EXIT_OK,
    }
}
