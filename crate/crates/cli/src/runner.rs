//! Suite execution.
//!
//! Rows run on a pool of `jobs` threads. Finished rows go through a channel
//! to the calling thread, which holds them back until every earlier row is
//! written, so the file order is the sweep order whatever the completion
//! order. Wall-clock information goes to a `.meta` file next to the CSV,
//! keeping the CSV itself reproducible.

use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use dbtrain::sim::run_scenario;
use dbtrain::SimConfig;
use rayon::ThreadPoolBuilder;

use crate::error::{CliError, CliResult};
use crate::suite::{ExpandOptions, ExperimentSuite};
use crate::table::{CsvRow, Metrics, RowWriter};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
    /// Replaces the suite's output path.
    pub out: Option<PathBuf>,
    pub expand: ExpandOptions,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub rows: Vec<CsvRow>,
    pub out_path: PathBuf,
    pub wall_s: f64,
}

impl RunOutcome {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.metrics.is_none()).count()
    }
}

/// Simulate one configuration; failures, panics included, become the
/// row's error text.
pub fn run_row(suite: &str, cfg: &SimConfig) -> CsvRow {
    let mut row = CsvRow::for_config(suite, cfg);
    match catch_unwind(AssertUnwindSafe(|| run_scenario(cfg))) {
        Ok(Ok(report)) => {
            row.metrics =
                Some(Metrics { overhead: report.overhead, ber: report.ber, nmse: report.nmse, runtime_s: cfg.air_time_s() });
        }
        Ok(Err(e)) => row.error = e.to_string(),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            row.error = format!("simulation panicked: {msg}");
        }
    }
    row
}

/// Run `configs` on `jobs` threads, handing rows to `sink` in input order.
pub fn run_rows(suite: &str, configs: &[SimConfig], jobs: usize, mut sink: impl FnMut(&CsvRow) -> CliResult<()>) -> CliResult<Vec<CsvRow>> {
    let pool = ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("jobs: cannot start {jobs} workers: {e}")))?;
    let (tx, rx) = mpsc::channel::<(usize, CsvRow)>();
    let mut rows = Vec::with_capacity(configs.len());
    std::thread::scope(|scope| -> CliResult<()> {
        scope.spawn(move || {
            pool.scope(|s| {
                for (i, cfg) in configs.iter().enumerate() {
                    let tx = tx.clone();
                    s.spawn(move |_| {
                        // the receiver only disappears after an earlier write failed
                        let _ = tx.send((i, run_row(suite, cfg)));
                    });
                }
            });
        });
        let mut pending = BTreeMap::new();
        for (i, row) in rx {
            pending.insert(i, row);
            while let Some(row) = pending.remove(&rows.len()) {
                sink(&row)?;
                rows.push(row);
            }
        }
        Ok(())
    })?;
    Ok(rows)
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta");
    out.with_file_name(name)
}

/// Expand, run and write a suite. Rows that fail keep the suite going.
pub fn run_suite(suite: &ExperimentSuite, opts: &RunOptions) -> CliResult<RunOutcome> {
    let configs = suite.expand(&opts.expand)?;
    let jobs = if opts.jobs == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { opts.jobs };
    let out_path = opts.out.clone().unwrap_or_else(|| suite.output_path.clone());
    if let Some(dir) = out_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = std::fs::File::create(&out_path).map_err(|e| CliError::io(&out_path, e))?;
    let mut writer = RowWriter::new(std::io::BufWriter::new(file))?;

    let started = SystemTime::now();
    let clock = Instant::now();
    let rows = run_rows(&suite.name, &configs, jobs, |row| writer.write(row))?;
    writer.into_inner()?.flush().map_err(|e| CliError::io(&out_path, e))?;
    let wall_s = clock.elapsed().as_secs_f64();

    let meta = meta_path(&out_path);
    let failed = rows.iter().filter(|r| r.metrics.is_none()).count();
    let text = format!(
        "suite = {}\nrows = {}\nfailed_rows = {failed}\njobs = {jobs}\nstarted_unix_s = {}\nwall_clock_s = {wall_s:.3}\nversion = {}\n",
        suite.name,
        rows.len(),
        started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        env!("CARGO_PKG_VERSION"),
    );
    std::fs::write(&meta, text).map_err(|e| CliError::io(&meta, e))?;
    Ok(RunOutcome { rows, out_path, wall_s })
}
