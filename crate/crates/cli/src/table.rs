//! Result rows and their CSV form.
//!
//! Floats are written with 9 significant digits; infinities as `inf`.
//! A row whose simulation failed keeps its configuration columns, leaves
//! the metric columns empty and carries the message in `error`.

use std::io::{Read, Write};

use dbtrain::{Estimator, Mode, SimConfig};

use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 13] =
    ["suite", "mode", "snr_db", "beta", "T_c", "T_d", "N_d", "overhead", "ber", "nmse", "seed", "runtime_s", "error"];

/// One simulated configuration and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub suite: String,
    /// `conventional_omp`, `conventional_map`, `dedicated_dual` or `dedicated_single`.
    pub mode: String,
    pub snr_db: f64,
    pub beta: f64,
    pub t_c: u64,
    /// `inf` for conventional rows.
    pub t_d: f64,
    pub n_d: usize,
    pub metrics: Option<Metrics>,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub overhead: f64,
    pub ber: f64,
    pub nmse: f64,
    /// Simulated air time of the run.
    pub runtime_s: f64,
}

/// Row label combining the protocol and, for cycling, the estimator.
pub fn mode_label(cfg: &SimConfig) -> String {
    match (cfg.mode, cfg.estimator) {
        (Mode::ConventionalCycling, Estimator::Omp) => "conventional_omp".into(),
        (Mode::ConventionalCycling, Estimator::Map) => "conventional_map".into(),
        (m, _) => m.name().into(),
    }
}

impl CsvRow {
    /// Configuration columns of `cfg`, with no metrics yet.
    pub fn for_config(suite: &str, cfg: &SimConfig) -> Self {
        let dedicated = cfg.mode.is_dedicated();
        Self {
            suite: suite.to_string(),
            mode: mode_label(cfg),
            snr_db: cfg.snr_db,
            beta: cfg.beta,
            t_c: cfg.t_c,
            t_d: if dedicated { cfg.t_d as f64 } else { f64::INFINITY },
            n_d: cfg.n_d,
            metrics: None,
            seed: cfg.rng_seed,
            error: String::new(),
        }
    }

    fn fields(&self) -> Vec<String> {
        let m = |f: fn(&Metrics) -> f64| self.metrics.as_ref().map_or(String::new(), |x| fmt_num(f(x)));
        vec![
            self.suite.clone(),
            self.mode.clone(),
            fmt_num(self.snr_db),
            fmt_num(self.beta),
            self.t_c.to_string(),
            fmt_num(self.t_d),
            self.n_d.to_string(),
            m(|x| x.overhead),
            m(|x| x.ber),
            m(|x| x.nmse),
            self.seed.to_string(),
            m(|x| x.runtime_s),
            self.error.clone(),
        ]
    }
}

/// `x` with 9 significant digits and no trailing zeros; `inf`, `-inf`, `nan`
/// for non-finite values.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Writes rows after a single header.
pub struct RowWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RowWriter<W> {
    pub fn new(out: W) -> CliResult<Self> {
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        inner.write_record(HEADER).map_err(csv_err)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, row: &CsvRow) -> CliResult<()> {
        self.inner.write_record(row.fields()).map_err(csv_err)?;
        self.inner.flush().map_err(|e| CliError::Data(format!("write failed: {e}")))
    }

    pub fn into_inner(self) -> CliResult<W> {
        self.inner.into_inner().map_err(|e| CliError::Data(format!("flush failed: {e}")))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Data(format!("csv: {e}"))
}

/// Rows to a string, header included.
pub fn to_csv_string(rows: &[CsvRow]) -> String {
    let mut w = RowWriter::new(Vec::new()).expect("writing to memory");
    for r in rows {
        w.write(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv is utf-8")
}

/// Parse a results file. The header must match [`HEADER`] exactly.
pub fn read_rows<R: Read>(input: R) -> CliResult<Vec<CsvRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(CliError::Data(format!(
            "unexpected header '{}', expected '{}'",
            header.iter().collect::<Vec<_>>().join(","),
            HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let num = |k: usize| -> CliResult<f64> {
            let s = field(k);
            let v: f64 = s.parse().map_err(|_| CliError::Data(format!("line {line}: column {} is not a number: '{s}'", HEADER[k])))?;
            if v.is_nan() {
                return Err(CliError::Data(format!("line {line}: column {} is nan", HEADER[k])));
            }
            Ok(v)
        };
        let int = |k: usize| -> CliResult<u64> {
            field(k).parse().map_err(|_| CliError::Data(format!("line {line}: column {} is not an integer: '{}'", HEADER[k], field(k))))
        };
        let error = field(12).to_string();
        let metrics = if error.is_empty() {
            Some(Metrics { overhead: num(7)?, ber: num(8)?, nmse: num(9)?, runtime_s: num(11)? })
        } else {
            None
        };
        rows.push(CsvRow {
            suite: field(0).to_string(),
            mode: field(1).to_string(),
            snr_db: num(2)?,
            beta: num(3)?,
            t_c: int(4)?,
            t_d: num(5)?,
            n_d: int(6)? as usize,
            metrics,
            seed: int(10)?,
            error,
        });
    }
    Ok(rows)
}
