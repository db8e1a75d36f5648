//! Per-group aggregates of a results file and the checks suites declare.
//!
//! Rows are grouped by every configuration column except the seed. Checks
//! compare group means, either against a number or against the matching
//! group of another mode:
//!
//! ```text
//! check = ber <= 0.5
//! check = overhead == 0.032 where T_c=1000
//! check = nmse conventional_map < conventional_omp
//! check = ber dedicated_single >= 10 * dedicated_dual
//! check = ber dedicated_dual <= conventional_omp match beta,snr_db pair T_d=T_c
//! ```
//!
//! Without `match`, partners agree on every key not named in `pair`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::suite::{builtin, ExperimentSuite};
use crate::table::{fmt_num, read_rows, CsvRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Ber,
    Nmse,
    Overhead,
}

impl Metric {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "ber" => Self::Ber,
            "nmse" => Self::Nmse,
            "overhead" => Self::Overhead,
            _ => return None,
        })
    }

    fn of(self, g: &GroupStats) -> f64 {
        match self {
            Self::Ber => g.ber.mean,
            Self::Nmse => g.nmse.mean,
            Self::Overhead => g.overhead.mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Op {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "<" => Self::Lt,
            "<=" => Self::Le,
            ">" => Self::Gt,
            ">=" => Self::Ge,
            "==" => Self::Eq,
            _ => return None,
        })
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Self::Lt => a < b,
            Self::Le => a <= b,
            Self::Gt => a > b,
            Self::Ge => a >= b,
            Self::Eq => (a - b).abs() <= 1e-9 * b.abs().max(1.0),
        }
    }
}

/// Configuration columns a group is keyed on, besides suite and mode.
pub const GROUP_KEYS: [&str; 5] = ["snr_db", "beta", "T_c", "T_d", "N_d"];

fn key_index(k: &str) -> Option<usize> {
    GROUP_KEYS.iter().position(|g| *g == k)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rhs {
    Number(f64),
    Mode { factor: f64, mode: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub text: String,
    pub metric: Metric,
    /// Groups of this mode only; every group when `None`.
    pub lhs: Option<String>,
    pub op: Op,
    pub rhs: Rhs,
    pub filter: Vec<(usize, f64)>,
    pub matched: Vec<usize>,
    pub paired: Vec<(usize, usize)>,
}

impl Check {
    pub fn parse(text: &str) -> CliResult<Self> {
        let spaced = text.replace('*', " * ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        let bad = |why: &str| CliError::Config(format!("check '{}': {why}", text.trim()));
        let mut it = tokens.iter().copied().peekable();
        let metric = it.next().and_then(Metric::parse).ok_or_else(|| bad("expected ber, nmse or overhead first"))?;
        let mut lhs = None;
        let op = match it.next() {
            Some(t) if Op::parse(t).is_some() => Op::parse(t).unwrap(),
            Some(mode) => {
                lhs = Some(mode.to_string());
                it.next().and_then(Op::parse).ok_or_else(|| bad("expected a comparison (<, <=, >, >=, ==)"))?
            }
            None => return Err(bad("missing comparison")),
        };
        let first = it.next().ok_or_else(|| bad("missing right-hand side"))?;
        let rhs = match first.parse::<f64>() {
            Ok(x) if it.peek() == Some(&"*") => {
                it.next();
                let mode = it.next().ok_or_else(|| bad("missing mode after '*'"))?;
                Rhs::Mode { factor: x, mode: mode.to_string() }
            }
            Ok(x) => Rhs::Number(x),
            Err(_) => Rhs::Mode { factor: 1.0, mode: first.to_string() },
        };
        let mut check = Self { text: text.trim().to_string(), metric, lhs, op, rhs, filter: vec![], matched: vec![], paired: vec![] };
        let mut explicit_match = None;
        while let Some(clause) = it.next() {
            let arg = it.next().ok_or_else(|| bad(&format!("'{clause}' needs an argument")))?;
            let key = |k: &str| key_index(k.trim()).ok_or_else(|| bad(&format!("unknown column '{}'", k.trim())));
            match clause {
                "where" => {
                    for kv in arg.split(',') {
                        let (k, v) = kv.split_once('=').ok_or_else(|| bad("where expects key=value"))?;
                        let v: f64 = v.trim().parse().map_err(|_| bad(&format!("'{v}' is not a number")))?;
                        check.filter.push((key(k)?, v));
                    }
                }
                "match" => {
                    explicit_match = Some(arg.split(',').map(key).collect::<CliResult<Vec<_>>>()?);
                }
                "pair" => {
                    let (a, b) = arg.split_once('=').ok_or_else(|| bad("pair expects keyA=keyB"))?;
                    check.paired.push((key(a)?, key(b)?));
                }
                other => return Err(bad(&format!("unknown clause '{other}'"))),
            }
        }
        if !matches!(check.rhs, Rhs::Mode { .. }) && (explicit_match.is_some() || !check.paired.is_empty()) {
            return Err(bad("match and pair need a mode on the right-hand side"));
        }
        check.matched = explicit_match.unwrap_or_else(|| {
            (0..GROUP_KEYS.len()).filter(|k| !check.paired.iter().any(|(a, b)| a == k || b == k)).collect()
        });
        Ok(check)
    }

    fn selects(&self, g: &GroupStats) -> bool {
        self.lhs.as_ref().is_none_or(|m| *m == g.mode) && self.filter.iter().all(|&(k, v)| g.keys[k] == v)
    }

    fn partners<'a>(&self, a: &GroupStats, groups: &'a [GroupStats], mode: &str) -> Vec<&'a GroupStats> {
        groups
            .iter()
            .filter(|b| b.suite == a.suite && b.mode == mode)
            .filter(|b| self.matched.iter().all(|&k| b.keys[k] == a.keys[k]))
            .filter(|b| self.paired.iter().all(|&(ka, kb)| b.keys[kb] == a.keys[ka]))
            .collect()
    }

    /// Evaluate against the groups of one suite.
    pub fn evaluate(&self, groups: &[GroupStats]) -> CheckOutcome {
        let mut compared = 0;
        let mut failures = Vec::new();
        for a in groups.iter().filter(|g| self.selects(g)) {
            let x = self.metric.of(a);
            match &self.rhs {
                Rhs::Number(y) => {
                    compared += 1;
                    if !self.op.holds(x, *y) {
                        failures.push(format!("{} {}: {}", a.mode, a.label(), fmt_num(x)));
                    }
                }
                Rhs::Mode { factor, mode } => {
                    let bs = self.partners(a, groups, mode);
                    if bs.is_empty() {
                        failures.push(format!("{} {}: no {mode} group to compare with", a.mode, a.label()));
                    }
                    for b in bs {
                        compared += 1;
                        let y = factor * self.metric.of(b);
                        if !self.op.holds(x, y) {
                            failures.push(format!("{} {}: {} vs {} {}", a.mode, a.label(), fmt_num(x), mode, fmt_num(y)));
                        }
                    }
                }
            }
        }
        if compared == 0 && failures.is_empty() {
            failures.push("no groups to compare".into());
        }
        CheckOutcome { check: self.text.clone(), compared, failures }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub check: String,
    pub compared: usize,
    pub failures: Vec<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Mean and sample standard deviation (`n - 1` denominator; zero for one value).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub suite: String,
    pub mode: String,
    /// Values of [`GROUP_KEYS`].
    pub keys: [f64; 5],
    pub runs: usize,
    pub ber: Stat,
    pub nmse: Stat,
    pub overhead: Stat,
}

impl GroupStats {
    fn label(&self) -> String {
        GROUP_KEYS.iter().zip(self.keys).map(|(k, v)| format!("{k}={}", fmt_num(v))).collect::<Vec<_>>().join(" ")
    }
}

/// Successful rows grouped in order of first appearance.
pub fn group_rows(rows: &[CsvRow]) -> Vec<GroupStats> {
    let mut order: Vec<(String, String, [f64; 5], Vec<&CsvRow>)> = Vec::new();
    for r in rows.iter().filter(|r| r.metrics.is_some()) {
        let keys = [r.snr_db, r.beta, r.t_c as f64, r.t_d, r.n_d as f64];
        match order.iter_mut().find(|(s, m, k, _)| *s == r.suite && *m == r.mode && *k == keys) {
            Some(entry) => entry.3.push(r),
            None => order.push((r.suite.clone(), r.mode.clone(), keys, vec![r])),
        }
    }
    order
        .into_iter()
        .map(|(suite, mode, keys, rs)| {
            let col = |f: fn(&crate::table::Metrics) -> f64| -> Vec<f64> { rs.iter().map(|r| f(r.metrics.as_ref().unwrap())).collect() };
            GroupStats {
                suite,
                mode,
                keys,
                runs: rs.len(),
                ber: Stat::of(&col(|m| m.ber)),
                nmse: Stat::of(&col(|m| m.nmse)),
                overhead: Stat::of(&col(|m| m.overhead)),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryReport {
    pub groups: Vec<GroupStats>,
    pub checks: Vec<CheckOutcome>,
    pub total_rows: usize,
    pub failed_rows: usize,
    /// Suites in the file with no known definition, hence no checks.
    pub unknown_suites: Vec<String>,
}

impl SummaryReport {
    /// 1 when there is nothing to summarize, 2 when a check failed, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.groups.is_empty() {
            1
        } else if self.checks.iter().any(|c| !c.passed()) {
            2
        } else {
            0
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        if self.groups.is_empty() {
            let _ = writeln!(s, "warning: no rows to summarize ({} rows, {} failed)", self.total_rows, self.failed_rows);
            return s;
        }
        let _ = writeln!(
            s,
            "{:<22} {:<18} {:>7} {:>8} {:>6} {:>6} {:>4} {:>5} {:>23} {:>23} {:>11}",
            "suite", "mode", "snr_db", "beta", "T_c", "T_d", "N_d", "runs", "ber (mean ± std)", "nmse (mean ± std)", "overhead"
        );
        for g in &self.groups {
            let pm = |st: Stat| format!("{:.4e} ± {:.2e}", st.mean, st.std);
            let _ = writeln!(
                s,
                "{:<22} {:<18} {:>7} {:>8} {:>6} {:>6} {:>4} {:>5} {:>23} {:>23} {:>11}",
                g.suite,
                g.mode,
                fmt_num(g.keys[0]),
                fmt_num(g.keys[1]),
                fmt_num(g.keys[2]),
                fmt_num(g.keys[3]),
                fmt_num(g.keys[4]),
                g.runs,
                pm(g.ber),
                pm(g.nmse),
                format!("{:.4}", g.overhead.mean)
            );
        }
        if self.failed_rows > 0 {
            let _ = writeln!(s, "{} of {} rows failed and are excluded", self.failed_rows, self.total_rows);
        }
        for u in &self.unknown_suites {
            let _ = writeln!(s, "suite {u}: no definition found, no checks run");
        }
        for c in &self.checks {
            let _ = writeln!(s, "[{}] {} ({} comparisons)", if c.passed() { "PASS" } else { "FAIL" }, c.check, c.compared);
            for f in &c.failures {
                let _ = writeln!(s, "       {f}");
            }
        }
        s
    }
}

/// Aggregate rows and run the checks of each suite present. A suite is
/// looked up in `definitions` first, then among the builtins.
pub fn summarize_rows(rows: &[CsvRow], definitions: &[ExperimentSuite]) -> SummaryReport {
    let groups = group_rows(rows);
    let mut suites: Vec<&str> = Vec::new();
    for g in &groups {
        if !suites.contains(&g.suite.as_str()) {
            suites.push(&g.suite);
        }
    }
    let mut checks = Vec::new();
    let mut unknown_suites = Vec::new();
    for name in suites {
        let def = definitions.iter().find(|d| d.name == name).cloned().or_else(|| builtin(name));
        let Some(def) = def else {
            unknown_suites.push(name.to_string());
            continue;
        };
        let mine: Vec<GroupStats> = groups.iter().filter(|g| g.suite == name).cloned().collect();
        checks.extend(def.checks.iter().map(|c| {
            let mut out = c.evaluate(&mine);
            out.check = format!("{name}: {}", out.check);
            out
        }));
    }
    SummaryReport {
        groups,
        checks,
        total_rows: rows.len(),
        failed_rows: rows.iter().filter(|r| r.metrics.is_none()).count(),
        unknown_suites,
    }
}

pub fn summarize_file(path: &Path, definitions: &[ExperimentSuite]) -> CliResult<SummaryReport> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let rows = read_rows(std::io::BufReader::new(file)).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(summarize_rows(&rows, definitions))
}
