//! Experiment suites.
//!
//! A suite file uses the same `key = value` lines as a config, plus a few
//! reserved keys:
//!
//! ```text
//! suite = mse_vs_snr            # name, required
//! seeds = 1-20                  # list and ranges, default 1-10
//! out = mse_vs_snr.csv          # default <name>.csv
//! T_c = 100                     # any config key
//! sweep.snr_db = 0, 5, 10       # one row group per value
//! check = nmse conventional_map < conventional_omp
//!
//! [dedicated]                   # optional blocks, run one after another
//! mode = dedicated_dual
//! sweep.T_d = 500, 200
//! ```
//!
//! Sweeps form a cartesian product with the first declared key outermost;
//! suite-level sweeps come before block sweeps. Rows are emitted per sweep
//! point and, inside it, per seed.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use dbtrain::SimConfig;

use crate::config::{apply_pairs, parse_pair, Pair};
use crate::error::{CliError, CliResult};
use crate::summary::Check;

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<String>,
    pub origin: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    pub pairs: Vec<Pair>,
    pub sweeps: Vec<Sweep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSuite {
    pub name: String,
    pub seeds: Vec<u64>,
    pub output_path: PathBuf,
    pub pairs: Vec<Pair>,
    pub sweeps: Vec<Sweep>,
    /// Never empty: a suite without `[block]` headers has one unnamed block.
    pub blocks: Vec<Block>,
    pub checks: Vec<Check>,
}

/// How a suite is turned into configurations.
#[derive(Debug, Clone, Default)]
pub struct ExpandOptions {
    pub paper_scale: bool,
    /// Replaces the suite's seed list.
    pub seeds: Option<Vec<u64>>,
    /// Applied last, after sweep values and the scale switch.
    pub overrides: Vec<String>,
}

const BUILTIN: [(&str, &str); 4] = [
    ("smoke", include_str!("../suites/smoke.suite")),
    ("overhead_conventional", include_str!("../suites/overhead_conventional.suite")),
    ("mse_vs_snr", include_str!("../suites/mse_vs_snr.suite")),
    ("overhead_dedicated", include_str!("../suites/overhead_dedicated.suite")),
];

/// Names of the suites compiled into the tool.
pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

/// A compiled-in suite by name.
pub fn builtin(name: &str) -> Option<ExperimentSuite> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| ExperimentSuite::parse(text, &format!("builtin:{n}")).expect("builtin suites parse"))
}

/// Parse a seed list such as `1,2,5-8`.
pub fn parse_seeds(text: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::Config(format!("seeds: expected a list like 1,2,5-8, got '{}'", text.trim()));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    if seeds.is_empty() {
        return Err(bad());
    }
    let mut seen = HashSet::new();
    if let Some(dup) = seeds.iter().find(|s| !seen.insert(**s)) {
        return Err(CliError::Config(format!("seeds: seed {dup} listed twice")));
    }
    Ok(seeds)
}

impl ExperimentSuite {
    /// Load a suite file, or a builtin suite when `name` names one and no
    /// such file exists.
    pub fn load(name: &str) -> CliResult<Self> {
        let path = Path::new(name);
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            return Self::parse(&text, &path.display().to_string());
        }
        builtin(name).ok_or_else(|| {
            CliError::Config(format!("suite '{name}' is neither a file nor a builtin ({})", builtin_names().join(", ")))
        })
    }

    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        let mut name = None;
        let mut seeds = None;
        let mut out = None;
        let mut pairs = Vec::new();
        let mut sweeps = Vec::new();
        let mut checks = Vec::new();
        let mut blocks: Vec<Block> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let origin = format!("{source}:{}", i + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                let block = header
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or_else(|| CliError::Config(format!("{origin}: malformed block header '{line}'")))?;
                if blocks.iter().any(|b| b.name == block) {
                    return Err(CliError::Config(format!("{origin}: block '{block}' defined twice")));
                }
                blocks.push(Block { name: block.to_string(), pairs: Vec::new(), sweeps: Vec::new() });
                continue;
            }
            let pair = parse_pair(line, &origin)?;
            let in_block = !blocks.is_empty();
            let global_only = |what: &str| -> CliResult<()> {
                if in_block {
                    Err(CliError::Config(format!("{origin}: '{what}' belongs before the first block")))
                } else {
                    Ok(())
                }
            };
            match pair.key.as_str() {
                "suite" => {
                    global_only("suite")?;
                    name = Some(pair.value.clone());
                }
                "seeds" => {
                    global_only("seeds")?;
                    seeds = Some(parse_seeds(&pair.value).map_err(|e| CliError::Config(format!("{origin}: {e}")))?);
                }
                "out" => {
                    global_only("out")?;
                    out = Some(PathBuf::from(&pair.value));
                }
                "check" => {
                    global_only("check")?;
                    checks.push(Check::parse(&pair.value).map_err(|e| CliError::Config(format!("{origin}: {e}")))?);
                }
                key => {
                    let target = match blocks.last_mut() {
                        Some(b) => (&mut b.pairs, &mut b.sweeps),
                        None => (&mut pairs, &mut sweeps),
                    };
                    if let Some(swept) = key.strip_prefix("sweep.") {
                        let values: Vec<String> =
                            pair.value.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
                        if values.is_empty() {
                            return Err(CliError::Config(format!("{origin}: sweep over {swept} has no values")));
                        }
                        target.1.push(Sweep { key: swept.to_string(), values, origin: origin.clone() });
                    } else {
                        target.0.push(pair);
                    }
                }
            }
        }

        let name = name
            .filter(|n| !n.is_empty())
            .ok_or_else(|| CliError::Config(format!("{source}: missing 'suite = <name>'")))?;
        if blocks.is_empty() {
            blocks.push(Block { name: String::new(), pairs: Vec::new(), sweeps: Vec::new() });
        }
        for b in &blocks {
            let mut seen = HashSet::new();
            for s in sweeps.iter().chain(&b.sweeps) {
                if !seen.insert(s.key.as_str()) {
                    return Err(CliError::Config(format!("{}: {} swept twice", s.origin, s.key)));
                }
            }
        }
        let output_path = out.unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
        let suite = Self { name, seeds: seeds.unwrap_or_else(|| (1..=10).collect()), output_path, pairs, sweeps, blocks, checks };
        // catch unknown keys and bad values now rather than mid-run
        suite.expand(&ExpandOptions::default())?;
        Ok(suite)
    }

    /// Every (configuration, seed) of the suite in output order.
    ///
    /// Key and value errors fail the whole suite. Cross-field consistency
    /// is not checked here; an infeasible point becomes an error row.
    pub fn expand(&self, opts: &ExpandOptions) -> CliResult<Vec<SimConfig>> {
        let overrides = opts.overrides.iter().map(|o| parse_pair(o, "override")).collect::<CliResult<Vec<_>>>()?;
        let seeds = opts.seeds.clone().unwrap_or_else(|| self.seeds.clone());
        if seeds.is_empty() {
            return Err(CliError::Config("seeds: empty seed list".into()));
        }
        let mut out = Vec::new();
        for block in &self.blocks {
            let sweeps: Vec<&Sweep> = self.sweeps.iter().chain(&block.sweeps).collect();
            let total: usize = sweeps.iter().map(|s| s.values.len()).product();
            for flat in 0..total {
                let mut pairs: Vec<Pair> = self.pairs.iter().chain(&block.pairs).cloned().collect();
                // mixed-radix digits of `flat`, last sweep fastest
                let mut rest = flat;
                let mut digits = vec![0; sweeps.len()];
                for (d, s) in sweeps.iter().enumerate().rev() {
                    digits[d] = rest % s.values.len();
                    rest /= s.values.len();
                }
                for (s, &k) in sweeps.iter().zip(&digits) {
                    pairs.push(Pair { key: s.key.clone(), value: s.values[k].clone(), origin: s.origin.clone() });
                }
                let mut cfg = SimConfig::default();
                apply_pairs(&mut cfg, &pairs)?;
                if opts.paper_scale {
                    cfg = cfg.with_paper_scale();
                }
                apply_pairs(&mut cfg, &overrides)?;
                for &seed in &seeds {
                    out.push(SimConfig { rng_seed: seed, ..cfg.clone() });
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dbtrain::Mode;

    const TEXT: &str = "suite = demo\nseeds = 3, 1\nT_c = 200\nsweep.snr_db = 0, 10\nsweep.beta = 0.001, 0.002\n";

    #[test]
    fn sweeps_expand_in_declared_order() {
        let s = ExperimentSuite::parse(TEXT, "t").unwrap();
        let cfgs = s.expand(&ExpandOptions::default()).unwrap();
        let got: Vec<(f64, f64, u64)> = cfgs.iter().map(|c| (c.snr_db, c.beta, c.rng_seed)).collect();
        assert_eq!(
            got,
            vec![
                (0.0, 0.001, 3),
                (0.0, 0.001, 1),
                (0.0, 0.002, 3),
                (0.0, 0.002, 1),
                (10.0, 0.001, 3),
                (10.0, 0.001, 1),
                (10.0, 0.002, 3),
                (10.0, 0.002, 1)
            ]
        );
        assert!(cfgs.iter().all(|c| c.t_c == 200));
        assert_eq!(s.output_path, PathBuf::from("demo.csv"));
    }

    #[test]
    fn options_override_suite_values() {
        let s = ExperimentSuite::parse(TEXT, "t").unwrap();
        let opts = ExpandOptions { paper_scale: true, seeds: Some(vec![7]), overrides: vec!["T_c=500".into()] };
        let cfgs = s.expand(&opts).unwrap();
        assert_eq!(cfgs.len(), 4);
        assert!(cfgs.iter().all(|c| c.t_c == 500 && c.rng_seed == 7 && c.n_b == 32 && c.total_symbols == 1_000_000));
    }

    #[test]
    fn blocks_run_in_sequence() {
        let text = "suite = b\nseeds = 1\nsweep.beta = 0.001, 0.002\n[conv]\nsweep.T_c = 500, 200\n[ded]\nmode = dedicated_dual\nsweep.T_d = 500, 200, 100\n";
        let cfgs = ExperimentSuite::parse(text, "t").unwrap().expand(&ExpandOptions::default()).unwrap();
        assert_eq!(cfgs.len(), 4 + 6);
        assert_eq!((cfgs[1].beta, cfgs[1].t_c), (0.001, 200));
        assert!(cfgs[4..].iter().all(|c| c.mode == Mode::DedicatedDual && c.n_d == 2));
        assert_eq!((cfgs[9].beta, cfgs[9].t_d), (0.002, 100));
    }

    #[test]
    fn bad_suites_are_rejected() {
        let err = |t: &str| ExperimentSuite::parse(t, "t").unwrap_err().to_string();
        assert!(err("T_c = 100\n").contains("missing"));
        assert!(err("suite = x\nwidth = 3\n").contains("width"));
        assert!(err("suite = x\nsweep.snr_db = 1, loud\n").contains("snr_db"));
        assert!(err("suite = x\nsweep.snr_db =\n").contains("no values"));
        assert!(err("suite = x\nsweep.beta = 1\nsweep.beta = 2\n").contains("twice"));
        assert!(err("suite = x\n[a]\n[a]\n").contains("twice"));
        assert!(err("suite = x\n[a]\nseeds = 1\n").contains("before the first block"));
        assert!(err("suite = x\nseeds = 2, 2\n").contains("twice"));
        assert!(err("suite = x\ncheck = speed < 3\n").contains("speed"));
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1-3, 7").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("3-1").is_err());
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn builtins_parse_and_are_unique() {
        let names = builtin_names();
        assert_eq!(names.iter().collect::<HashSet<_>>().len(), names.len());
        for n in names {
            let s = builtin(n).unwrap();
            assert_eq!(s.name, n);
            assert!(!s.expand(&ExpandOptions::default()).unwrap().is_empty());
        }
        assert!(ExperimentSuite::load("no_such_suite").is_err());
    }
}
