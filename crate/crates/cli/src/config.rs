//! Flat `key = value` configuration.
//!
//! One pair per line; blank lines and `#` comments are ignored. Keys are the
//! names accepted by [`SimConfig::set`]. `mode` is applied before every other
//! key, so the file order of `mode` and `N_d` does not matter.

use std::path::Path;

use dbtrain::SimConfig;

use crate::error::{CliError, CliResult};

/// A `key = value` pair with the place it came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pair {
    pub key: String,
    pub value: String,
    pub origin: String,
}

/// Split one `key=value` token.
pub fn parse_pair(token: &str, origin: &str) -> CliResult<Pair> {
    let (key, value) = token
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("{origin}: expected key=value, got '{}'", token.trim())))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("{origin}: empty key in '{}'", token.trim())));
    }
    Ok(Pair { key: key.to_string(), value: value.trim().to_string(), origin: origin.to_string() })
}

/// Pairs of a config text. `name` labels error messages.
pub fn parse_pairs(text: &str, name: &str) -> CliResult<Vec<Pair>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        pairs.push(parse_pair(line, &format!("{name}:{}", i + 1))?);
    }
    Ok(pairs)
}

/// Apply pairs to `cfg`, `mode` first. Errors name the key and its origin.
pub fn apply_pairs(cfg: &mut SimConfig, pairs: &[Pair]) -> CliResult<()> {
    let (modes, rest): (Vec<&Pair>, Vec<&Pair>) = pairs.iter().partition(|p| p.key == "mode");
    for p in modes.into_iter().chain(rest) {
        cfg.set(&p.key, &p.value).map_err(|e| match e {
            dbtrain::Error::Config(msg) => CliError::Config(format!("{}: {msg}", p.origin)),
            other => CliError::Config(format!("{}: {other}", p.origin)),
        })?;
    }
    Ok(())
}

/// Defaults, then the optional file, then command-line overrides, then
/// validation.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> CliResult<SimConfig> {
    let mut pairs = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_pairs(&text, &p.display().to_string())?
        }
        None => Vec::new(),
    };
    for o in overrides {
        pairs.push(parse_pair(o, "override")?);
    }
    let mut cfg = SimConfig::default();
    apply_pairs(&mut cfg, &pairs)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dbtrain::Mode;

    #[test]
    fn empty_config_is_all_defaults() {
        assert_eq!(parse_config(None, &[]).unwrap(), SimConfig::default());
    }

    #[test]
    fn one_override_changes_one_field() {
        let cfg = parse_config(None, &["snr_db=15".into()]).unwrap();
        assert_eq!(cfg, SimConfig { snr_db: 15.0, ..SimConfig::default() });
        let cfg = parse_config(None, &["snr_db = 3".into()]).unwrap();
        assert_eq!(cfg, SimConfig { snr_db: 3.0, ..SimConfig::default() });
    }

    #[test]
    fn infeasible_combination_names_the_key() {
        let err = parse_config(None, &["N_c=64".into(), "T_c=32".into()]).unwrap_err();
        assert!(err.to_string().contains("N_c exceeds T_c"), "{err}");
    }

    #[test]
    fn unknown_and_malformed_keys_are_rejected() {
        let err = parse_config(None, &["snr=3".into()]).unwrap_err().to_string();
        assert!(err.contains("snr: unknown key"), "{err}");
        let err = parse_config(None, &["T_c=often".into()]).unwrap_err().to_string();
        assert!(err.contains("T_c"), "{err}");
        assert!(parse_config(None, &["snr_db".into()]).is_err());
        assert!(parse_config(None, &["=3".into()]).is_err());
    }

    #[test]
    fn mode_is_applied_first() {
        let text = "N_d = 2\nT_d = 200\nmode = dedicated_dual\n";
        let mut cfg = SimConfig::default();
        apply_pairs(&mut cfg, &parse_pairs(text, "t").unwrap()).unwrap();
        assert_eq!(cfg, SimConfig { t_d: 200, ..SimConfig::for_mode(Mode::DedicatedDual) });
    }

    #[test]
    fn comments_and_blank_lines() {
        let pairs = parse_pairs("# header\n\nbeta = 0.001  # slow\n", "f").unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!((pairs[0].key.as_str(), pairs[0].value.as_str(), pairs[0].origin.as_str()), ("beta", "0.001", "f:3"));
    }

    #[test]
    fn file_errors_carry_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("link.cfg");
        std::fs::write(&path, "snr_db = 10\nwidth = 3\n").unwrap();
        let err = parse_config(Some(&path), &[]).unwrap_err().to_string();
        assert!(err.contains("link.cfg:2") && err.contains("width"), "{err}");
        assert!(parse_config(Some(&dir.path().join("missing.cfg")), &[]).is_err());
    }
}
