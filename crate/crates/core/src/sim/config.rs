use std::fmt;
use std::str::FromStr;

use crate::estimation::{PosteriorMode, PsiPenalty};
use crate::selection::DEFAULT_WINDOW;
use crate::training::ScheduleParams;
use crate::{Error, Result};

/// Symbol duration used to convert slot counts into air time.
pub const SYMBOL_DURATION_S: f64 = 4.46e-6;

/// Training protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Beam cycling every `T_c` symbols, nothing in between.
    #[default]
    ConventionalCycling,
    /// Cycling every `T_c`, plus two selected beams per path every `T_d`.
    DedicatedDual,
    /// Cycling every `T_c`, plus one beam per path every `T_d`.
    DedicatedSingle,
}

impl Mode {
    pub fn is_dedicated(self) -> bool {
        !matches!(self, Mode::ConventionalCycling)
    }

    /// Dedicated beams per path.
    pub fn beams_per_path(self) -> usize {
        match self {
            Mode::ConventionalCycling => 0,
            Mode::DedicatedDual => 2,
            Mode::DedicatedSingle => 1,
        }
    }
}

/// Channel estimator used at training bursts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    #[default]
    Omp,
    Map,
}

/// How often the AR gain recursion is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainUpdate {
    #[default]
    Symbol,
    /// Once every `gain_period` symbols, whatever the training schedule.
    Period,
}

/// Support prior of the MAP estimator at the first burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MapInit {
    /// Flat prior; the first burst is a plain greedy MAP pass.
    #[default]
    Uniform,
    /// OMP on the first burst, then transition-smoothed point masses.
    OmpPointMass,
}

macro_rules! named_enum {
    ($ty:ty, $what:literal, $($variant:path => $name:literal),+ $(,)?) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($name => Ok($variant),)+
                    other => Err(Error::Config(format!(
                        concat!("unknown ", $what, " '{}', expected one of: {}"),
                        other,
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }
    };
}

named_enum!(Mode, "mode", Mode::ConventionalCycling => "conventional", Mode::DedicatedDual => "dedicated_dual", Mode::DedicatedSingle => "dedicated_single");
named_enum!(Estimator, "estimator", Estimator::Omp => "omp", Estimator::Map => "map");
named_enum!(GainUpdate, "gain update", GainUpdate::Symbol => "symbol", GainUpdate::Period => "period");
named_enum!(MapInit, "MAP initialization", MapInit::Uniform => "uniform", MapInit::OmpPointMass => "omp");
named_enum!(PosteriorMode, "posterior mode", PosteriorMode::Joint => "joint", PosteriorMode::Factored => "factored");
named_enum!(PsiPenalty, "psi penalty", PsiPenalty::Verbatim => "verbatim", PsiPenalty::LogDet => "logdet");

/// Every scalar of one simulated link.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Base-station antennas `N_b`.
    pub n_b: usize,
    /// User antennas `N_m`.
    pub n_m: usize,
    /// AoD grid bins `M_b` (also the codebook size).
    pub m_b: usize,
    /// AoA grid bins `M_m`.
    pub m_m: usize,
    /// Number of paths `L`.
    pub num_paths: usize,
    /// Common cycling beams `N_c`.
    pub n_c: usize,
    /// Dedicated beams per path `N_d`; must match the mode.
    pub n_d: usize,
    /// Common period `T_c` in symbols.
    pub t_c: u64,
    /// Dedicated period `T_d` in symbols (dedicated modes only).
    pub t_d: u64,
    pub total_symbols: u64,
    pub snr_db: f64,
    /// Per-symbol angular diffusion in sine units.
    pub beta: f64,
    /// AR gain coefficient.
    pub rho: f64,
    /// Gain prior variance `lambda` of the MAP estimator.
    pub gain_prior_var: f64,
    pub mode: Mode,
    pub estimator: Estimator,
    /// Combine dedicated bursts with the true AoAs instead of the estimated ones.
    pub oracle_combiner: bool,
    pub rng_seed: u64,
    /// Keep true angles continuous instead of snapping them to the grid.
    pub off_grid: bool,
    /// Antenna spacing in wavelengths, both ends.
    pub element_spacing: f64,
    pub psi_penalty: PsiPenalty,
    pub gain_update: GainUpdate,
    /// Symbols between AR steps when `gain_update` is `period`.
    pub gain_period: u64,
    /// Exhaustive fallback window of the beam search.
    pub search_window: usize,
    pub posterior_mode: PosteriorMode,
    /// Uniform mass mixed into the MAP priors.
    pub prior_floor: f64,
    pub map_init: MapInit,
}

impl Default for SimConfig {
    /// Desk scale: 16 antennas, 64 bins, `10^5` symbols.
    fn default() -> Self {
        Self {
            n_b: 16,
            n_m: 16,
            m_b: 64,
            m_m: 64,
            num_paths: 3,
            n_c: 32,
            n_d: 0,
            t_c: 1000,
            t_d: 100,
            total_symbols: 100_000,
            snr_db: 15.0,
            beta: 0.002,
            rho: 0.999,
            gain_prior_var: 1.0,
            mode: Mode::ConventionalCycling,
            estimator: Estimator::Omp,
            oracle_combiner: false,
            rng_seed: 1,
            off_grid: false,
            element_spacing: 0.5,
            psi_penalty: PsiPenalty::Verbatim,
            gain_update: GainUpdate::Symbol,
            gain_period: 1000,
            search_window: DEFAULT_WINDOW,
            posterior_mode: PosteriorMode::Joint,
            prior_floor: 1e-6,
            map_init: MapInit::Uniform,
        }
    }
}

impl SimConfig {
    /// Desk-scale defaults for a mode, with `N_d` and the estimator set to
    /// match it.
    pub fn for_mode(mode: Mode) -> Self {
        let mut cfg = Self { mode, n_d: mode.beams_per_path(), ..Self::default() };
        if mode.is_dedicated() {
            cfg.estimator = Estimator::Map;
        }
        cfg
    }

    /// Full-size arrays and run length: 32 antennas, 128 bins, `10^6` symbols.
    pub fn with_paper_scale(mut self) -> Self {
        self.n_b = 32;
        self.n_m = 32;
        self.m_b = 128;
        self.m_m = 128;
        self.total_symbols = 1_000_000;
        self
    }

    pub fn noise_var(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }

    /// Slots taken by one dedicated burst.
    pub fn dedicated_burst_len(&self) -> u64 {
        (self.n_d * self.num_paths) as u64
    }

    pub fn schedule_params(&self) -> ScheduleParams {
        ScheduleParams {
            total_symbols: self.total_symbols,
            common_period: self.t_c,
            num_common_beams: self.n_c as u64,
            dedicated: self.mode.is_dedicated().then(|| (self.t_d, self.dedicated_burst_len())),
        }
    }

    /// Air time of the whole run.
    pub fn air_time_s(&self) -> f64 {
        self.total_symbols as f64 * SYMBOL_DURATION_S
    }

    /// Every key accepted by [`SimConfig::set`].
    pub const KEYS: &'static [&'static str] = &[
        "N_b",
        "N_m",
        "M_b",
        "M_m",
        "L",
        "N_c",
        "N_d",
        "T_c",
        "T_d",
        "total_symbols",
        "snr_db",
        "beta",
        "rho",
        "gain_prior_var",
        "mode",
        "estimator",
        "oracle_combiner",
        "rng_seed",
        "off_grid",
        "element_spacing",
        "psi_penalty",
        "gain_update",
        "gain_period",
        "search_window",
        "posterior_mode",
        "prior_floor",
        "map_init",
    ];

    /// Set one field from its textual key and value.
    ///
    /// Setting `mode` also resets `N_d` to the mode's beam count and, for
    /// dedicated modes, switches the estimator to MAP; explicit `N_d` or
    /// `estimator` values given afterwards still win. Does not validate
    /// cross-field consistency.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str, what: &str) -> Result<T> {
            value.trim().parse().map_err(|_| Error::Config(format!("{key}: expected {what}, got '{}'", value.trim())))
        }
        fn named<T: FromStr<Err = Error>>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|e: Error| match e {
                Error::Config(msg) => Error::Config(format!("{key}: {msg}")),
                other => other,
            })
        }
        let int = "a non-negative integer";
        let real = "a number";
        match key.trim() {
            "N_b" => self.n_b = parse(key, value, int)?,
            "N_m" => self.n_m = parse(key, value, int)?,
            "M_b" => self.m_b = parse(key, value, int)?,
            "M_m" => self.m_m = parse(key, value, int)?,
            "L" => self.num_paths = parse(key, value, int)?,
            "N_c" => self.n_c = parse(key, value, int)?,
            "N_d" => self.n_d = parse(key, value, int)?,
            "T_c" => self.t_c = parse(key, value, int)?,
            "T_d" => self.t_d = parse(key, value, int)?,
            "total_symbols" => self.total_symbols = parse(key, value, int)?,
            "snr_db" => self.snr_db = parse(key, value, real)?,
            "beta" => self.beta = parse(key, value, real)?,
            "rho" => self.rho = parse(key, value, real)?,
            "gain_prior_var" => self.gain_prior_var = parse(key, value, real)?,
            "mode" => {
                let mode: Mode = named(key, value)?;
                self.mode = mode;
                self.n_d = mode.beams_per_path();
                if mode.is_dedicated() {
                    self.estimator = Estimator::Map;
                }
            }
            "estimator" => self.estimator = named(key, value)?,
            "oracle_combiner" => self.oracle_combiner = parse(key, value, "true or false")?,
            "rng_seed" => self.rng_seed = parse(key, value, int)?,
            "off_grid" => self.off_grid = parse(key, value, "true or false")?,
            "element_spacing" => self.element_spacing = parse(key, value, real)?,
            "psi_penalty" => self.psi_penalty = named(key, value)?,
            "gain_update" => self.gain_update = named(key, value)?,
            "gain_period" => self.gain_period = parse(key, value, int)?,
            "search_window" => self.search_window = parse(key, value, int)?,
            "posterior_mode" => self.posterior_mode = named(key, value)?,
            "prior_floor" => self.prior_floor = parse(key, value, real)?,
            "map_init" => self.map_init = named(key, value)?,
            other => return Err(Error::Config(format!("{other}: unknown key"))),
        }
        Ok(())
    }

    /// Textual value of a key, the inverse of [`SimConfig::set`].
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "N_b" => self.n_b.to_string(),
            "N_m" => self.n_m.to_string(),
            "M_b" => self.m_b.to_string(),
            "M_m" => self.m_m.to_string(),
            "L" => self.num_paths.to_string(),
            "N_c" => self.n_c.to_string(),
            "N_d" => self.n_d.to_string(),
            "T_c" => self.t_c.to_string(),
            "T_d" => self.t_d.to_string(),
            "total_symbols" => self.total_symbols.to_string(),
            "snr_db" => self.snr_db.to_string(),
            "beta" => self.beta.to_string(),
            "rho" => self.rho.to_string(),
            "gain_prior_var" => self.gain_prior_var.to_string(),
            "mode" => self.mode.to_string(),
            "estimator" => self.estimator.to_string(),
            "oracle_combiner" => self.oracle_combiner.to_string(),
            "rng_seed" => self.rng_seed.to_string(),
            "off_grid" => self.off_grid.to_string(),
            "element_spacing" => self.element_spacing.to_string(),
            "psi_penalty" => self.psi_penalty.to_string(),
            "gain_update" => self.gain_update.to_string(),
            "gain_period" => self.gain_period.to_string(),
            "search_window" => self.search_window.to_string(),
            "posterior_mode" => self.posterior_mode.to_string(),
            "prior_floor" => self.prior_floor.to_string(),
            "map_init" => self.map_init.to_string(),
            _ => return None,
        })
    }

    /// Check ranges and cross-field consistency. Messages name the key.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::Config(format!("{key}: {msg}")));
        for (key, v) in [("N_b", self.n_b), ("N_m", self.n_m), ("L", self.num_paths), ("N_c", self.n_c)] {
            if v == 0 {
                return bad(key, "must be positive".into());
            }
        }
        for (key, v) in [("M_b", self.m_b), ("M_m", self.m_m)] {
            if v < 2 {
                return bad(key, format!("needs at least 2 bins, got {v}"));
            }
        }
        if self.num_paths > self.m_b * self.m_m {
            return bad("L", "more paths than grid cells".into());
        }
        if self.t_c == 0 {
            return bad("T_c", "must be positive".into());
        }
        if self.gain_period == 0 {
            return bad("gain_period", "must be positive".into());
        }
        if self.total_symbols == 0 {
            return bad("total_symbols", "must be positive".into());
        }
        if self.n_c as u64 > self.t_c {
            return bad("N_c", format!("N_c exceeds T_c ({} > {})", self.n_c, self.t_c));
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db", "must be finite".into());
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta", format!("must be >= 0, got {}", self.beta));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return bad("rho", format!("must lie in [0, 1], got {}", self.rho));
        }
        if !(self.gain_prior_var > 0.0 && self.gain_prior_var.is_finite()) {
            return bad("gain_prior_var", "must be positive".into());
        }
        if !(self.element_spacing > 0.0 && self.element_spacing.is_finite()) {
            return bad("element_spacing", "must be positive".into());
        }
        if !(0.0..1.0).contains(&self.prior_floor) {
            return bad("prior_floor", "must lie in [0, 1)".into());
        }
        if self.search_window < 2 {
            return bad("search_window", "must cover at least two beams".into());
        }
        if self.n_d != self.mode.beams_per_path() {
            return bad("N_d", format!("mode {} uses N_d = {}, got {}", self.mode, self.mode.beams_per_path(), self.n_d));
        }
        if self.mode.is_dedicated() {
            if self.estimator != Estimator::Map {
                return bad("estimator", format!("mode {} needs the map estimator", self.mode));
            }
            if self.t_d == 0 {
                return bad("T_d", "must be positive".into());
            }
            if self.dedicated_burst_len() > self.t_d {
                return bad("N_d", format!("N_d exceeds T_d ({} slots > {})", self.dedicated_burst_len(), self.t_d));
            }
            if self.t_d >= self.t_c {
                return bad("T_d", format!("must be shorter than T_c ({} >= {})", self.t_d, self.t_c));
            }
        }
        Ok(())
    }
}
