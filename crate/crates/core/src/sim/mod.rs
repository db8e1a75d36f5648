//! Link-level Monte Carlo: configuration, data transmission, metrics and the
//! scenario driver.

mod config;
mod link;
mod metrics;
mod scenario;

pub use config::{Estimator, GainUpdate, MapInit, Mode, SimConfig, SYMBOL_DURATION_S};
pub use link::{bpsk_symbol_error, effective_gain, svd_precoder, transmit_data_block, Precoder};
pub use metrics::{nmse, overhead, BurstRecord, MetricsReport};
pub use scenario::{run_scenario, TruthChannel};
