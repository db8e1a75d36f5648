use crate::training::FrameSchedule;
use crate::{CMatrix, SlotKind};

/// `||H - H_hat||_F^2 / ||H||_F^2`, or `None` for an all-zero true channel.
pub fn nmse(h_true: &CMatrix, h_hat: &CMatrix) -> Option<f64> {
    assert_eq!(h_true.shape(), h_hat.shape(), "channel shapes differ");
    let denom = h_true.norm_squared();
    (denom > 0.0).then(|| (h_true - h_hat).norm_squared() / denom)
}

/// Fraction of slots spent on training.
pub fn overhead(schedule: &FrameSchedule) -> f64 {
    schedule.training_slots() as f64 / schedule.total_symbols() as f64
}

/// What happened at one training burst.
#[derive(Debug, Clone, PartialEq)]
pub struct BurstRecord {
    pub start: u64,
    pub kind: SlotKind,
    /// `None` when the true channel was zero.
    pub nmse: Option<f64>,
    /// Codebook indices of dedicated beams; empty for cycling bursts.
    pub beams: Vec<usize>,
    /// Mean support-posterior entropy (nats) after the burst, MAP only.
    pub posterior_entropy: Option<f64>,
}

/// Outcome of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub ber: f64,
    /// Mean over bursts with a nonzero true channel.
    pub nmse: f64,
    pub overhead: f64,
    pub bit_errors: u64,
    /// Data symbols, one bit each.
    pub data_bits: u64,
    pub training_symbols: u64,
    pub total_symbols: u64,
    pub bursts: Vec<BurstRecord>,
    /// Bursts whose estimate was zero, so the precoder fell back to fixed vectors.
    pub degraded_precoders: u64,
    /// Bursts whose refit needed jitter.
    pub ill_conditioned: u64,
}

impl MetricsReport {
    /// NMSE averaged over bursts of one kind.
    pub fn mean_nmse(&self, kind: SlotKind) -> Option<f64> {
        let v: Vec<f64> = self.bursts.iter().filter(|b| b.kind == kind).filter_map(|b| b.nmse).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}
