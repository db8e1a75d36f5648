//! Sparse channel estimation on the virtual grid.
//!
//! Flat support indices address `vec(H^(v))`: index `j * M_m + i` is AoA bin
//! `i`, AoD bin `j`.

mod map;
mod omp;
mod posterior;

pub use map::{gain_posterior, greedy_map_estimate, greedy_map_update, psi_score, EstimatorState, MapUpdate, PsiPenalty};
pub use omp::omp_estimate;
pub use posterior::{posterior_predict, JointTransition, PathPosterior, PosteriorMode, SupportPosterior};

use crate::array::VirtualChannel;
use crate::{CMatrix, CVector, C64};

/// Jitter added to singular normal equations.
pub const SINGULAR_JITTER: f64 = 1e-12;

/// Recovered support and gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// Flat indices into `vec(H^(v))`, in selection order.
    pub support: Vec<usize>,
    pub gains: CVector,
    /// Residual norm before the first and after every iteration.
    pub residual_norms: Vec<f64>,
    /// Set when a refit needed [`SINGULAR_JITTER`].
    pub ill_conditioned: bool,
}

impl ChannelEstimate {
    pub fn empty() -> Self {
        Self { support: Vec::new(), gains: CVector::zeros(0), residual_norms: Vec::new(), ill_conditioned: false }
    }

    /// `(aod_bin, aoa_bin)` of every support entry.
    pub fn bins(&self, aoa_bins: usize) -> Vec<(usize, usize)> {
        self.support.iter().map(|&s| (s / aoa_bins, s % aoa_bins)).collect()
    }

    pub fn to_virtual(&self, aod_bins: usize, aoa_bins: usize) -> VirtualChannel {
        let entries = self
            .support
            .iter()
            .zip(self.gains.iter())
            .map(|(&s, &g)| (s % aoa_bins, s / aoa_bins, g))
            .collect();
        VirtualChannel { rows: aoa_bins, cols: aod_bins, entries }
    }
}

/// `A_m H^(v) A_b^H` for an estimate, with `A_b`, `A_m` the grid dictionaries.
pub fn estimate_to_dense(est: &ChannelEstimate, a_b: &CMatrix, a_m: &CMatrix) -> CMatrix {
    let m_m = a_m.ncols();
    let mut h = CMatrix::zeros(a_m.nrows(), a_b.nrows());
    for (&s, &g) in est.support.iter().zip(est.gains.iter()) {
        let (j, i) = (s / m_m, s % m_m);
        h += (a_m.column(i) * a_b.column(j).adjoint()) * g;
    }
    h
}

/// Solve `(Phi_S^H Phi_S + ridge I) x = Phi_S^H y`. Returns the solution and
/// whether jitter was needed.
pub(crate) fn regularized_solve(phi_s: &CMatrix, y: &CVector, ridge: f64) -> (CVector, bool) {
    let k = phi_s.ncols();
    let gram = phi_s.ad_mul(phi_s) + CMatrix::identity(k, k) * C64::new(ridge, 0.0);
    let rhs = phi_s.ad_mul(y);
    if let Some(ch) = gram.clone().cholesky() {
        let x = ch.solve(&rhs);
        if x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return (x, false);
        }
    }
    let scale = (0..k).map(|i| gram[(i, i)].re).fold(1.0, f64::max);
    let jittered = gram + CMatrix::identity(k, k) * C64::new(SINGULAR_JITTER * scale, 0.0);
    let x = match jittered.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => jittered.lu().solve(&rhs).unwrap_or_else(|| CVector::zeros(k)),
    };
    (x, true)
}

/// `argmax` with lowest-index tie-break, skipping `-inf`/NaN and excluded entries.
pub(crate) fn argmax_excluding(scores: &[f64], excluded: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s.is_nan() || s == f64::NEG_INFINITY || excluded.contains(&i) {
            continue;
        }
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}
