use std::f64::consts::PI;

use super::posterior::{posterior_predict, JointTransition, PathPosterior, PosteriorMode, SupportPosterior};
use super::{regularized_solve, ChannelEstimate};
use crate::{CMatrix, CVector, Error, Result, SensingOperator};

/// Form of the support-penalty term in the candidate score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsiPenalty {
    /// `pi * sigma^2 / (||phi||^2 + sigma^2 / lambda)`.
    #[default]
    Verbatim,
    /// `ln(pi * sigma^2 / (||phi||^2 + sigma^2 / lambda))`, the log-determinant
    /// of the conditional gain covariance.
    LogDet,
}

/// Everything the greedy MAP estimator carries between training periods.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    /// Prior over each path's support for the coming measurement.
    pub posterior: SupportPosterior,
    /// Gain prior variance `lambda`.
    pub gain_prior_var: f64,
    pub noise_var: f64,
    /// Kernels used to predict the posterior to the next training period.
    pub transition: JointTransition,
    pub penalty: PsiPenalty,
    /// Weight of a uniform component mixed into the prior before scoring,
    /// so a path whose prior has collapsed onto a wrong bin can be reacquired.
    pub prior_floor: f64,
}

impl EstimatorState {
    pub fn new(posterior: SupportPosterior, gain_prior_var: f64, noise_var: f64, transition: JointTransition) -> Result<Self> {
        let state = Self { posterior, gain_prior_var, noise_var, transition, penalty: PsiPenalty::Verbatim, prior_floor: 0.0 };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain_prior_var > 0.0 && self.gain_prior_var.is_finite()) {
            return Err(Error::InvalidState(format!("gain prior variance must be positive, got {}", self.gain_prior_var)));
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return Err(Error::InvalidState(format!("noise variance must be positive, got {}", self.noise_var)));
        }
        if !(0.0..1.0).contains(&self.prior_floor) {
            return Err(Error::InvalidState(format!("prior floor must lie in [0, 1), got {}", self.prior_floor)));
        }
        let (mb, mm) = (self.posterior.aod_bins, self.posterior.aoa_bins);
        if self.transition.aod.shape() != (mb, mb) || self.transition.aoa.shape() != (mm, mm) {
            return Err(Error::Dimension("transition kernels do not match the posterior grid".into()));
        }
        self.posterior.validate(1e-9)
    }

    /// Prior for the first dedicated period: point masses at an initial
    /// support estimate, smoothed by the transition kernels.
    pub fn from_support(
        support: &[usize],
        aod_bins: usize,
        aoa_bins: usize,
        mode: PosteriorMode,
        gain_prior_var: f64,
        noise_var: f64,
        transition: JointTransition,
    ) -> Result<Self> {
        let point = SupportPosterior::point_masses(support, aod_bins, aoa_bins, mode);
        let smoothed = posterior_predict(&point, &transition);
        Self::new(smoothed, gain_prior_var, noise_var, transition)
    }

    fn ridge(&self) -> f64 {
        self.noise_var / self.gain_prior_var
    }

    fn log_prior(&self, l: usize) -> Vec<f64> {
        let mut lp = self.posterior.log_probs(l);
        if self.prior_floor > 0.0 {
            let eps = self.prior_floor;
            let u = eps / lp.len() as f64;
            for v in lp.iter_mut() {
                *v = ((1.0 - eps) * v.exp() + u).ln();
            }
        }
        lp
    }
}

/// Gaussian gain posterior for a fixed support:
/// `g = (Phi_S^H Phi_S + (sigma^2/lambda) I)^-1 Phi_S^H y` and
/// `P = sigma^2 (Phi_S^H Phi_S + (sigma^2/lambda) I)^-1`.
pub fn gain_posterior<S: SensingOperator + ?Sized>(
    y: &CVector,
    phi: &S,
    support: &[usize],
    gain_prior_var: f64,
    noise_var: f64,
) -> Result<(CVector, CMatrix)> {
    if support.is_empty() {
        return Err(Error::InvalidState("gain posterior needs a nonempty support".into()));
    }
    let phi_s = phi.submatrix(support);
    let k = support.len();
    let ridge = noise_var / gain_prior_var;
    let gram = phi_s.ad_mul(&phi_s) + CMatrix::identity(k, k) * crate::C64::new(ridge, 0.0);
    let inv = gram
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::InvalidState("ridge Gram matrix is not positive definite".into()))?;
    let mean = &inv * phi_s.ad_mul(y);
    Ok((mean, inv * crate::C64::new(noise_var, 0.0)))
}

/// Data and log-determinant part shared by the candidate score and the
/// posterior refresh: `-ln(pi (sigma^2 + lambda n)) + |c|^2 / (sigma^2 (n + sigma^2/lambda))`.
fn evidence(corr_sq: f64, norm_sq: f64, lambda: f64, noise_var: f64) -> f64 {
    if norm_sq <= 0.0 {
        return f64::NEG_INFINITY;
    }
    -(PI * (noise_var + lambda * norm_sq)).ln() + corr_sq / (noise_var * (norm_sq + noise_var / lambda))
}

fn penalty(kind: PsiPenalty, norm_sq: f64, lambda: f64, noise_var: f64) -> f64 {
    let v = PI * noise_var / (norm_sq + noise_var / lambda);
    match kind {
        PsiPenalty::Verbatim => v,
        PsiPenalty::LogDet => v.ln(),
    }
}

/// Score of a single support candidate with column norm `||phi_w||^2`,
/// correlation `phi_w^H r` and predicted prior `ln Pr(w)`. Zero-norm columns
/// score `-inf`.
pub fn psi_score(
    corr: crate::C64,
    norm_sq: f64,
    log_prior: f64,
    gain_prior_var: f64,
    noise_var: f64,
    kind: PsiPenalty,
) -> f64 {
    if norm_sq <= 0.0 {
        return f64::NEG_INFINITY;
    }
    evidence(corr.norm_sqr(), norm_sq, gain_prior_var, noise_var) + log_prior
        - penalty(kind, norm_sq, gain_prior_var, noise_var)
}

/// Result of one greedy MAP pass, before prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct MapUpdate {
    pub estimate: ChannelEstimate,
    /// Filtered support posteriors after this period's measurement.
    pub posterior: SupportPosterior,
    /// Path slot each support entry was assigned to, in selection order.
    pub slots: Vec<usize>,
}

/// One greedy MAP pass over `y`.
///
/// Each iteration scores every (unassigned path, bin not yet chosen) pair
/// and takes the best; ties go to the lowest path, then the lowest bin. The
/// chosen path's posterior is refreshed from the pre-refit residual and its
/// predicted prior, the gains over the accumulated support are refit with
/// ridge `sigma^2/lambda`, and the residual is updated.
pub fn greedy_map_update<S: SensingOperator + ?Sized>(y: &CVector, phi: &S, state: &EstimatorState) -> MapUpdate {
    assert_eq!(y.len(), phi.nrows(), "measurement length must match Phi rows");
    let num_bins = state.posterior.num_bins();
    assert_eq!(num_bins, phi.ncols(), "posterior grid must match Phi columns");
    let (lambda, sigma2) = (state.gain_prior_var, state.noise_var);
    let num_paths = state.posterior.num_paths().min(num_bins);
    let norms = phi.column_norms_sq();
    let log_priors: Vec<Vec<f64>> = (0..num_paths).map(|l| state.log_prior(l)).collect();
    let pen: Vec<f64> = norms.iter().map(|&n| penalty(state.penalty, n, lambda, sigma2)).collect();

    let mut est = ChannelEstimate::empty();
    let mut slots = Vec::with_capacity(num_paths);
    let mut filtered = state.posterior.clone();
    let mut residual = y.clone();
    est.residual_norms.push(residual.norm());

    for _ in 0..num_paths {
        let corr = phi.adjoint_apply(&residual);
        let ev: Vec<f64> = corr.iter().zip(&norms).map(|(c, &n)| evidence(c.norm_sqr(), n, lambda, sigma2)).collect();

        let mut best: Option<(usize, usize, f64)> = None;
        for (l, lp) in log_priors.iter().enumerate() {
            if slots.contains(&l) {
                continue;
            }
            for w in 0..num_bins {
                if est.support.contains(&w) {
                    continue;
                }
                let s = ev[w] + lp[w] - pen[w];
                if s.is_nan() || s == f64::NEG_INFINITY {
                    continue;
                }
                if best.is_none_or(|(_, _, b)| s > b) {
                    best = Some((l, w, s));
                }
            }
        }
        // every remaining candidate scored -inf: fall back to the data term
        let (slot, pick) = match best {
            Some((l, w, _)) => (l, w),
            None => {
                let l = (0..num_paths).find(|l| !slots.contains(l)).unwrap_or(0);
                let w = super::argmax_excluding(&ev, &est.support)
                    .or_else(|| (0..num_bins).find(|w| !est.support.contains(w)))
                    .unwrap_or(0);
                (l, w)
            }
        };

        // posterior refresh for the chosen path
        let mut logpost: Vec<f64> = ev.iter().zip(&log_priors[slot]).map(|(e, p)| e + p).collect();
        for &w in &est.support {
            logpost[w] = f64::NEG_INFINITY;
        }
        filtered.paths[slot] = normalize_log(&logpost, pick, state.posterior.aod_bins, state.posterior.aoa_bins, state.posterior.mode());

        slots.push(slot);
        est.support.push(pick);
        let phi_s = phi.submatrix(&est.support);
        let (gains, jittered) = regularized_solve(&phi_s, y, state.ridge());
        est.ill_conditioned |= jittered;
        residual = y - &phi_s * &gains;
        est.gains = gains;
        est.residual_norms.push(residual.norm());
    }

    MapUpdate { estimate: est, posterior: filtered, slots }
}

/// Log-sum-exp normalization into the requested storage. An all `-inf`
/// input collapses onto `fallback`.
fn normalize_log(logp: &[f64], fallback: usize, aod_bins: usize, aoa_bins: usize, mode: PosteriorMode) -> PathPosterior {
    let mx = logp.iter().copied().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = if mx.is_finite() {
        logp.iter().map(|&v| if v.is_nan() { 0.0 } else { (v - mx).exp() }).collect()
    } else {
        let mut p = vec![0.0; logp.len()];
        p[fallback] = 1.0;
        p
    };
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= s);
    match mode {
        PosteriorMode::Joint => PathPosterior::Joint(p),
        PosteriorMode::Factored => {
            let mut aod = vec![0.0; aod_bins];
            let mut aoa = vec![0.0; aoa_bins];
            for (k, &v) in p.iter().enumerate() {
                aod[k / aoa_bins] += v;
                aoa[k % aoa_bins] += v;
            }
            PathPosterior::Factored { aod, aoa }
        }
    }
}

/// Greedy MAP estimate for this period, returning the state whose posterior
/// is predicted one step ahead through `state.transition`.
pub fn greedy_map_estimate<S: SensingOperator + ?Sized>(
    y: &CVector,
    phi: &S,
    state: &EstimatorState,
) -> (ChannelEstimate, EstimatorState) {
    let up = greedy_map_update(y, phi, state);
    let mut next = state.clone();
    next.posterior = posterior_predict(&up.posterior, &state.transition);
    (up.estimate, next)
}
