use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::{Estimator, GainUpdate, MapInit, Mode, SimConfig};
use super::link::{bpsk_symbol_error, svd_precoder, Precoder};
use super::metrics::{nmse, overhead, BurstRecord, MetricsReport};
use crate::array::{complex_normal, dictionary_matrix, evolve_gain, steering_unchecked};
use crate::estimation::{
    estimate_to_dense, greedy_map_update, omp_estimate, posterior_predict, EstimatorState, JointTransition, SupportPosterior,
};
use crate::selection::{select_center_beam, select_multipath_beams, CostTable};
use crate::training::{cycling_beams, dft_combiner, schedule_frames, simulate_measurement};
use crate::{
    sim_rng, AngleGrid, ArrayGeometry, BeamCodebook, CMatrix, KroneckerSensing, MobilityModel, Result, SimRng,
    SlotKind, C64,
};

/// Random streams of one run. Keeping them apart means runs that share a
/// seed see the same channel trajectory and the same data noise, whatever
/// their training configuration.
const CHANNEL_STREAM: u64 = 0;
const TRAINING_STREAM: u64 = 1;
const DATA_STREAM: u64 = 2;

/// Ground truth: latent continuous angles following a reflected Gaussian
/// walk, AR gains.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthChannel {
    pub aod: Vec<f64>,
    pub aoa: Vec<f64>,
    pub gains: Vec<C64>,
    grid_b: AngleGrid,
    grid_m: AngleGrid,
    off_grid: bool,
}

fn reflect(mut x: f64) -> f64 {
    loop {
        if x > 1.0 {
            x = 2.0 - x;
        } else if x < -1.0 {
            x = -2.0 - x;
        } else {
            return x;
        }
    }
}

impl TruthChannel {
    /// Uniform angles and CN(0, 1) gains.
    pub fn random<R: Rng + ?Sized>(num_paths: usize, grid_b: AngleGrid, grid_m: AngleGrid, off_grid: bool, rng: &mut R) -> Self {
        let mut aod = Vec::with_capacity(num_paths);
        let mut aoa = Vec::with_capacity(num_paths);
        let mut gains = Vec::with_capacity(num_paths);
        for _ in 0..num_paths {
            aod.push(rng.random_range(-1.0..1.0));
            aoa.push(rng.random_range(-1.0..1.0));
            gains.push(complex_normal(rng, 1.0));
        }
        Self { aod, aoa, gains, grid_b, grid_m, off_grid }
    }

    pub fn num_paths(&self) -> usize {
        self.gains.len()
    }

    /// Angles seen by the arrays: latent values off-grid, nearest bins otherwise.
    pub fn effective_aod(&self, l: usize) -> f64 {
        if self.off_grid {
            self.aod[l]
        } else {
            self.grid_b.angle(self.grid_b.nearest_bin(self.aod[l]))
        }
    }

    pub fn effective_aoa(&self, l: usize) -> f64 {
        if self.off_grid {
            self.aoa[l]
        } else {
            self.grid_m.angle(self.grid_m.nearest_bin(self.aoa[l]))
        }
    }

    /// `sum_l alpha_l a_m(aoa_l) a_b(aod_l)^H`.
    pub fn dense(&self, geom_b: &ArrayGeometry, geom_m: &ArrayGeometry) -> CMatrix {
        let mut h = CMatrix::zeros(geom_m.num_elements, geom_b.num_elements);
        for l in 0..self.num_paths() {
            let am = steering_unchecked(geom_m, self.effective_aoa(l));
            let ab = steering_unchecked(geom_b, self.effective_aod(l));
            h += am * ab.adjoint() * self.gains[l];
        }
        h
    }

    /// Advance one symbol: angle increments `N(0, beta^2 / 2)`, then
    /// (when `rho` is given) one AR gain step. Always draws the angle
    /// increments so the stream layout does not depend on `beta`.
    pub fn step<R: Rng + ?Sized>(&mut self, beta: f64, rho: Option<f64>, rng: &mut R) {
        let sd = beta / std::f64::consts::SQRT_2;
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        for l in 0..self.num_paths() {
            let (db, dm): (f64, f64) = (normal.sample(rng), normal.sample(rng));
            self.aod[l] = reflect(self.aod[l] + sd * db);
            self.aoa[l] = reflect(self.aoa[l] + sd * dm);
            if let Some(rho) = rho {
                self.gains[l] = evolve_gain(self.gains[l], rho, rng);
            }
        }
    }
}

/// Effective gain `u^H H_n v` for the current precoder, with per-bin
/// projections cached when the truth is on the grid.
struct DataLink {
    precoder: Precoder,
    rx_proj: Vec<C64>,
    tx_proj: Vec<C64>,
}

impl DataLink {
    fn new(precoder: Precoder, a_b: &CMatrix, a_m: &CMatrix, off_grid: bool) -> Self {
        let (rx_proj, tx_proj) = if off_grid {
            (Vec::new(), Vec::new())
        } else {
            let rx = a_m.ad_mul(&precoder.rx).iter().map(|c| c.conj()).collect();
            let tx = a_b.ad_mul(&precoder.tx).iter().copied().collect();
            (rx, tx)
        };
        Self { precoder, rx_proj, tx_proj }
    }

    fn gain(&self, truth: &TruthChannel, geom_b: &ArrayGeometry, geom_m: &ArrayGeometry) -> C64 {
        let mut e = C64::new(0.0, 0.0);
        for l in 0..truth.num_paths() {
            let (rx, tx) = if truth.off_grid {
                let am = steering_unchecked(geom_m, truth.aoa[l]);
                let ab = steering_unchecked(geom_b, truth.aod[l]);
                (self.precoder.rx.dotc(&am), ab.dotc(&self.precoder.tx))
            } else {
                (
                    self.rx_proj[truth.grid_m.nearest_bin(truth.aoa[l])],
                    self.tx_proj[truth.grid_b.nearest_bin(truth.aod[l])],
                )
            };
            e += truth.gains[l] * rx * tx;
        }
        e
    }
}

struct Setup {
    grid_b: AngleGrid,
    grid_m: AngleGrid,
    a_b: CMatrix,
    a_m: CMatrix,
    mobility: MobilityModel,
    transitions: HashMap<u64, JointTransition>,
}

impl Setup {
    fn transition(&mut self, gap: u64) -> JointTransition {
        let (m, gb, gm) = (self.mobility, self.grid_b, self.grid_m);
        self.transitions.entry(gap).or_insert_with(|| JointTransition::for_interval(&m, gap, &gb, &gm)).clone()
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Run one link for `cfg.total_symbols` symbols.
///
/// Training bursts see the channel frozen at their first slot; the truth
/// itself keeps evolving every symbol. Data slots carry BPSK through the
/// current precoder, which is refreshed at every burst.
pub fn run_scenario(cfg: &SimConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    let schedule = schedule_frames(&cfg.schedule_params())?;
    let geom_b = ArrayGeometry::new(cfg.n_b, cfg.element_spacing)?;
    let geom_m = ArrayGeometry::new(cfg.n_m, cfg.element_spacing)?;
    let grid_b = AngleGrid::new(cfg.m_b)?;
    let grid_m = AngleGrid::new(cfg.m_m)?;
    let mut setup = Setup {
        grid_b,
        grid_m,
        a_b: dictionary_matrix(&geom_b, &grid_b),
        a_m: dictionary_matrix(&geom_m, &grid_m),
        mobility: MobilityModel::new(cfg.beta, cfg.rho)?,
        transitions: HashMap::new(),
    };
    let noise_var = cfg.noise_var();
    let cycling = cycling_beams(cfg.n_c, &geom_b);
    let dft = dft_combiner(cfg.n_m);
    let table = if cfg.mode.is_dedicated() {
        Some(CostTable::new(&BeamCodebook::on_grid(&geom_b, &grid_b), &geom_b, &grid_b, noise_var)?)
    } else {
        None
    };
    let codebook = BeamCodebook::on_grid(&geom_b, &grid_b);
    let use_map = cfg.estimator == Estimator::Map;

    let mut channel_rng: SimRng = sim_rng(cfg.rng_seed, CHANNEL_STREAM);
    let mut training_rng = sim_rng(cfg.rng_seed, TRAINING_STREAM);
    let mut data_rng = sim_rng(cfg.rng_seed, DATA_STREAM);
    let mut truth = TruthChannel::random(cfg.num_paths, grid_b, grid_m, cfg.off_grid, &mut channel_rng);

    let mut state: Option<EstimatorState> = None;
    let mut link: Option<DataLink> = None;
    let mut records = Vec::with_capacity(schedule.bursts.len());
    let (mut bit_errors, mut data_bits, mut degraded, mut ill) = (0u64, 0u64, 0u64, 0u64);
    let mut next_burst = 0;
    let mut training_until = 0u64;

    for n in 0..cfg.total_symbols {
        if next_burst < schedule.bursts.len() && schedule.bursts[next_burst].start == n {
            let burst = schedule.bursts[next_burst];
            let gap = schedule.bursts.get(next_burst + 1).map_or(0, |b| b.start - burst.start);
            next_burst += 1;
            training_until = burst.end();

            let h = truth.dense(&geom_b, &geom_m);
            let len = burst.len as usize;
            let (f, w, beams) = match burst.kind {
                SlotKind::DedicatedTraining => {
                    let st = state.as_ref().expect("a common burst precedes every dedicated burst");
                    let table = table.as_ref().expect("cost table exists in dedicated modes");
                    let marginals: Vec<Vec<f64>> = (0..cfg.num_paths).map(|l| st.posterior.aod_marginal(l)).collect();
                    let mut beams = if cfg.mode == Mode::DedicatedSingle {
                        let mut b = Vec::with_capacity(cfg.num_paths);
                        for m in &marginals {
                            b.extend(select_center_beam(table, m)?.indices);
                        }
                        b
                    } else {
                        select_multipath_beams(table, &marginals, cfg.search_window)?
                    };
                    beams.truncate(len);
                    let aoas: Vec<f64> = if cfg.oracle_combiner {
                        (0..truth.num_paths()).map(|l| truth.effective_aoa(l)).collect()
                    } else {
                        (0..cfg.num_paths).map(|l| grid_m.angle(argmax(&st.posterior.aoa_marginal(l)))).collect()
                    };
                    let mut w = CMatrix::zeros(cfg.n_m, aoas.len());
                    for (k, &theta) in aoas.iter().enumerate() {
                        w.set_column(k, &steering_unchecked(&geom_m, theta));
                    }
                    (codebook.beams(&beams), w, beams)
                }
                _ => (cycling.columns(0, len).into_owned(), dft.clone(), Vec::new()),
            };

            let y = simulate_measurement(&h, &f, &w, noise_var, &mut training_rng)?.stacked();
            let phi = KroneckerSensing::new(&f, &w, &setup.a_b, &setup.a_m)?;
            let (est, entropy) = if !use_map {
                (omp_estimate(&y, &phi, cfg.num_paths), None)
            } else {
                let transition = setup.transition(gap);
                match state.take() {
                    None if cfg.map_init == MapInit::OmpPointMass => {
                        let est = omp_estimate(&y, &phi, cfg.num_paths);
                        let mut st = EstimatorState::from_support(
                            &est.support,
                            cfg.m_b,
                            cfg.m_m,
                            cfg.posterior_mode,
                            cfg.gain_prior_var,
                            noise_var,
                            transition,
                        )?;
                        st.penalty = cfg.psi_penalty;
                        st.prior_floor = cfg.prior_floor;
                        state = Some(st);
                        (est, Some(0.0))
                    }
                    prev => {
                        let mut st = match prev {
                            Some(s) => s,
                            None => {
                                let prior = SupportPosterior::uniform(cfg.num_paths, cfg.m_b, cfg.m_m, cfg.posterior_mode);
                                let mut s = EstimatorState::new(prior, cfg.gain_prior_var, noise_var, transition.clone())?;
                                s.penalty = cfg.psi_penalty;
                                s.prior_floor = cfg.prior_floor;
                                s
                            }
                        };
                        st.transition = transition;
                        // Only a full cycling burst can re-acquire a path that
                        // left the prior's support; a dedicated burst would
                        // mostly fit noise there.
                        st.prior_floor = if burst.kind == SlotKind::CommonTraining { cfg.prior_floor } else { 0.0 };
                        let up = greedy_map_update(&y, &phi, &st);
                        let entropy = (0..cfg.num_paths).map(|l| up.posterior.entropy(l)).sum::<f64>() / cfg.num_paths as f64;
                        st.posterior = posterior_predict(&up.posterior, &st.transition);
                        state = Some(st);
                        (up.estimate, Some(entropy))
                    }
                }
            };
            ill += est.ill_conditioned as u64;

            let h_hat = estimate_to_dense(&est, &setup.a_b, &setup.a_m);
            let precoder = svd_precoder(&h_hat);
            degraded += precoder.degraded as u64;
            link = Some(DataLink::new(precoder, &setup.a_b, &setup.a_m, cfg.off_grid));
            records.push(BurstRecord { start: burst.start, kind: burst.kind, nmse: nmse(&h, &h_hat), beams, posterior_entropy: entropy });
        }

        // every symbol consumes the same draws, data or not
        let is_data = n >= training_until;
        let e = match (&link, is_data) {
            (Some(l), true) => l.gain(&truth, &geom_b, &geom_m),
            _ => C64::new(0.0, 0.0),
        };
        let wrong = bpsk_symbol_error(e, noise_var, &mut data_rng);
        if is_data {
            data_bits += 1;
            bit_errors += wrong as u64;
        }

        let rho = match cfg.gain_update {
            GainUpdate::Symbol => Some(cfg.rho),
            GainUpdate::Period => ((n + 1) % cfg.gain_period == 0).then_some(cfg.rho),
        };
        truth.step(cfg.beta, rho, &mut channel_rng);
    }

    let finite: Vec<f64> = records.iter().filter_map(|r| r.nmse).collect();
    Ok(MetricsReport {
        ber: if data_bits > 0 { bit_errors as f64 / data_bits as f64 } else { 0.0 },
        nmse: if finite.is_empty() { f64::NAN } else { finite.iter().sum::<f64>() / finite.len() as f64 },
        overhead: overhead(&schedule),
        bit_errors,
        data_bits,
        training_symbols: schedule.training_slots(),
        total_symbols: cfg.total_symbols,
        bursts: records,
        degraded_precoders: degraded,
        ill_conditioned: ill,
    })
}
