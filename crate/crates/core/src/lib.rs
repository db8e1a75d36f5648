//! Dedicated beam training for mobile mmWave links.
//!
//! The crate is organised bottom-up:
//!
//! - [`array`]: ULA steering vectors, angle dictionaries, the on-grid channel
//!   and its temporal evolution (Markov angles, AR gains).
//! - [`training`]: codebooks, beam cycling, combiners, measurement synthesis,
//!   the Kronecker sensing matrix and the slot-level frame schedule.
//! - [`estimation`]: orthogonal matching pursuit and the sequential greedy MAP
//!   estimator with per-path support posteriors.
//! - [`selection`]: single-path CRLB, posterior-averaged cost and dual-beam
//!   search.
//! - [`sim`]: the link-level Monte Carlo driver and its metrics.

pub mod array;
pub mod error;
pub mod estimation;
pub mod selection;
pub mod sim;
pub mod training;

pub use error::{Error, Result};

pub use array::{AngleGrid, ArrayGeometry, ChannelState, MobilityModel, PathState};
pub use estimation::{ChannelEstimate, EstimatorState, PosteriorMode, PsiPenalty, SupportPosterior};
pub use selection::{BeamSelection, FisherMatrix};
pub use sim::{Estimator, MetricsReport, Mode, SimConfig};
pub use training::{BeamCodebook, FrameSchedule, KroneckerSensing, MeasurementBatch, SensingOperator, SlotKind};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dense real matrix (transition kernels, posteriors in matrix form).
pub type RMatrix = nalgebra::DMatrix<f64>;

/// Simulation random generator: ChaCha with an explicit per-run stream.
pub type SimRng = rand_chacha::ChaCha12Rng;

/// Build the generator for run `stream` of seed `seed`.
///
/// Streams are independent, so results do not depend on the order in which
/// runs are executed.
pub fn sim_rng(seed: u64, stream: u64) -> SimRng {
    use rand::SeedableRng;
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
