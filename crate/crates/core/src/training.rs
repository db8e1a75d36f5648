//! Beam training: codebooks, cycling beams, combiners, measurement synthesis,
//! the stacked sensing matrix and the slot-level frame schedule.

use std::f64::consts::PI;

use rand::Rng;

use crate::array::{complex_normal, dictionary_matrix, steering_unchecked, steering_vector};
use crate::{AngleGrid, ArrayGeometry, CMatrix, CVector, Error, Result, C64};

/// Pre-computed analog beams steered to uniformly spaced sine-domain angles.
#[derive(Debug, Clone)]
pub struct BeamCodebook {
    /// One unit-norm beam per column.
    pub vectors: CMatrix,
    pub angles: Vec<f64>,
}

impl BeamCodebook {
    /// Codebook aligned with `grid`: beam `i` steers to grid angle `i`.
    pub fn on_grid(geom: &ArrayGeometry, grid: &AngleGrid) -> Self {
        Self { vectors: dictionary_matrix(geom, grid), angles: grid.angles() }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Beamformer matrix made of the selected codebook columns.
    pub fn beams(&self, indices: &[usize]) -> CMatrix {
        self.vectors.select_columns(indices)
    }
}

/// Beam-cycling beamformers: column `k` steers to `-1 + 2k/N_c`.
pub fn cycling_beams(num_beams: usize, geom: &ArrayGeometry) -> CMatrix {
    assert!(num_beams >= 1, "need at least one cycling beam");
    let mut f = CMatrix::zeros(geom.num_elements, num_beams);
    for k in 0..num_beams {
        let theta = -1.0 + 2.0 * k as f64 / num_beams as f64;
        f.set_column(k, &steering_unchecked(geom, theta));
    }
    f
}

/// Unitary `N x N` DFT combiner, `W[n, k] = exp(j 2 pi n k / N) / sqrt(N)`.
pub fn dft_combiner(n: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |r, c| C64::from_polar(scale, 2.0 * PI * (r * c) as f64 / n as f64))
}

/// Single-column combiner matched to an AoA.
pub fn ideal_combiner(aoa_theta: f64, geom_m: &ArrayGeometry) -> Result<CVector> {
    steering_vector(geom_m, aoa_theta)
}

/// Combiner with one matched column per AoA.
pub fn ideal_combiner_matrix(aoas: &[f64], geom_m: &ArrayGeometry) -> Result<CMatrix> {
    let mut w = CMatrix::zeros(geom_m.num_elements, aoas.len());
    for (k, &theta) in aoas.iter().enumerate() {
        w.set_column(k, &steering_vector(geom_m, theta)?);
    }
    Ok(w)
}

/// Received training block `Y = W^H H F + W^H N` of one training period.
#[derive(Debug, Clone)]
pub struct MeasurementBatch {
    pub received: CMatrix,
    pub beamformers: CMatrix,
    pub combiner: CMatrix,
    pub noise_var: f64,
}

impl MeasurementBatch {
    /// `vec(Y)`, stacking columns.
    pub fn stacked(&self) -> CVector {
        CVector::from_column_slice(self.received.as_slice())
    }
}

/// Synthesize one training block with unit training symbols. The channel is
/// the same for every beam of the block.
pub fn simulate_measurement<R: Rng + ?Sized>(
    channel: &CMatrix,
    beamformers: &CMatrix,
    combiner: &CMatrix,
    noise_var: f64,
    rng: &mut R,
) -> Result<MeasurementBatch> {
    if channel.ncols() != beamformers.nrows() || channel.nrows() != combiner.nrows() {
        return Err(Error::Dimension(format!(
            "H is {}x{}, F has {} rows, W has {} rows",
            channel.nrows(),
            channel.ncols(),
            beamformers.nrows(),
            combiner.nrows()
        )));
    }
    if !(noise_var > 0.0) {
        return Err(Error::Config(format!("noise variance {noise_var} must be positive")));
    }
    let mut r = channel * beamformers;
    for x in r.iter_mut() {
        *x += complex_normal(rng, noise_var);
    }
    Ok(MeasurementBatch {
        received: combiner.adjoint() * r,
        beamformers: beamformers.clone(),
        combiner: combiner.clone(),
        noise_var,
    })
}

/// Dense `Phi = (F^T conj(A_b)) kron (W^H A_m)`.
pub fn build_sensing_matrix(f: &CMatrix, w: &CMatrix, a_b: &CMatrix, a_m: &CMatrix) -> Result<CMatrix> {
    KroneckerSensing::new(f, w, a_b, a_m).map(|k| k.left.kronecker(&k.right))
}

/// Linear map from `vec(H^(v))` to stacked measurements, as the estimators
/// see it.
pub trait SensingOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn column(&self, j: usize) -> CVector;
    /// `Phi^H r`.
    fn adjoint_apply(&self, r: &CVector) -> CVector;
    fn column_norms_sq(&self) -> Vec<f64>;

    /// `Phi_S`, the columns listed in `support`.
    fn submatrix(&self, support: &[usize]) -> CMatrix {
        let mut m = CMatrix::zeros(self.nrows(), support.len());
        for (k, &j) in support.iter().enumerate() {
            m.set_column(k, &self.column(j));
        }
        m
    }
}

impl SensingOperator for CMatrix {
    fn nrows(&self) -> usize {
        self.shape().0
    }

    fn ncols(&self) -> usize {
        self.shape().1
    }

    fn column(&self, j: usize) -> CVector {
        self.column(j).into_owned()
    }

    fn adjoint_apply(&self, r: &CVector) -> CVector {
        self.ad_mul(r)
    }

    fn column_norms_sq(&self) -> Vec<f64> {
        self.column_iter().map(|c| c.norm_squared()).collect()
    }
}

/// Structured sensing matrix stored through its two Kronecker factors.
///
/// Column `j * M_m + i` is `left[:, j] kron right[:, i]`, matching
/// `vec(H^(v))` where `i` is the AoA bin and `j` the AoD bin.
#[derive(Debug, Clone)]
pub struct KroneckerSensing {
    /// `F^T conj(A_b)`, beams x AoD bins.
    pub left: CMatrix,
    /// `W^H A_m`, combiner outputs x AoA bins.
    pub right: CMatrix,
    left_conj: CMatrix,
    right_adj: CMatrix,
    norms: Vec<f64>,
}

impl KroneckerSensing {
    pub fn new(f: &CMatrix, w: &CMatrix, a_b: &CMatrix, a_m: &CMatrix) -> Result<Self> {
        if f.nrows() != a_b.nrows() || w.nrows() != a_m.nrows() {
            return Err(Error::Dimension(format!(
                "F has {} rows vs A_b {}, W has {} rows vs A_m {}",
                f.nrows(),
                a_b.nrows(),
                w.nrows(),
                a_m.nrows()
            )));
        }
        let left = f.transpose() * a_b.conjugate();
        let right = w.adjoint() * a_m;
        Ok(Self::from_factors(left, right))
    }

    pub fn from_factors(left: CMatrix, right: CMatrix) -> Self {
        let ln: Vec<f64> = left.column_iter().map(|c| c.norm_squared()).collect();
        let rn: Vec<f64> = right.column_iter().map(|c| c.norm_squared()).collect();
        let mut norms = Vec::with_capacity(ln.len() * rn.len());
        for &l in &ln {
            for &r in &rn {
                norms.push(l * r);
            }
        }
        Self { left_conj: left.conjugate(), right_adj: right.adjoint(), left, right, norms }
    }

    pub fn aod_bins(&self) -> usize {
        self.left.ncols()
    }

    pub fn aoa_bins(&self) -> usize {
        self.right.ncols()
    }

    pub fn to_dense(&self) -> CMatrix {
        self.left.kronecker(&self.right)
    }
}

impl SensingOperator for KroneckerSensing {
    fn nrows(&self) -> usize {
        self.left.nrows() * self.right.nrows()
    }

    fn ncols(&self) -> usize {
        self.left.ncols() * self.right.ncols()
    }

    fn column(&self, j: usize) -> CVector {
        let m_m = self.right.ncols();
        let (aod, aoa) = (j / m_m, j % m_m);
        let (l, r) = (self.left.column(aod), self.right.column(aoa));
        let nw = r.len();
        CVector::from_fn(self.nrows(), |k, _| l[k / nw] * r[k % nw])
    }

    fn adjoint_apply(&self, r: &CVector) -> CVector {
        // (B kron A)^H vec(R) = vec(A^H R conj(B))
        let rm = CMatrix::from_column_slice(self.right.nrows(), self.left.nrows(), r.as_slice());
        let x = &self.right_adj * rm * &self.left_conj;
        CVector::from_column_slice(x.as_slice())
    }

    fn column_norms_sq(&self) -> Vec<f64> {
        self.norms.clone()
    }
}

/// What a symbol slot carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotKind {
    CommonTraining,
    DedicatedTraining,
    Data,
}

/// A run of consecutive training slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Burst {
    pub start: u64,
    pub len: u64,
    pub kind: SlotKind,
}

impl Burst {
    pub fn end(&self) -> u64 {
        self.start + self.len
    }
}

/// Scalar inputs of [`schedule_frames`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleParams {
    pub total_symbols: u64,
    pub common_period: u64,
    pub num_common_beams: u64,
    /// `(T_d, beams per dedicated burst)`, `None` for common training only.
    pub dedicated: Option<(u64, u64)>,
}

/// Slot-level timeline. Stored as sorted training bursts; every other slot
/// is data.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSchedule {
    pub params: ScheduleParams,
    pub bursts: Vec<Burst>,
}

impl FrameSchedule {
    pub fn total_symbols(&self) -> u64 {
        self.params.total_symbols
    }

    pub fn label(&self, n: u64) -> SlotKind {
        assert!(n < self.total_symbols(), "slot {n} beyond the schedule");
        let idx = self.bursts.partition_point(|b| b.start <= n);
        match idx.checked_sub(1).map(|i| self.bursts[i]) {
            Some(b) if n < b.end() => b.kind,
            _ => SlotKind::Data,
        }
    }

    pub fn count(&self, kind: SlotKind) -> u64 {
        match kind {
            SlotKind::Data => self.total_symbols() - self.training_slots(),
            k => self.bursts.iter().filter(|b| b.kind == k).map(|b| b.len).sum(),
        }
    }

    pub fn training_slots(&self) -> u64 {
        self.bursts.iter().map(|b| b.len).sum()
    }

    pub fn labels(&self) -> impl Iterator<Item = SlotKind> + '_ {
        (0..self.total_symbols()).map(|n| self.label(n))
    }
}

/// Lay out common and dedicated training bursts.
///
/// Each common period opens with `N_c` common slots. Dedicated bursts start at
/// offsets `T_d, 2 T_d, ...` inside each common period; an instant that would
/// overlap common training (including offset 0) is skipped.
pub fn schedule_frames(params: &ScheduleParams) -> Result<FrameSchedule> {
    let p = *params;
    if p.common_period == 0 || p.num_common_beams == 0 {
        return Err(Error::Config("T_c and N_c must be positive".into()));
    }
    if p.num_common_beams > p.common_period {
        return Err(Error::Config(format!("N_c exceeds T_c ({} > {})", p.num_common_beams, p.common_period)));
    }
    if let Some((td, nd)) = p.dedicated {
        if td == 0 || nd == 0 {
            return Err(Error::Config("T_d and N_d must be positive".into()));
        }
        if nd > td {
            return Err(Error::Config(format!("N_d exceeds T_d ({nd} > {td})")));
        }
        if td >= p.common_period {
            return Err(Error::Config(format!("T_d must be shorter than T_c ({td} >= {})", p.common_period)));
        }
    }

    let clip = |start: u64, len: u64, kind| Burst { start, len: len.min(p.total_symbols - start), kind };
    let mut bursts = Vec::new();
    let mut period_start = 0;
    while period_start < p.total_symbols {
        bursts.push(clip(period_start, p.num_common_beams, SlotKind::CommonTraining));
        if let Some((td, nd)) = p.dedicated {
            let mut offset = td;
            while offset < p.common_period && period_start + offset < p.total_symbols {
                let fits = offset >= p.num_common_beams && offset + nd <= p.common_period;
                if fits {
                    bursts.push(clip(period_start + offset, nd, SlotKind::DedicatedTraining));
                }
                offset += td;
            }
        }
        period_start += p.common_period;
    }
    Ok(FrameSchedule { params: p, bursts })
}
