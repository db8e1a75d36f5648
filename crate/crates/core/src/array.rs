//! Uniform linear arrays, the quantized angle grid and the sparse
//! angular-domain channel.
//!
//! Angles are always the sine of the physical angle, so they live in
//! `[-1, 1]`. Grid bin `k` of an `M`-bin grid sits at `-1 + 2k/M`.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{CMatrix, CVector, Error, RMatrix, Result, C64};

/// Uniform linear array: element count and spacing in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub num_elements: usize,
    pub element_spacing: f64,
}

impl ArrayGeometry {
    pub fn new(num_elements: usize, element_spacing: f64) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::Config("array needs at least one element".into()));
        }
        if !(element_spacing > 0.0) || !element_spacing.is_finite() {
            return Err(Error::Config(format!("element spacing {element_spacing} must be positive")));
        }
        Ok(Self { num_elements, element_spacing })
    }

    /// Half-wavelength ULA.
    pub fn half_wavelength(num_elements: usize) -> Self {
        Self { num_elements, element_spacing: 0.5 }
    }
}

/// Uniform grid over the sine domain, `num_bins` points in `[-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngleGrid {
    pub num_bins: usize,
}

impl AngleGrid {
    pub fn new(num_bins: usize) -> Result<Self> {
        if num_bins < 2 {
            return Err(Error::Config(format!("angle grid needs >= 2 bins, got {num_bins}")));
        }
        Ok(Self { num_bins })
    }

    pub fn angle(&self, bin: usize) -> f64 {
        -1.0 + 2.0 * bin as f64 / self.num_bins as f64
    }

    pub fn bin_width(&self) -> f64 {
        2.0 / self.num_bins as f64
    }

    /// Fractional bin coordinate of `theta` (bin `k` maps to `k`).
    pub fn bin_coordinate(&self, theta: f64) -> f64 {
        (theta + 1.0) / self.bin_width()
    }

    /// Nearest bin, clamped into the grid.
    pub fn nearest_bin(&self, theta: f64) -> usize {
        let k = self.bin_coordinate(theta).round();
        k.clamp(0.0, (self.num_bins - 1) as f64) as usize
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.num_bins).map(|k| self.angle(k)).collect()
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&theta) {
        return Err(Error::AngleOutOfRange(theta));
    }
    Ok(())
}

/// Unit-norm array response; element `k` is `exp(j 2 pi k d theta) / sqrt(N)`.
pub fn steering_vector(geom: &ArrayGeometry, theta: f64) -> Result<CVector> {
    check_angle(theta)?;
    Ok(steering_unchecked(geom, theta))
}

/// Same as [`steering_vector`] without the domain check. Off-grid simulation
/// and finite differences near the edges need this.
pub(crate) fn steering_unchecked(geom: &ArrayGeometry, theta: f64) -> CVector {
    let n = geom.num_elements;
    let scale = 1.0 / (n as f64).sqrt();
    let step = 2.0 * PI * geom.element_spacing * theta;
    DVector::from_fn(n, |k, _| C64::from_polar(scale, step * k as f64))
}

/// Derivative of [`steering_vector`] with respect to `theta`.
pub fn steering_derivative(geom: &ArrayGeometry, theta: f64) -> Result<CVector> {
    check_angle(theta)?;
    Ok(derivative_unchecked(geom, theta))
}

pub(crate) fn derivative_unchecked(geom: &ArrayGeometry, theta: f64) -> CVector {
    let n = geom.num_elements;
    let scale = 1.0 / (n as f64).sqrt();
    let w = 2.0 * PI * geom.element_spacing;
    DVector::from_fn(n, |k, _| {
        let kf = k as f64;
        C64::new(0.0, w * kf) * C64::from_polar(scale, w * kf * theta)
    })
}

/// Dictionary whose column `k` steers to grid angle `k`.
pub fn dictionary_matrix(geom: &ArrayGeometry, grid: &AngleGrid) -> CMatrix {
    let mut a = CMatrix::zeros(geom.num_elements, grid.num_bins);
    for k in 0..grid.num_bins {
        a.set_column(k, &steering_unchecked(geom, grid.angle(k)));
    }
    a
}

/// One propagation path on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub aod_bin: usize,
    pub aoa_bin: usize,
    pub gain: C64,
}

/// Ground-truth channel: an ordered list of paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub paths: Vec<PathState>,
}

impl ChannelState {
    /// Validating constructor: at least one path, distinct bin pairs, finite gains.
    pub fn new(paths: Vec<PathState>) -> Result<Self> {
        let state = Self { paths };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths.is_empty() {
            return Err(Error::InvalidState("channel needs at least one path".into()));
        }
        for (i, p) in self.paths.iter().enumerate() {
            if !(p.gain.re.is_finite() && p.gain.im.is_finite()) {
                return Err(Error::InvalidState(format!("path {i} has a non-finite gain")));
            }
            if self.paths[..i].iter().any(|q| q.aod_bin == p.aod_bin && q.aoa_bin == p.aoa_bin) {
                return Err(Error::DuplicatePath { aod: p.aod_bin, aoa: p.aoa_bin });
            }
        }
        Ok(())
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    /// Random state with `num_paths` distinct uniformly drawn bin pairs and
    /// i.i.d. CN(0, 1) gains.
    pub fn random<R: Rng + ?Sized>(num_paths: usize, aod: &AngleGrid, aoa: &AngleGrid, rng: &mut R) -> Self {
        assert!(num_paths <= aod.num_bins * aoa.num_bins);
        let mut paths: Vec<PathState> = Vec::with_capacity(num_paths);
        while paths.len() < num_paths {
            let aod_bin = rng.random_range(0..aod.num_bins);
            let aoa_bin = rng.random_range(0..aoa.num_bins);
            if paths.iter().any(|p| p.aod_bin == aod_bin && p.aoa_bin == aoa_bin) {
                continue;
            }
            paths.push(PathState { aod_bin, aoa_bin, gain: complex_normal(rng, 1.0) });
        }
        Self { paths }
    }
}

/// Per-symbol mobility parameters.
///
/// `beta` is the per-symbol angular diffusion in sine-angle units; a step of
/// `T` symbols has kernel `exp(-d^2 / (T beta^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityModel {
    pub beta: f64,
    pub rho: f64,
}

impl MobilityModel {
    pub fn new(beta: f64, rho: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::Config(format!("beta {beta} must be >= 0")));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Config(format!("rho {rho} must lie in [0, 1]")));
        }
        Ok(Self { beta, rho })
    }

    /// `sigma_l^2 = T beta^2` for a step of `symbols` symbols (sine units).
    pub fn sigma_l_sq(&self, symbols: u64) -> f64 {
        symbols as f64 * self.beta * self.beta
    }

    /// Kernel width in bins of `grid` for a step of `symbols` symbols.
    pub fn sigma_l_bins(&self, symbols: u64, grid: &AngleGrid) -> f64 {
        self.sigma_l_sq(symbols).sqrt() / grid.bin_width()
    }
}

/// Sparse virtual channel `H^(v)`: `rows = M_m` (AoA), `cols = M_b` (AoD).
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualChannel {
    pub rows: usize,
    pub cols: usize,
    /// `(aoa_bin, aod_bin, gain)` triplets.
    pub entries: Vec<(usize, usize, C64)>,
}

impl VirtualChannel {
    /// Column-major flat index of `(aoa_bin, aod_bin)` in `vec(H^(v))`.
    pub fn flat_index(&self, aoa_bin: usize, aod_bin: usize) -> usize {
        aod_bin * self.rows + aoa_bin
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().filter(|e| e.2 != C64::new(0.0, 0.0)).count()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut h = CMatrix::zeros(self.rows, self.cols);
        for &(i, j, g) in &self.entries {
            h[(i, j)] += g;
        }
        h
    }

    /// `vec(H^(v))`, the sparse vector `h` of the stacked measurement model.
    pub fn to_vector(&self) -> CVector {
        let mut h = CVector::zeros(self.rows * self.cols);
        for &(i, j, g) in &self.entries {
            h[j * self.rows + i] += g;
        }
        h
    }
}

/// `H = sum_l alpha_l a_m(theta_m,l) a_b(theta_b,l)^H` with grid angles.
pub fn assemble_dense(
    state: &ChannelState,
    geom_b: &ArrayGeometry,
    geom_m: &ArrayGeometry,
    grid_b: &AngleGrid,
    grid_m: &AngleGrid,
) -> CMatrix {
    let mut h = CMatrix::zeros(geom_m.num_elements, geom_b.num_elements);
    for p in &state.paths {
        let am = steering_unchecked(geom_m, grid_m.angle(p.aoa_bin));
        let ab = steering_unchecked(geom_b, grid_b.angle(p.aod_bin));
        h += (am * ab.adjoint()) * p.gain;
    }
    h
}

/// Same as [`assemble_dense`] for continuous `(aod, aoa, gain)` triplets.
pub fn assemble_dense_continuous(
    paths: impl IntoIterator<Item = (f64, f64, C64)>,
    geom_b: &ArrayGeometry,
    geom_m: &ArrayGeometry,
) -> CMatrix {
    let mut h = CMatrix::zeros(geom_m.num_elements, geom_b.num_elements);
    for (aod, aoa, gain) in paths {
        let am = steering_unchecked(geom_m, aoa);
        let ab = steering_unchecked(geom_b, aod);
        h += (am * ab.adjoint()) * gain;
    }
    h
}

/// Virtual representation of an on-grid state.
pub fn to_virtual(state: &ChannelState, m_b: usize, m_m: usize) -> Result<VirtualChannel> {
    let mut entries = Vec::with_capacity(state.paths.len());
    for p in &state.paths {
        if p.aod_bin >= m_b || p.aoa_bin >= m_m {
            return Err(Error::InvalidState(format!(
                "bin pair ({}, {}) outside {m_b} x {m_m} grid",
                p.aod_bin, p.aoa_bin
            )));
        }
        if entries.iter().any(|&(i, j, _)| i == p.aoa_bin && j == p.aod_bin) {
            return Err(Error::DuplicatePath { aod: p.aod_bin, aoa: p.aoa_bin });
        }
        entries.push((p.aoa_bin, p.aod_bin, p.gain));
    }
    Ok(VirtualChannel { rows: m_m, cols: m_b, entries })
}

/// Column-stochastic Gaussian-kernel transition matrix,
/// `T(m|n) = exp(-|m-n|^2 / sigma_l^2) / C_n`. `sigma_l = 0` gives the identity.
pub fn transition_matrix(m: usize, sigma_l: f64) -> RMatrix {
    assert!(sigma_l >= 0.0, "sigma_l must be non-negative");
    if sigma_l == 0.0 {
        return RMatrix::identity(m, m);
    }
    let inv = 1.0 / (sigma_l * sigma_l);
    let mut t = RMatrix::from_fn(m, m, |to, from| {
        let d = to as f64 - from as f64;
        (-d * d * inv).exp()
    });
    for mut col in t.column_iter_mut() {
        let s: f64 = col.sum();
        col /= s;
    }
    t
}

/// Draw a bin from column `from` of a column-stochastic matrix.
pub fn sample_column<R: Rng + ?Sized>(t: &RMatrix, from: usize, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let col = t.column(from);
    for (k, &p) in col.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // rounding left u above the cumulative sum; fall back to the last
    // bin carrying mass
    col.iter().rposition(|&p| p > 0.0).unwrap_or(from)
}

/// One Markov step of every path's AoD and AoA, gains untouched.
///
/// A path that lands on a pair already taken by an earlier path is re-drawn
/// once; if it still collides it is kept and the returned flag is set.
pub fn evolve_angles<R: Rng + ?Sized>(
    state: &ChannelState,
    t_b: &RMatrix,
    t_m: &RMatrix,
    rng: &mut R,
) -> (ChannelState, bool) {
    let mut merged = false;
    let mut out: Vec<PathState> = Vec::with_capacity(state.paths.len());
    for p in &state.paths {
        let draw = |rng: &mut R| PathState {
            aod_bin: sample_column(t_b, p.aod_bin, rng),
            aoa_bin: sample_column(t_m, p.aoa_bin, rng),
            gain: p.gain,
        };
        let taken = |q: &PathState, out: &[PathState]| {
            out.iter().any(|o| o.aod_bin == q.aod_bin && o.aoa_bin == q.aoa_bin)
        };
        let mut next = draw(rng);
        if taken(&next, &out) {
            next = draw(rng);
            if taken(&next, &out) {
                merged = true;
            }
        }
        out.push(next);
    }
    (ChannelState { paths: out }, merged)
}

/// Circularly-symmetric complex Gaussian draw with variance `var`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}

/// AR(1) gain step `rho alpha + sqrt(1 - rho^2) v`, `v ~ CN(0, 1)`.
pub fn evolve_gain<R: Rng + ?Sized>(alpha: C64, rho: f64, rng: &mut R) -> C64 {
    if rho == 1.0 {
        return alpha;
    }
    alpha * rho + complex_normal(rng, 1.0) * (1.0 - rho * rho).sqrt()
}
