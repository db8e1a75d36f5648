//! Beam selection for dedicated training: single-path Fisher information and
//! CRLB, the posterior-averaged cost and the dual-beam searches.
//!
//! With `y = alpha F^T a*(theta) + n`, write `g = F^T a*(theta)` and
//! `d = F^T da*(theta)/dtheta`. The CRLB on `theta` is
//! `sigma^2 / (2 |alpha|^2) * [||d||^2 - |g^H d|^2 / ||g||^2]^-1`.

use crate::array::{derivative_unchecked, steering_unchecked};
use crate::{AngleGrid, ArrayGeometry, BeamCodebook, CMatrix, CVector, Error, Result, C64};

/// Relative size of the CRLB bracket below which the beam set is treated as
/// uninformative.
pub const BRACKET_FLOOR: f64 = 1e-12;
/// `||g||^2` below which the gain is unidentifiable (array nulls).
pub const GAIN_FLOOR: f64 = 1e-20;
/// Probabilities below this are dropped (and the rest renormalized) before a
/// search.
pub const PRUNE_THRESHOLD: f64 = 1e-6;
/// Default exhaustive-search window: 16 indices on each side of the center.
pub const DEFAULT_WINDOW: usize = 33;

/// Fisher information over `[alpha, alpha*, theta]` for the single-path
/// model. Only the independent entries are stored; `v13 = conj(v31)` and the
/// `alpha*` row mirrors the `alpha` row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherMatrix {
    pub v11: f64,
    pub v31: C64,
    pub v33: f64,
}

impl FisherMatrix {
    pub fn v13(&self) -> C64 {
        self.v31.conj()
    }

    /// Full 3x3 matrix in `[alpha, alpha*, theta]` order.
    pub fn to_matrix(&self) -> CMatrix {
        let z = C64::new(0.0, 0.0);
        let r = |x: f64| C64::new(x, 0.0);
        CMatrix::from_row_slice(
            3,
            3,
            &[r(self.v11), z, self.v13(), z, r(self.v11), self.v31, self.v31, self.v13(), r(self.v33)],
        )
    }

    /// `[V33 - 2 Re(V31 V11^-1 V13)]^-1`, or `+inf` when the bracket or `V11`
    /// is numerically zero.
    pub fn crlb(&self) -> f64 {
        if self.v11 <= 0.0 || self.v33 <= 0.0 {
            return f64::INFINITY;
        }
        let bracket = self.v33 - 2.0 * self.v31.norm_sqr() / self.v11;
        if bracket <= BRACKET_FLOOR * self.v33 {
            f64::INFINITY
        } else {
            1.0 / bracket
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange(theta))
    }
}

fn projections(f: &CMatrix, theta: f64, geom: &ArrayGeometry) -> Result<(CVector, CVector)> {
    check_theta(theta)?;
    if f.nrows() != geom.num_elements || f.ncols() == 0 {
        return Err(Error::Dimension(format!("beamformer is {}x{}, array has {} elements", f.nrows(), f.ncols(), geom.num_elements)));
    }
    let a = steering_unchecked(geom, theta);
    let da = derivative_unchecked(geom, theta);
    Ok((f.ad_mul(&a).conjugate(), f.ad_mul(&da).conjugate()))
}

/// Fisher entries for beams `F` (columns), AoD `theta`, gain `alpha` and noise
/// variance `noise_var`.
pub fn fisher_entries(f: &CMatrix, theta: f64, alpha: C64, noise_var: f64, geom: &ArrayGeometry) -> Result<FisherMatrix> {
    let (g, d) = projections(f, theta, geom)?;
    Ok(FisherMatrix {
        v11: g.norm_squared() / noise_var,
        v31: alpha * g.dotc(&d) / noise_var,
        v33: 2.0 * alpha.norm_sqr() * d.norm_squared() / noise_var,
    })
}

fn crlb_from_projections(g_sq: f64, d_sq: f64, gd: C64, noise_var: f64, alpha_mag: f64) -> f64 {
    if g_sq < GAIN_FLOOR || d_sq <= 0.0 || alpha_mag == 0.0 {
        return f64::INFINITY;
    }
    let bracket = d_sq - gd.norm_sqr() / g_sq;
    if bracket <= BRACKET_FLOOR * d_sq {
        return f64::INFINITY;
    }
    noise_var / (2.0 * alpha_mag * alpha_mag * bracket)
}

/// Lower bound on the variance of any unbiased AoD estimate from one burst.
pub fn crlb_single_path(f: &CMatrix, theta: f64, noise_var: f64, alpha_mag: f64, geom: &ArrayGeometry) -> Result<f64> {
    let (g, d) = projections(f, theta, geom)?;
    Ok(crlb_from_projections(g.norm_squared(), d.norm_squared(), g.dotc(&d), noise_var, alpha_mag))
}

/// CRLB averaged over an AoD distribution on `grid`. Bins with zero
/// probability are skipped, so an infinite CRLB only counts where the
/// distribution puts mass.
pub fn average_cost(
    f: &CMatrix,
    distribution: &[f64],
    noise_var: f64,
    alpha_mag: f64,
    geom: &ArrayGeometry,
    grid: &AngleGrid,
) -> Result<f64> {
    if distribution.len() != grid.num_bins {
        return Err(Error::Dimension(format!("distribution has {} bins, grid {}", distribution.len(), grid.num_bins)));
    }
    let mut total = 0.0;
    for (m, &p) in distribution.iter().enumerate() {
        if p > 0.0 {
            total += p * crlb_single_path(f, grid.angle(m), noise_var, alpha_mag, geom)?;
        }
    }
    Ok(total)
}

/// Totally ordered search cost: candidates with infinite-CRLB bins come
/// after all finite ones, ordered by how many such bins they have.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchCost {
    pub infinite_bins: usize,
    pub finite: f64,
}

impl SearchCost {
    pub fn value(&self) -> f64 {
        if self.infinite_bins > 0 {
            f64::INFINITY
        } else {
            self.finite
        }
    }

    fn better_than(&self, other: &SearchCost) -> bool {
        (self.infinite_bins, self.finite) < (other.infinite_bins, other.finite)
    }
}

/// Chosen training beams.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSelection {
    /// Codebook indices, `[i0 + delta, i0 - delta]` for a symmetric pair.
    pub indices: Vec<usize>,
    pub center: usize,
    /// Symmetric offset, when the 1D search produced the pair.
    pub delta: Option<usize>,
    pub cost: SearchCost,
    /// Number of candidate sets evaluated.
    pub evaluated: usize,
}

/// Codebook projections on every grid bin, so a candidate's cost is a sum
/// of cheap scalar terms.
#[derive(Debug, Clone)]
pub struct CostTable {
    /// `gain[m][i] = a(theta_m)^H f_i`.
    gain: Vec<Vec<C64>>,
    /// `deriv[m][i] = (da(theta_m)/dtheta)^H f_i`.
    deriv: Vec<Vec<C64>>,
    codebook_angles: Vec<f64>,
    grid: AngleGrid,
    pub noise_var: f64,
    pub alpha_mag: f64,
}

impl CostTable {
    /// Cost with `|alpha| = 1`; the argmin does not depend on the gain.
    pub fn new(codebook: &BeamCodebook, geom: &ArrayGeometry, grid: &AngleGrid, noise_var: f64) -> Result<Self> {
        if codebook.vectors.nrows() != geom.num_elements {
            return Err(Error::Dimension("codebook does not match the array".into()));
        }
        if codebook.len() < 2 {
            return Err(Error::Config("dual-beam selection needs at least two codebook beams".into()));
        }
        let mut gain = Vec::with_capacity(grid.num_bins);
        let mut deriv = Vec::with_capacity(grid.num_bins);
        for m in 0..grid.num_bins {
            let theta = grid.angle(m);
            let a = steering_unchecked(geom, theta);
            let da = derivative_unchecked(geom, theta);
            gain.push(codebook.vectors.ad_mul(&a).iter().map(|v| v.conj()).collect());
            deriv.push(codebook.vectors.ad_mul(&da).iter().map(|v| v.conj()).collect());
        }
        Ok(Self { gain, deriv, codebook_angles: codebook.angles.clone(), grid: *grid, noise_var, alpha_mag: 1.0 })
    }

    pub fn codebook_len(&self) -> usize {
        self.codebook_angles.len()
    }

    pub fn num_bins(&self) -> usize {
        self.grid.num_bins
    }

    /// CRLB at grid bin `m` for the beams `indices`.
    pub fn crlb(&self, m: usize, indices: &[usize]) -> f64 {
        let (mut g_sq, mut d_sq, mut gd) = (0.0, 0.0, C64::new(0.0, 0.0));
        for &i in indices {
            let (g, d) = (self.gain[m][i], self.deriv[m][i]);
            g_sq += g.norm_sqr();
            d_sq += d.norm_sqr();
            gd += g.conj() * d;
        }
        crlb_from_projections(g_sq, d_sq, gd, self.noise_var, self.alpha_mag)
    }

    /// Cost of `indices` under a sparse distribution `(bin, probability)`.
    pub fn cost(&self, indices: &[usize], support: &[(usize, f64)]) -> SearchCost {
        let mut c = SearchCost { infinite_bins: 0, finite: 0.0 };
        for &(m, p) in support {
            let v = self.crlb(m, indices);
            if v.is_finite() {
                c.finite += p * v;
            } else {
                c.infinite_bins += 1;
            }
        }
        c
    }

    /// Codebook index nearest the distribution mean, ties to the lower index.
    pub fn center_index(&self, distribution: &[f64]) -> usize {
        let mass: f64 = distribution.iter().sum();
        let mean_bin = distribution.iter().enumerate().map(|(m, p)| m as f64 * p).sum::<f64>() / mass;
        let theta = -1.0 + mean_bin * self.grid.bin_width();
        let mut best = (0, f64::INFINITY);
        for (i, &a) in self.codebook_angles.iter().enumerate() {
            let d = (a - theta).abs();
            if d < best.1 - 1e-12 {
                best = (i, d);
            }
        }
        best.0
    }
}

/// Drop negligible bins and renormalize; a distribution that is entirely
/// negligible keeps its largest bin.
fn prune(distribution: &[f64]) -> Result<Vec<(usize, f64)>> {
    let total: f64 = distribution.iter().sum();
    if !(total > 0.0) || distribution.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::Distribution("AoD distribution must be nonnegative with positive mass".into()));
    }
    let mut kept: Vec<(usize, f64)> =
        distribution.iter().enumerate().filter(|(_, &p)| p / total >= PRUNE_THRESHOLD).map(|(m, &p)| (m, p)).collect();
    if kept.is_empty() {
        let (m, &p) = distribution.iter().enumerate().fold((0, &0.0), |b, x| if x.1 > b.1 { x } else { b });
        kept.push((m, p));
    }
    let s: f64 = kept.iter().map(|x| x.1).sum();
    kept.iter_mut().for_each(|x| x.1 /= s);
    Ok(kept)
}

fn check_len(table: &CostTable, distribution: &[f64]) -> Result<()> {
    if distribution.len() != table.num_bins() {
        return Err(Error::Dimension(format!("distribution has {} bins, table {}", distribution.len(), table.num_bins())));
    }
    Ok(())
}

/// Index range of `window` consecutive indices centred on `center`,
/// shifted to stay inside the codebook.
fn window_range(center: usize, window: usize, len: usize) -> std::ops::Range<usize> {
    let window = window.clamp(1, len);
    let lo = center.saturating_sub((window - 1) / 2).min(len - window);
    lo..lo + window
}

/// Symmetric pair `(i0 + delta, i0 - delta)` minimizing the averaged CRLB,
/// with `i0` the index nearest the distribution mean. At the codebook edge,
/// where no symmetric pair exists, falls back to [`select_pair_exhaustive`].
pub fn select_dual_beams_1d(table: &CostTable, distribution: &[f64], window: usize) -> Result<BeamSelection> {
    check_len(table, distribution)?;
    let support = prune(distribution)?;
    let r = table.codebook_len();
    let i0 = table.center_index(distribution);
    let max_delta = i0.min(r - 1 - i0);
    if max_delta == 0 {
        return select_pair_exhaustive(table, distribution, window);
    }
    let mut best: Option<BeamSelection> = None;
    for delta in 1..=max_delta {
        let idx = [i0 + delta, i0 - delta];
        let cost = table.cost(&idx, &support);
        if best.as_ref().is_none_or(|b| cost.better_than(&b.cost)) {
            best = Some(BeamSelection { indices: idx.to_vec(), center: i0, delta: Some(delta), cost, evaluated: 0 });
        }
    }
    let mut sel = best.expect("at least one feasible offset");
    sel.evaluated = max_delta;
    Ok(sel)
}

/// Best pair among all pairs of `window` consecutive indices around the
/// distribution center. Pairs are returned as `[larger, smaller]`.
pub fn select_pair_exhaustive(table: &CostTable, distribution: &[f64], window: usize) -> Result<BeamSelection> {
    check_len(table, distribution)?;
    let support = prune(distribution)?;
    let i0 = table.center_index(distribution);
    let range = window_range(i0, window.max(2), table.codebook_len());
    let mut best: Option<BeamSelection> = None;
    let mut evaluated = 0;
    for j in range.clone() {
        for i in j + 1..range.end {
            evaluated += 1;
            let cost = table.cost(&[i, j], &support);
            if best.as_ref().is_none_or(|b| cost.better_than(&b.cost)) {
                let delta = (i + j == 2 * i0).then(|| i - i0);
                best = Some(BeamSelection { indices: vec![i, j], center: i0, delta, cost, evaluated: 0 });
            }
        }
    }
    let mut sel = best.expect("window holds at least one pair");
    sel.evaluated = evaluated;
    Ok(sel)
}

/// Single dedicated beam at the distribution center.
pub fn select_center_beam(table: &CostTable, distribution: &[f64]) -> Result<BeamSelection> {
    check_len(table, distribution)?;
    let support = prune(distribution)?;
    let i0 = table.center_index(distribution);
    Ok(BeamSelection { indices: vec![i0], center: i0, delta: None, cost: table.cost(&[i0], &support), evaluated: 1 })
}

/// Dual beams chosen independently for every path's AoD marginal and
/// concatenated; repeated beams are kept.
pub fn select_multipath_beams(table: &CostTable, marginals: &[Vec<f64>], window: usize) -> Result<Vec<usize>> {
    if marginals.is_empty() {
        return Err(Error::Config("need at least one path marginal".into()));
    }
    let mut out = Vec::with_capacity(2 * marginals.len());
    for m in marginals {
        out.extend(select_dual_beams_1d(table, m, window)?.indices);
    }
    Ok(out)
}
