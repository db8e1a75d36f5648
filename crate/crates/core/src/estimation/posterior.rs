use crate::array::transition_matrix;
use crate::{AngleGrid, Error, MobilityModel, RMatrix, Result};

/// How a path's support distribution is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PosteriorMode {
    /// Full `M_b * M_m` joint distribution.
    #[default]
    Joint,
    /// Independent AoD and AoA marginals.
    Factored,
}

/// Support distribution of one path.
#[derive(Debug, Clone, PartialEq)]
pub enum PathPosterior {
    /// Flat `vec(H^(v))` layout, index `aod * M_m + aoa`.
    Joint(Vec<f64>),
    Factored { aod: Vec<f64>, aoa: Vec<f64> },
}

/// Per-path support distributions carried across training periods.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPosterior {
    pub aod_bins: usize,
    pub aoa_bins: usize,
    pub paths: Vec<PathPosterior>,
}

impl SupportPosterior {
    pub fn uniform(num_paths: usize, aod_bins: usize, aoa_bins: usize, mode: PosteriorMode) -> Self {
        let path = match mode {
            PosteriorMode::Joint => PathPosterior::Joint(vec![1.0 / (aod_bins * aoa_bins) as f64; aod_bins * aoa_bins]),
            PosteriorMode::Factored => PathPosterior::Factored {
                aod: vec![1.0 / aod_bins as f64; aod_bins],
                aoa: vec![1.0 / aoa_bins as f64; aoa_bins],
            },
        };
        Self { aod_bins, aoa_bins, paths: vec![path; num_paths] }
    }

    /// Point masses at the given flat support indices.
    pub fn point_masses(support: &[usize], aod_bins: usize, aoa_bins: usize, mode: PosteriorMode) -> Self {
        let paths = support
            .iter()
            .map(|&s| match mode {
                PosteriorMode::Joint => {
                    let mut p = vec![0.0; aod_bins * aoa_bins];
                    p[s] = 1.0;
                    PathPosterior::Joint(p)
                }
                PosteriorMode::Factored => {
                    let mut aod = vec![0.0; aod_bins];
                    let mut aoa = vec![0.0; aoa_bins];
                    aod[s / aoa_bins] = 1.0;
                    aoa[s % aoa_bins] = 1.0;
                    PathPosterior::Factored { aod, aoa }
                }
            })
            .collect();
        Self { aod_bins, aoa_bins, paths }
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn num_bins(&self) -> usize {
        self.aod_bins * self.aoa_bins
    }

    pub fn mode(&self) -> PosteriorMode {
        match self.paths.first() {
            Some(PathPosterior::Factored { .. }) => PosteriorMode::Factored,
            _ => PosteriorMode::Joint,
        }
    }

    /// Probability of flat support index `s` for path `l`.
    pub fn prob(&self, l: usize, s: usize) -> f64 {
        match &self.paths[l] {
            PathPosterior::Joint(p) => p[s],
            PathPosterior::Factored { aod, aoa } => aod[s / self.aoa_bins] * aoa[s % self.aoa_bins],
        }
    }

    /// `ln Pr(s)` for every flat index of path `l`.
    pub fn log_probs(&self, l: usize) -> Vec<f64> {
        match &self.paths[l] {
            PathPosterior::Joint(p) => p.iter().map(|x| x.ln()).collect(),
            PathPosterior::Factored { aod, aoa } => {
                let la: Vec<f64> = aoa.iter().map(|x| x.ln()).collect();
                aod.iter().flat_map(|d| la.iter().map(move |a| d.ln() + a)).collect()
            }
        }
    }

    pub fn aod_marginal(&self, l: usize) -> Vec<f64> {
        match &self.paths[l] {
            PathPosterior::Joint(p) => p.chunks(self.aoa_bins).map(|c| c.iter().sum()).collect(),
            PathPosterior::Factored { aod, .. } => aod.clone(),
        }
    }

    pub fn aoa_marginal(&self, l: usize) -> Vec<f64> {
        match &self.paths[l] {
            PathPosterior::Joint(p) => {
                let mut m = vec![0.0; self.aoa_bins];
                for c in p.chunks(self.aoa_bins) {
                    for (acc, x) in m.iter_mut().zip(c) {
                        *acc += x;
                    }
                }
                m
            }
            PathPosterior::Factored { aoa, .. } => aoa.clone(),
        }
    }

    /// Shannon entropy (nats) of path `l`'s support distribution.
    pub fn entropy(&self, l: usize) -> f64 {
        let h = |v: &[f64]| -v.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>();
        match &self.paths[l] {
            PathPosterior::Joint(p) => h(p),
            PathPosterior::Factored { aod, aoa } => h(aod) + h(aoa),
        }
    }

    /// Total mass of path `l`.
    pub fn mass(&self, l: usize) -> f64 {
        match &self.paths[l] {
            PathPosterior::Joint(p) => p.iter().sum(),
            PathPosterior::Factored { aod, aoa } => aod.iter().sum::<f64>() * aoa.iter().sum::<f64>(),
        }
    }

    /// Nonnegative and normalized to `tol` on every path.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for l in 0..self.num_paths() {
            let ok = match &self.paths[l] {
                PathPosterior::Joint(p) => p.len() == self.num_bins() && p.iter().all(|&x| x >= 0.0),
                PathPosterior::Factored { aod, aoa } => {
                    aod.len() == self.aod_bins && aoa.len() == self.aoa_bins && aod.iter().chain(aoa).all(|&x| x >= 0.0)
                }
            };
            if !ok || (self.mass(l) - 1.0).abs() > tol {
                return Err(Error::Distribution(format!("path {l} posterior is not a distribution (mass {})", self.mass(l))));
            }
        }
        Ok(())
    }
}

/// AoD and AoA transition kernels for one prediction step.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTransition {
    pub aod: RMatrix,
    pub aoa: RMatrix,
}

impl JointTransition {
    pub fn identity(aod_bins: usize, aoa_bins: usize) -> Self {
        Self { aod: RMatrix::identity(aod_bins, aod_bins), aoa: RMatrix::identity(aoa_bins, aoa_bins) }
    }

    /// Kernels for `symbols` symbols of mobility.
    pub fn for_interval(mobility: &MobilityModel, symbols: u64, aod: &AngleGrid, aoa: &AngleGrid) -> Self {
        Self {
            aod: transition_matrix(aod.num_bins, mobility.sigma_l_bins(symbols, aod)),
            aoa: transition_matrix(aoa.num_bins, mobility.sigma_l_bins(symbols, aoa)),
        }
    }

    /// Flat joint transition `T_b kron T_m`, only sensible for small grids.
    pub fn joint_matrix(&self) -> RMatrix {
        self.aod.kronecker(&self.aoa)
    }
}

/// Kernel entries below this fraction of their column maximum are skipped.
const KERNEL_CUTOFF: f64 = 1e-18;

/// `T X` exploiting that Gaussian kernels are banded and posteriors are
/// mostly zero.
fn apply_kernel(t: &RMatrix, x: &RMatrix) -> RMatrix {
    let m = t.nrows();
    let bands: Vec<(usize, usize)> = t
        .column_iter()
        .map(|c| {
            let cut = c.max() * KERNEL_CUTOFF;
            let lo = c.iter().position(|&v| v > cut).unwrap_or(0);
            let hi = c.iter().rposition(|&v| v > cut).map_or(0, |h| h + 1);
            (lo, hi.max(lo))
        })
        .collect();
    let mut out = RMatrix::zeros(m, x.ncols());
    for j in 0..x.ncols() {
        for (n, &(lo, hi)) in bands.iter().enumerate() {
            let v = x[(n, j)];
            if v == 0.0 {
                continue;
            }
            for r in lo..hi {
                out[(r, j)] += t[(r, n)] * v;
            }
        }
    }
    out
}

/// One-step prediction `Pr(s_{t+1} = w) = sum_v T(w|v) Pr(s_t = v)`.
///
/// In joint mode the transition is `T_b kron T_m`, applied as
/// `T_m P T_b^T` on the `M_m x M_b` matrix form.
pub fn posterior_predict(posterior: &SupportPosterior, transition: &JointTransition) -> SupportPosterior {
    let (mb, mm) = (posterior.aod_bins, posterior.aoa_bins);
    assert_eq!(transition.aod.nrows(), mb);
    assert_eq!(transition.aoa.nrows(), mm);
    let paths = posterior
        .paths
        .iter()
        .map(|p| match p {
            PathPosterior::Joint(v) => {
                let pm = RMatrix::from_column_slice(mm, mb, v);
                let left = apply_kernel(&transition.aoa, &pm);
                let out = apply_kernel(&transition.aod, &left.transpose()).transpose();
                PathPosterior::Joint(out.as_slice().to_vec())
            }
            PathPosterior::Factored { aod, aoa } => PathPosterior::Factored {
                aod: apply_kernel(&transition.aod, &RMatrix::from_column_slice(mb, 1, aod)).as_slice().to_vec(),
                aoa: apply_kernel(&transition.aoa, &RMatrix::from_column_slice(mm, 1, aoa)).as_slice().to_vec(),
            },
        })
        .collect();
    SupportPosterior { aod_bins: mb, aoa_bins: mm, paths }
}
