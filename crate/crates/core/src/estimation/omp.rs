use super::{argmax_excluding, regularized_solve, ChannelEstimate};
use crate::{CVector, SensingOperator};

/// Orthogonal matching pursuit with a least-squares refit after every
/// selection. Runs exactly `num_paths` iterations.
pub fn omp_estimate<S: SensingOperator + ?Sized>(y: &CVector, phi: &S, num_paths: usize) -> ChannelEstimate {
    assert_eq!(y.len(), phi.nrows(), "measurement length must match Phi rows");
    let num_paths = num_paths.min(phi.ncols());
    let mut est = ChannelEstimate::empty();
    let mut residual = y.clone();
    est.residual_norms.push(residual.norm());

    for _ in 0..num_paths {
        let corr = phi.adjoint_apply(&residual);
        let scores: Vec<f64> = corr.iter().map(|c| c.norm_sqr()).collect();
        let Some(pick) = argmax_excluding(&scores, &est.support) else { break };
        est.support.push(pick);

        let phi_s = phi.submatrix(&est.support);
        let (gains, jittered) = regularized_solve(&phi_s, y, 0.0);
        est.ill_conditioned |= jittered;
        residual = y - &phi_s * &gains;
        est.gains = gains;
        est.residual_norms.push(residual.norm());
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{assemble_dense, complex_normal, dictionary_matrix};
    use crate::training::{cycling_beams, dft_combiner, simulate_measurement, KroneckerSensing};
    use crate::{sim_rng, AngleGrid, ArrayGeometry, CMatrix, ChannelState, C64};

    fn random_phi(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = sim_rng(seed, 7);
        CMatrix::from_fn(rows, cols, |_, _| complex_normal(&mut rng, 1.0))
    }

    #[test]
    fn one_sparse_noiseless() {
        let phi = random_phi(12, 30, 1);
        let y = phi.column(17) * C64::new(3.0, 0.0);
        let est = omp_estimate(&y, &phi, 1);
        assert_eq!(est.support, vec![17]);
        assert!((est.gains[0] - C64::new(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_measurement_breaks_ties_low() {
        let phi = random_phi(8, 20, 2);
        let est = omp_estimate(&CVector::zeros(8), &phi, 3);
        assert_eq!(est.support, vec![0, 1, 2]);
        assert!(est.gains.iter().all(|g| g.norm() == 0.0));
    }

    #[test]
    fn residual_orthogonal_and_monotone() {
        let phi = random_phi(16, 40, 3);
        let mut rng = sim_rng(3, 1);
        let y = CVector::from_fn(16, |_, _| complex_normal(&mut rng, 1.0));
        let est = omp_estimate(&y, &phi, 5);
        let r = &y - phi.submatrix(&est.support) * &est.gains;
        assert!(phi.submatrix(&est.support).ad_mul(&r).norm() < 1e-8);
        for w in est.residual_norms.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn singular_refit_is_flagged() {
        // two identical columns: selecting both makes the Gram matrix singular
        let mut phi = random_phi(6, 4, 4);
        let c0 = phi.column(0).into_owned();
        phi.set_column(1, &c0);
        let mut rng = sim_rng(4, 1);
        let y = CVector::from_fn(6, |_, _| complex_normal(&mut rng, 1.0));
        let est = omp_estimate(&y, &phi, 4);
        assert!(est.ill_conditioned);
        assert!(est.gains.iter().all(|g| g.re.is_finite() && g.im.is_finite()));
    }

    #[test]
    fn recovers_on_grid_three_path_channels() {
        // N = M = 16, 32 cycling beams, DFT combiner, noiseless. The
        // exhaustive-correlation oracle: the true support is recovered iff
        // the estimate reproduces the channel.
        let g = ArrayGeometry::half_wavelength(16);
        let grid = AngleGrid::new(16).unwrap();
        let a = dictionary_matrix(&g, &grid);
        let f = cycling_beams(32, &g);
        let w = dft_combiner(16);
        let phi = KroneckerSensing::new(&f, &w, &a, &a).unwrap();
        let mut hits = 0;
        for trial in 0..100 {
            let mut rng = sim_rng(100 + trial, 0);
            let st = ChannelState::random(3, &grid, &grid, &mut rng);
            let h = assemble_dense(&st, &g, &g, &grid, &grid);
            let y = simulate_measurement(&h, &f, &w, 1e-300, &mut rng).unwrap().stacked();
            let est = omp_estimate(&y, &phi, 3);
            let mut got = est.support.clone();
            got.sort();
            let mut want: Vec<usize> = st.paths.iter().map(|p| p.aod_bin * 16 + p.aoa_bin).collect();
            want.sort();
            hits += usize::from(got == want);
        }
        assert!(hits >= 99, "recovered {hits}/100");
    }
}
