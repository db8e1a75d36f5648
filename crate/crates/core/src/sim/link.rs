use rand::Rng;

use crate::array::complex_normal;
use crate::{CMatrix, CVector, C64};

/// Single-stream transmit/receive pair from the channel estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    /// Transmit vector `v` (unit norm, `N_b` entries).
    pub tx: CVector,
    /// Receive combiner `u` (unit norm, `N_m` entries).
    pub rx: CVector,
    /// `u^H H_hat v`, the largest singular value.
    pub gain: f64,
    /// The estimate was zero and fixed vectors were used.
    pub degraded: bool,
}

/// Dominant singular pair of `h_hat`: `v` is the top right singular vector,
/// `u` the top left one. Ties between singular values go to the lowest
/// index. A zero estimate falls back to the first unit vectors.
pub fn svd_precoder(h_hat: &CMatrix) -> Precoder {
    let (nm, nb) = h_hat.shape();
    if h_hat.iter().all(|x| x.norm_sqr() == 0.0) {
        let e = |n: usize| CVector::from_fn(n, |k, _| C64::new(if k == 0 { 1.0 } else { 0.0 }, 0.0));
        return Precoder { tx: e(nb), rx: e(nm), gain: 0.0, degraded: true };
    }
    let svd = h_hat.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("left vectors requested"), svd.v_t.expect("right vectors requested"));
    let mut k = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > svd.singular_values[k] {
            k = i;
        }
    }
    let rx = u.column(k).into_owned();
    let tx = vt.row(k).adjoint();
    Precoder { gain: svd.singular_values[k], tx, rx, degraded: false }
}

/// `u^H H v`.
pub fn effective_gain(h: &CMatrix, rx: &CVector, tx: &CVector) -> C64 {
    rx.dotc(&(h * tx))
}

/// One BPSK symbol through effective gain `e`: draws the bit, then the
/// complex noise, and detects with `sign(Re z)`. Returns whether the bit
/// was wrong.
pub fn bpsk_symbol_error<R: Rng + ?Sized>(e: C64, noise_var: f64, rng: &mut R) -> bool {
    let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let z = e * s + complex_normal(rng, noise_var);
    let decided = if z.re >= 0.0 { 1.0 } else { -1.0 };
    decided != s
}

/// BPSK over a sequence of per-symbol effective gains `u^H H_n v`.
/// Returns `(bit errors, bits)`.
pub fn transmit_data_block<R: Rng + ?Sized>(effective_gains: &[C64], noise_var: f64, rng: &mut R) -> (u64, u64) {
    let errors = effective_gains.iter().filter(|&&e| bpsk_symbol_error(e, noise_var, rng)).count();
    (errors as u64, effective_gains.len() as u64)
}
