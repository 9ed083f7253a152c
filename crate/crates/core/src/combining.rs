//! Receiver-side common-stream combiners (per-antenna selection, MRC,
//! MMSE) and the combined common-stream SINR.
//!
//! Every function works on the effective per-user vectors seen by user k's
//! Nk antennas: `h_c = Hkᵀ·p_c` (common) and `h_qj = Hkᵀ·q_{b_j}` (one per
//! private stream, power scaling already absorbed in the columns).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{dot_h, norm_sq, solve_hermitian_pd, CMatrix};
pub use crate::scheme::CombinerKind;

/// A resolved combining vector for one user.
#[derive(Debug, Clone)]
pub struct Combiner {
    pub kind: CombinerKind,
    pub w: Vec<Complex64>,
}

/// Effective common vector and per-stream private vectors at user k's
/// antennas: `(Hkᵀ·p_c, [Hkᵀ·q_{b_1}, …])`.
pub fn effective_vectors(
    hk_true: &CMatrix,
    p_c: &[Complex64],
    q_cols: &CMatrix,
) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
    let h_c = hk_true.matvec(p_c);
    let h_q: Vec<Vec<Complex64>> =
        (0..q_cols.cols()).map(|j| hk_true.matvec(&q_cols.col(j))).collect();
    (h_c, h_q)
}

/// Combined common-stream SINR for an arbitrary combining vector:
/// `γ = |wᴴh_c|² / (Σ_j |wᴴh_qj|² + ‖w‖²·σ_n²)`.
pub fn combined_sinr_from_vectors(
    w: &[Complex64],
    h_c: &[Complex64],
    h_q: &[Vec<Complex64>],
    sigma_n2: f64,
) -> Result<f64> {
    let w_norm_sq = norm_sq(w);
    if !(w_norm_sq > 0.0) || !w_norm_sq.is_finite() {
        return Err(Error::ZeroCombiner);
    }
    let signal = dot_h(w, h_c).norm_sqr();
    let interference: f64 =
        h_q.iter().map(|hq| dot_h(w, hq).norm_sqr()).sum();
    Ok(signal / (interference + w_norm_sq * sigma_n2))
}

/// Combined common-stream SINR computed from the channel block directly.
pub fn combined_sinr(
    w: &[Complex64],
    hk_true: &CMatrix,
    p_c: &[Complex64],
    q_cols: &CMatrix,
    sigma_n2: f64,
) -> Result<f64> {
    let (h_c, h_q) = effective_vectors(hk_true, p_c, q_cols);
    combined_sinr_from_vectors(w, &h_c, &h_q, sigma_n2)
}

/// MRC combiner `w = h_c / ‖h_c‖²`.
pub fn mrc_combiner(h_c: &[Complex64]) -> Result<Vec<Complex64>> {
    let power = norm_sq(h_c);
    if !(power > 0.0) {
        return Err(Error::DegenerateCommonChannel);
    }
    Ok(h_c.iter().map(|&z| z / power).collect())
}

/// MMSE combiner `w = R⁻¹h_c` with the received-signal covariance
/// `R = h_c·h_cᴴ + Σ_j h_qj·h_qjᴴ + σ_n²·I` (unit-variance symbols).
pub fn mmsec_combiner(
    h_c: &[Complex64],
    h_q: &[Vec<Complex64>],
    sigma_n2: f64,
) -> Result<Vec<Complex64>> {
    let nk = h_c.len();
    let mut r = CMatrix::from_fn(nk, nk, |i, j| {
        let mut v = h_c[i] * h_c[j].conj();
        for hq in h_q {
            v += hq[i] * hq[j].conj();
        }
        v
    });
    for i in 0..nk {
        let d = r.at(i, i);
        r.set(i, i, d + sigma_n2);
    }
    solve_hermitian_pd(&r, h_c)
}

/// Index of the best antenna given per-antenna average rates; ties go to
/// the lowest index.
pub fn minmax_select(antenna_rates: &[f64]) -> usize {
    let mut best = 0;
    for (i, &r) in antenna_rates.iter().enumerate().skip(1) {
        if r > antenna_rates[best] {
            best = i;
        }
    }
    best
}

/// Standard basis combiner selecting one antenna.
pub fn basis_combiner(nk: usize, index: usize) -> Vec<Complex64> {
    let mut w = vec![Complex64::ZERO; nk];
    w[index] = Complex64::ONE;
    w
}
