//! LQ factorization of wide complex matrices via Householder reflections.
//!
//! `A = L·Q` with `L` square lower triangular and `Q` having orthonormal
//! rows. The factorization runs a standard complex Householder QR on `Aᴴ`
//! and transposes back, then absorbs a diagonal phase so that every `L`
//! diagonal entry comes out real and non-negative. That sign convention is
//! load-bearing: the diagonal entries act as per-stream gains downstream and
//! as the denominators of the receive-side scaling, so they must be unique
//! and real for results to be reproducible across runs.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::matrix::CMatrix;

/// Relative threshold below which the factorization reports rank loss.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Result of [`lq_decompose`].
#[derive(Debug, Clone)]
pub struct LqFactors {
    /// `m×m` lower triangular with real, non-negative diagonal.
    pub l: CMatrix,
    /// `m×n` with orthonormal rows (`Q·Qᴴ = I`).
    pub q: CMatrix,
}

/// One Householder reflector `H = I − τ·v·vᴴ`, acting on rows `offset..`.
struct Reflector {
    offset: usize,
    v: Vec<Complex64>,
    tau: f64,
}

/// Thin QR of a tall matrix (`rows ≥ cols`) by Householder reflections.
/// Returns `(Q, R)` with `Q` of shape `rows×cols` (orthonormal columns) and
/// `R` square upper triangular.
fn householder_qr_thin(b: &CMatrix) -> (CMatrix, CMatrix) {
    let n = b.rows();
    let m = b.cols();
    debug_assert!(n >= m);
    let mut w = b.clone();
    let mut reflectors: Vec<Reflector> = Vec::with_capacity(m);

    for k in 0..m {
        let norm_x: f64 = (k..n).map(|i| w.at(i, k).norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            reflectors.push(Reflector {
                offset: k,
                v: Vec::new(),
                tau: 0.0,
            });
            continue;
        }
        let x0 = w.at(k, k);
        // Choose the reflection target −e^{i·arg(x0)}·‖x‖ so that the pivot
        // of the Householder vector never cancels.
        let phase = if x0 == Complex64::ZERO {
            Complex64::ONE
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        let mut v: Vec<Complex64> = (k..n).map(|i| w.at(i, k)).collect();
        v[0] -= alpha;
        let vns: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vns;

        // Apply H to the remaining columns of the working matrix.
        for j in k..m {
            let mut s = Complex64::ZERO;
            for (i, vi) in v.iter().enumerate() {
                s += vi.conj() * w.at(k + i, j);
            }
            let f = tau * s;
            for (i, vi) in v.iter().enumerate() {
                let updated = w.at(k + i, j) - f * vi;
                w.set(k + i, j, updated);
            }
        }
        // The column is now exactly (… , α, 0, …); store it that way to keep
        // the triangle clean of roundoff dust.
        w.set(k, k, alpha);
        for i in k + 1..n {
            w.set(i, k, Complex64::ZERO);
        }
        reflectors.push(Reflector { offset: k, v, tau });
    }

    let mut r = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            r.set(i, j, w.at(i, j));
        }
    }

    // Accumulate the thin Q by applying the reflectors, last to first, to the
    // leading columns of the identity.
    let mut q = CMatrix::zeros(n, m);
    for i in 0..m {
        q.set(i, i, Complex64::ONE);
    }
    for refl in reflectors.iter().rev() {
        if refl.tau == 0.0 {
            continue;
        }
        for j in 0..m {
            let mut s = Complex64::ZERO;
            for (i, vi) in refl.v.iter().enumerate() {
                s += vi.conj() * q.at(refl.offset + i, j);
            }
            let f = refl.tau * s;
            for (i, vi) in refl.v.iter().enumerate() {
                let updated = q.at(refl.offset + i, j) - f * vi;
                q.set(refl.offset + i, j, updated);
            }
        }
    }
    (q, r)
}

/// LQ factorization of a wide (or square) matrix.
///
/// Requires `rows ≤ cols` and numerically full row rank; a diagonal-magnitude
/// ratio below [`RANK_TOLERANCE`] reports [`Error::RankDeficient`] so the
/// Monte-Carlo driver can resample the offending channel draw. The output is
/// deterministic down to the bit for identical input.
pub fn lq_decompose(a: &CMatrix) -> Result<LqFactors> {
    let m = a.rows();
    let n = a.cols();
    if m > n {
        return Err(Error::BadShape {
            op: "lq_decompose",
            rows: m,
            cols: n,
        });
    }

    let (q_thin, r) = householder_qr_thin(&a.adjoint());
    let mut l = r.adjoint(); // m×m lower triangular
    let mut q = q_thin.adjoint(); // m×n, orthonormal rows

    // Absorb phases so diag(L) is real and non-negative: L ← L·D̄, Q ← D·Q
    // with D = diag(l_ii/|l_ii|) leaves the product unchanged.
    for i in 0..m {
        let d = l.at(i, i);
        let mag = d.norm();
        if mag > 0.0 {
            let ph = d / mag;
            l.scale_col_in_place(i, ph.conj());
            l.set(i, i, Complex64::new(mag, 0.0));
            q.scale_row_in_place(i, ph);
        }
    }
    // Force the strict upper triangle to exact zeros.
    for i in 0..m {
        for j in i + 1..m {
            l.set(i, j, Complex64::ZERO);
        }
    }

    let mut dmin = f64::INFINITY;
    let mut dmax: f64 = 0.0;
    for i in 0..m {
        let v = l.at(i, i).re;
        dmin = dmin.min(v);
        dmax = dmax.max(v);
    }
    if dmax == 0.0 || dmin <= RANK_TOLERANCE * dmax {
        let ratio = if dmax == 0.0 { 0.0 } else { dmin / dmax };
        return Err(Error::RankDeficient { ratio });
    }

    Ok(LqFactors { l, q })
}
