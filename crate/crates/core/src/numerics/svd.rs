//! Thin singular value decomposition by one-sided Jacobi rotations.
//!
//! The simulator only ever factors small dense matrices (channel estimates,
//! a dozen rows and columns), where one-sided Jacobi is simple, accurate to
//! machine precision, and — because the sweep order is fixed — exactly
//! reproducible. The decomposition is `A = U·diag(s)·Vᴴ` with `s` sorted in
//! descending order; `U` and `V` carry `min(rows, cols)` orthonormal columns.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::matrix::CMatrix;

const MAX_SWEEPS: usize = 64;
const OFF_TOLERANCE: f64 = 1e-14;

/// Thin SVD factors: `u` is `m×r`, `s` has length `r`, `v` is `n×r`, where
/// `r = min(m, n)`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

/// Column-major working form used by the Jacobi sweeps.
struct Columns {
    cols: Vec<Vec<Complex64>>,
}

impl Columns {
    fn from_matrix(m: &CMatrix) -> Self {
        Columns {
            cols: (0..m.cols()).map(|j| m.col(j)).collect(),
        }
    }

    fn identity(n: usize) -> Self {
        Columns {
            cols: (0..n)
                .map(|j| {
                    let mut e = vec![Complex64::ZERO; n];
                    e[j] = Complex64::ONE;
                    e
                })
                .collect(),
        }
    }

    /// Applies the 2×2 unitary `[[c, s], [−s̄·e^{−iφ}, c·e^{−iφ}]]` from the
    /// right to columns `p` and `q`.
    fn rotate(&mut self, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
        let n = self.cols[p].len();
        for i in 0..n {
            let a = self.cols[p][i];
            let b = self.cols[q][i];
            self.cols[p][i] = a * c - b * s * phase.conj();
            self.cols[q][i] = a * s + b * c * phase.conj();
        }
    }
}

/// One-sided Jacobi on a tall matrix: returns `(W, J)` where the columns of
/// `W = T·J` are mutually orthogonal and `J` is unitary.
fn orthogonalize_columns(t: &CMatrix) -> Result<(Columns, Columns)> {
    let q_dim = t.cols();
    let mut work = Columns::from_matrix(t);
    let mut acc = Columns::identity(q_dim);

    for sweep in 0..MAX_SWEEPS {
        let mut worst: f64 = 0.0;
        for p in 0..q_dim.saturating_sub(1) {
            for q in p + 1..q_dim {
                let app: f64 = work.cols[p].iter().map(|z| z.norm_sqr()).sum();
                let aqq: f64 = work.cols[q].iter().map(|z| z.norm_sqr()).sum();
                let apq: Complex64 = work.cols[p]
                    .iter()
                    .zip(&work.cols[q])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let mag = apq.norm();
                let denom = (app * aqq).sqrt();
                if denom == 0.0 || mag <= OFF_TOLERANCE * denom {
                    continue;
                }
                worst = worst.max(mag / denom);

                // Diagonalize [[app, apq], [conj(apq), aqq]]: strip the phase
                // of the coupling, then a real symmetric Schur rotation.
                let phase = apq / mag;
                let zeta = (aqq - app) / (2.0 * mag);
                let tan = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    1.0 / (zeta - (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + tan * tan).sqrt();
                let s = tan * c;

                work.rotate(p, q, c, s, phase);
                acc.rotate(p, q, c, s, phase);
            }
        }
        if worst <= OFF_TOLERANCE {
            return Ok((work, acc));
        }
        let _ = sweep;
    }
    Err(Error::SvdDidNotConverge { sweeps: MAX_SWEEPS })
}

/// Completes column `idx` of an orthonormal set when its natural direction
/// vanished (zero singular value): picks the standard basis vector least
/// aligned with the existing columns and orthogonalizes it.
fn complete_column(cols: &mut [Vec<Complex64>], idx: usize) {
    let dim = cols[0].len();
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for cand in 0..dim {
        let mut v = vec![Complex64::ZERO; dim];
        v[cand] = Complex64::ONE;
        for other in cols.iter().take(idx) {
            let proj: Complex64 = other.iter().zip(v.iter()).map(|(o, x)| o.conj() * x).sum();
            for i in 0..dim {
                v[i] -= proj * other[i];
            }
        }
        let ns: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if best.as_ref().map_or(true, |(b, _)| ns > *b) {
            best = Some((ns, v));
        }
        if ns > 0.5 {
            break;
        }
    }
    let (ns, v) = best.expect("non-empty candidate set");
    let inv = 1.0 / ns.sqrt();
    cols[idx] = v.into_iter().map(|z| z * inv).collect();
}

/// Thin SVD with singular values sorted in descending order.
pub fn svd(a: &CMatrix) -> Result<SvdFactors> {
    let (m, n) = (a.rows(), a.cols());
    let wide = m < n;
    // Work on the tall side so Jacobi orthogonalizes the fewer columns.
    let t = if wide { a.adjoint() } else { a.clone() };
    let r = t.cols();

    let (w, j) = orthogonalize_columns(&t)?;

    let mut order: Vec<usize> = (0..r).collect();
    let norms: Vec<f64> = (0..r)
        .map(|c| w.cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap().then(x.cmp(&y)));

    let smax = norms[order[0]];
    let mut left: Vec<Vec<Complex64>> = Vec::with_capacity(r); // normalized W columns
    let mut right: Vec<Vec<Complex64>> = Vec::with_capacity(r); // J columns
    let mut s = Vec::with_capacity(r);
    for &c in &order {
        s.push(norms[c]);
        right.push(j.cols[c].clone());
        left.push(w.cols[c].clone());
    }
    for (i, sv) in s.iter().enumerate() {
        if smax > 0.0 && *sv > f64::EPSILON * smax {
            let inv = 1.0 / sv;
            for z in left[i].iter_mut() {
                *z *= inv;
            }
        } else {
            complete_column(&mut left, i);
        }
    }

    let tall_u = CMatrix::from_fn(t.rows(), r, |i, c| left[c][i]);
    let tall_v = CMatrix::from_fn(r, r, |i, c| right[c][i]);

    // For a wide input we factored Aᴴ = (tall_u)·diag(s)·(tall_v)ᴴ, so
    // A = tall_v·diag(s)·tall_uᴴ.
    let (u, v) = if wide { (tall_v, tall_u) } else { (tall_u, tall_v) };
    Ok(SvdFactors { u, s, v })
}
