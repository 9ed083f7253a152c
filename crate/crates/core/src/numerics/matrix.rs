//! Dense complex matrices in row-major order.
//!
//! The simulator works with small dense matrices (a dozen rows either way),
//! so the kernel favors clarity and strict determinism over blocked
//! performance tricks. All arithmetic is plain `f64` complex arithmetic in a
//! fixed evaluation order: two runs over the same inputs produce bitwise
//! identical results, which the reproducibility guarantees of the harness
//! rely on.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Shorthand constructor used all over the test suites.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Running count of complex multiplications and additions executed by the
/// instrumented matrix product. One complex multiplication is worth six real
/// flops, one complex addition two; [`FlopTally::flops`] applies exactly that
/// weighting so instrumented counts can be compared against the analytic
/// cost model.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct FlopTally {
    pub cmul: u64,
    pub cadd: u64,
}

impl FlopTally {
    /// Real flop equivalent of the tallied complex operations.
    pub fn flops(&self) -> u64 {
        6 * self.cmul + 2 * self.cadd
    }
}

/// Dense complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    /// Builds a matrix from row-major data, rejecting length mismatches and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::BadShape {
                op: "CMatrix::new",
                rows,
                cols,
            });
        }
        let m = CMatrix { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a square diagonal matrix from the given entries.
    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    /// Borrow row `r` as a contiguous slice.
    #[inline]
    pub fn row(&self, r: usize) -> &[Complex64] {
        debug_assert!(r < self.rows);
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.at(r, c)).collect()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    fn check_finite(&self) -> Result<()> {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.at(r, c);
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self.at(c, r).conj())
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> Self {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self.at(c, r))
    }

    pub fn conj(&self) -> Self {
        CMatrix::from_fn(self.rows, self.cols, |r, c| self.at(r, c).conj())
    }

    /// Matrix product. Panics on inner-dimension mismatch: shapes are
    /// internal invariants here, not user input.
    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let lhs_row = self.row(r);
            for c in 0..rhs.cols {
                let mut acc = Complex64::ZERO;
                for (k, &l) in lhs_row.iter().enumerate() {
                    acc += l * rhs.at(k, c);
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    /// Matrix product that tallies every complex multiply and add it
    /// performs. Each output entry costs `k` multiplications and `k - 1`
    /// additions for inner dimension `k`, matching the analytic rule
    /// `8·m·n·p − 2·m·p` real flops for an `m×n · n×p` product.
    pub fn matmul_counted(&self, rhs: &CMatrix, tally: &mut FlopTally) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul_counted: inner dimension");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let lhs_row = self.row(r);
            for c in 0..rhs.cols {
                let mut acc = lhs_row[0] * rhs.at(0, c);
                tally.cmul += 1;
                for (k, &l) in lhs_row.iter().enumerate().skip(1) {
                    acc += l * rhs.at(k, c);
                    tally.cmul += 1;
                    tally.cadd += 1;
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    /// Matrix-vector product (no conjugation of anything).
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len(), "matvec: dimension");
        (0..self.rows)
            .map(|r| {
                let mut acc = Complex64::ZERO;
                for (k, &v) in self.row(r).iter().enumerate() {
                    acc += v * x[k];
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add: shape");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub: shape");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        self.scale_c(Complex64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn scale_row_in_place(&mut self, r: usize, s: Complex64) {
        for c in 0..self.cols {
            let v = self.at(r, c) * s;
            self.set(r, c, v);
        }
    }

    pub fn scale_col_in_place(&mut self, c: usize, s: Complex64) {
        for r in 0..self.rows {
            let v = self.at(r, c) * s;
            self.set(r, c, v);
        }
    }

    /// Horizontal concatenation `[self | right]`.
    pub fn hcat(&self, right: &CMatrix) -> CMatrix {
        assert_eq!(self.rows, right.rows, "hcat: row count");
        CMatrix::from_fn(self.rows, self.cols + right.cols, |r, c| {
            if c < self.cols {
                self.at(r, c)
            } else {
                right.at(r, c - self.cols)
            }
        })
    }

    /// The leftmost `m` columns.
    pub fn take_cols(&self, m: usize) -> CMatrix {
        assert!(m <= self.cols, "take_cols: width");
        CMatrix::from_fn(self.rows, m, |r, c| self.at(r, c))
    }

    /// A copy of rows `range.start..range.end`.
    pub fn row_block(&self, range: std::ops::Range<usize>) -> CMatrix {
        assert!(range.end <= self.rows, "row_block: range");
        CMatrix::from_fn(range.len(), self.cols, |r, c| self.at(range.start + r, c))
    }

    pub fn col_norm_sq(&self, c: usize) -> f64 {
        (0..self.rows).map(|r| self.at(r, c).norm_sqr()).sum()
    }

    pub fn fro_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    /// Largest entry magnitude; handy in tolerance checks.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let v = self.at(r, c);
                write!(f, "{:+.4}{:+.4}i ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Hermitian inner product `Σ conj(a_i)·b_i`.
#[inline]
pub fn dot_h(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Unconjugated inner product `Σ a_i·b_i`.
#[inline]
pub fn dot_u(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared Euclidean norm of a complex vector.
#[inline]
pub fn norm_sq(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Solves `A·x = b` for Hermitian positive-definite `A` via an in-place
/// Cholesky factorization. Small systems only (combiner covariances).
pub fn solve_hermitian_pd(a: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::BadShape {
            op: "solve_hermitian_pd",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    // Lower-triangular factor L with A = L·Lᴴ.
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.at(j, j).re;
        for k in 0..j {
            d -= l.at(j, k).norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::SingularSystem);
        }
        let djj = d.sqrt();
        l.set(j, j, Complex64::new(djj, 0.0));
        for i in j + 1..n {
            let mut v = a.at(i, j);
            for k in 0..j {
                v -= l.at(i, k) * l.at(j, k).conj();
            }
            l.set(i, j, v / djj);
        }
    }
    // Forward substitution L·y = b.
    let mut y = vec![Complex64::ZERO; n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l.at(i, k) * y[k];
        }
        y[i] = v / l.at(i, i);
    }
    // Back substitution Lᴴ·x = y.
    let mut x = vec![Complex64::ZERO; n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in i + 1..n {
            v -= l.at(k, i).conj() * x[k];
        }
        x[i] = v / l.at(i, i);
    }
    Ok(x)
}

/// Inverts a unit-diagonal lower-triangular matrix by forward substitution,
/// one unit-basis column at a time. The result is again unit-diagonal lower
/// triangular.
pub fn invert_unit_lower(l: &CMatrix) -> CMatrix {
    let n = l.rows();
    assert_eq!(l.cols(), n, "invert_unit_lower: square");
    let mut inv = CMatrix::zeros(n, n);
    for j in 0..n {
        inv.set(j, j, Complex64::ONE);
        for i in j + 1..n {
            let mut v = Complex64::ZERO;
            for k in j..i {
                v -= l.at(i, k) * inv.at(k, j);
            }
            inv.set(i, j, v);
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_bad_lengths_and_nans() {
        assert!(CMatrix::new(2, 2, vec![Complex64::ZERO; 3]).is_err());
        let mut data = vec![Complex64::ZERO; 4];
        data[2] = c64(f64::NAN, 0.0);
        match CMatrix::new(2, 2, data) {
            Err(Error::NonFinite { row: 1, col: 0 }) => {}
            other => panic!("expected NonFinite(1,0), got {other:?}"),
        }
    }

    #[test]
    fn matmul_matches_hand_product() {
        let a = CMatrix::new(
            2,
            2,
            vec![c64(1.0, 1.0), c64(0.0, 2.0), c64(3.0, 0.0), c64(1.0, -1.0)],
        )
        .unwrap();
        let b = CMatrix::identity(2);
        assert_eq!(a.matmul(&b), a);

        // (1+i)(2) + (2i)(i) = 2+2i − 2 = 2i
        let x = vec![c64(2.0, 0.0), c64(0.0, 1.0)];
        let y = a.matvec(&x);
        assert!((y[0] - c64(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn counted_product_counts_exactly() {
        let a = CMatrix::from_fn(3, 5, |r, c| c64((r + c) as f64, 1.0));
        let b = CMatrix::from_fn(5, 4, |r, c| c64(1.0, (r * c) as f64));
        let mut tally = FlopTally::default();
        let prod = a.matmul_counted(&b, &mut tally);
        assert_eq!(prod, a.matmul(&b));
        assert_eq!(tally.cmul, 3 * 5 * 4);
        assert_eq!(tally.cadd, 3 * 4 * 4);
        // 6·mnp + 2·mp(n−1) = 8mnp − 2mp
        assert_eq!(tally.flops(), 8 * 3 * 5 * 4 - 2 * 3 * 4);
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let a = CMatrix::new(1, 2, vec![c64(1.0, 2.0), c64(3.0, -4.0)]).unwrap();
        let ah = a.adjoint();
        assert_eq!(ah.rows(), 2);
        assert_eq!(ah.at(0, 0), c64(1.0, -2.0));
        assert_eq!(ah.at(1, 0), c64(3.0, 4.0));
    }

    #[test]
    fn cholesky_solve_recovers_solution() {
        // A = M·Mᴴ + I is Hermitian positive definite.
        let m = CMatrix::new(
            2,
            2,
            vec![c64(1.0, 0.5), c64(0.0, 1.0), c64(2.0, -1.0), c64(1.0, 0.0)],
        )
        .unwrap();
        let a = m.matmul(&m.adjoint()).add(&CMatrix::identity(2));
        let x_true = vec![c64(1.0, -2.0), c64(0.5, 3.0)];
        let b = a.matvec(&x_true);
        let x = solve_hermitian_pd(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).norm() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = CMatrix::new(
            2,
            2,
            vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            solve_hermitian_pd(&a, &[Complex64::ONE; 2]),
            Err(Error::SingularSystem)
        ));
    }

    #[test]
    fn unit_lower_inverse_round_trips() {
        let l = CMatrix::new(
            3,
            3,
            vec![
                c64(1.0, 0.0),
                c64(0.0, 0.0),
                c64(0.0, 0.0),
                c64(0.7, -0.3),
                c64(1.0, 0.0),
                c64(0.0, 0.0),
                c64(-1.2, 0.4),
                c64(0.5, 2.0),
                c64(1.0, 0.0),
            ],
        )
        .unwrap();
        let inv = invert_unit_lower(&l);
        let prod = l.matmul(&inv);
        assert!(prod.sub(&CMatrix::identity(3)).max_abs() < 1e-14);
        // Inverse of unit lower triangular stays unit lower triangular.
        assert_eq!(inv.at(0, 1), Complex64::ZERO);
        assert_eq!(inv.at(1, 1), Complex64::ONE);
    }
}
