//! Complex dense linear algebra and seeded sampling.
//!
//! Everything downstream — precoder synthesis, combining, rate evaluation —
//! is built on this small kernel: row-major complex matrices, a Householder
//! LQ factorization with a fixed sign convention, a Jacobi SVD, and
//! addressable ChaCha substreams for reproducible Monte-Carlo sampling.

pub mod lq;
pub mod matrix;
pub mod random;
pub mod svd;

pub use lq::{lq_decompose, LqFactors, RANK_TOLERANCE};
pub use matrix::{c64, dot_h, dot_u, invert_unit_lower, norm_sq, solve_hermitian_pd, CMatrix, FlopTally};
pub use random::{sample_cgauss, substream, StreamPurpose};
pub use svd::{svd, SvdFactors};
