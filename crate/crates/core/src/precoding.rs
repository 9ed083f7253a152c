//! Transmit-side synthesis: THP filter chains (ZF/MMSE × centralized/
//! decentralized), the common-stream precoder, the power split between
//! common and private streams, and a linear zero-forcing baseline.
//!
//! Throughout, `h_hat` is the transposed channel estimate `Ĥᵀ` (Nr×Nt):
//! row i is the estimated channel of receive antenna i.

use num_complex::Complex64;

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::numerics::{
    c64, invert_unit_lower, lq_decompose, norm_sq, solve_hermitian_pd, svd,
    CMatrix,
};
use crate::scheme::{Design, Structure};

/// THP precoder family. The linear ZF baseline is not a THP design and is
/// handled by [`zf_linear_precoder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThpDesign {
    Zf,
    Mmse,
}

/// Reading of the ZF-cTHP power-normalization denominator.
///
/// The centralized chain transmits `F·C·v`, whose per-stream column powers
/// are `1/l_jj²`, so the budget-preserving denominator is `Σ_j 1/l_jj²`;
/// that is the default. The literal `Σ_j l_jj²` reading is kept selectable
/// for comparison, but it does not keep the average transmit power at the
/// budget.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BetaConvention {
    #[default]
    EffectiveColumnPower,
    LiteralDiagonalPower,
}

/// The three-filter THP chain plus the factorization it came from.
#[derive(Debug, Clone)]
pub struct ThpFilters {
    pub design: ThpDesign,
    pub structure: Structure,
    /// Antenna-domain feedforward, Nt×Nr: `Qᴴ` for ZF, `Q₁ᴴ` for MMSE
    /// (the extended-channel feedforward after selecting the first Nt rows).
    pub f: CMatrix,
    /// Feedback filter, Nr×Nr lower triangular with exact unit diagonal.
    pub b: CMatrix,
    /// Diagonal of the scaling matrix C: real positive entries `1/l_jj`.
    pub c_diag: Vec<f64>,
    /// Lower-triangular LQ factor of the (extended) channel, Nr×Nr, with
    /// real positive diagonal.
    pub l: CMatrix,
}

impl ThpFilters {
    /// Per-stream transmit-side amplitude scale: `C_jj` when the scaling
    /// matrix sits at the transmitter, 1 when it sits at the receivers.
    pub fn stream_scale(&self, j: usize) -> f64 {
        match self.structure {
            Structure::Centralized => self.c_diag[j],
            Structure::Decentralized => 1.0,
        }
    }

    /// The scaling matrix C as a dense diagonal matrix.
    pub fn c_matrix(&self) -> CMatrix {
        let entries: Vec<Complex64> =
            self.c_diag.iter().map(|&c| c64(c, 0.0)).collect();
        CMatrix::diag(&entries)
    }

    fn from_factors(
        design: ThpDesign,
        structure: Structure,
        l: CMatrix,
        f: CMatrix,
    ) -> Self {
        let nr = l.rows();
        let c_diag: Vec<f64> = (0..nr).map(|j| 1.0 / l.at(j, j).re).collect();
        let b = CMatrix::from_fn(nr, nr, |i, j| {
            if i == j {
                c64(1.0, 0.0)
            } else if i > j {
                match structure {
                    Structure::Decentralized => l.at(i, j) * c_diag[i],
                    Structure::Centralized => l.at(i, j) * c_diag[j],
                }
            } else {
                c64(0.0, 0.0)
            }
        });
        ThpFilters { design, structure, f, b, c_diag, l }
    }
}

/// ZF-THP filters from the LQ factorization `Ĥᵀ = LQ`:
/// `F = Qᴴ`, `C = diag(l_11, …)⁻¹`, `B = CL` (dTHP) or `LC` (cTHP).
pub fn zf_thp_filters(h_hat: &CMatrix, structure: Structure) -> Result<ThpFilters> {
    let lq = lq_decompose(h_hat)?;
    Ok(ThpFilters::from_factors(
        ThpDesign::Zf,
        structure,
        lq.l,
        lq.q.adjoint(),
    ))
}

/// MMSE-THP filters from the LQ factorization of the extended channel
/// `Ȟ = [Ĥᵀ, √(Nr·σ_n²/Etr)·I]`; the stored feedforward is `Q₁ᴴ`, the
/// adjoint of the first Nt columns of `Q̌`.
pub fn mmse_thp_filters(
    h_hat: &CMatrix,
    etr: f64,
    sigma_n2: f64,
    structure: Structure,
) -> Result<ThpFilters> {
    if !(etr > 0.0) || !(sigma_n2 > 0.0) {
        return Err(Error::Config(format!(
            "MMSE filters need positive Etr and noise power, got Etr={etr}, \
             sigma_n2={sigma_n2}"
        )));
    }
    let nr = h_hat.rows();
    let nt = h_hat.cols();
    let reg = (nr as f64 * sigma_n2 / etr).sqrt();
    let extended = h_hat.hcat(&CMatrix::identity(nr).scale(reg));
    let lq = lq_decompose(&extended)?;
    let q1 = lq.q.take_cols(nt);
    Ok(ThpFilters::from_factors(
        ThpDesign::Mmse,
        structure,
        lq.l,
        q1.adjoint(),
    ))
}

/// Common-stream precoder: the dominant right-singular direction of `Ĥᵀ`,
/// scaled so that `‖p_c‖² = delta·Etr`. `delta = 0` yields the zero vector
/// without touching the SVD.
pub fn common_precoder(
    h_hat: &CMatrix,
    delta: f64,
    etr: f64,
) -> Result<Vec<Complex64>> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Config(format!(
            "common power fraction must lie in [0, 1], got {delta}"
        )));
    }
    let nt = h_hat.cols();
    if delta == 0.0 {
        return Ok(vec![c64(0.0, 0.0); nt]);
    }
    let factors = svd(h_hat)?;
    let direction = factors.v.col(0);
    let target = (delta * etr).sqrt();
    let scale = target / norm_sq(&direction).sqrt();
    Ok(direction.into_iter().map(|z| z * scale).collect())
}

/// Power normalization for the private THP streams: `β` such that the
/// average private transmit power equals `Etr − delta·Etr` when the
/// v-domain symbols have unit power. `delta = 1` yields `β = 0`.
pub fn beta_scaling(
    filters: &ThpFilters,
    m: usize,
    etr: f64,
    delta: f64,
    convention: BetaConvention,
) -> f64 {
    assert!(m >= 1 && m <= filters.l.rows(), "stream count out of range");
    let private_power = (etr - delta * etr).max(0.0);
    let denom = match (filters.design, filters.structure, convention) {
        (ThpDesign::Zf, Structure::Centralized, BetaConvention::LiteralDiagonalPower) => {
            (0..m).map(|j| filters.l.at(j, j).re.powi(2)).sum::<f64>()
        }
        _ => (0..m)
            .map(|j| {
                let s = filters.stream_scale(j);
                s * s * filters.f.col_norm_sq(j)
            })
            .sum::<f64>(),
    };
    (private_power / denom).sqrt()
}

/// Effective private transmit columns with `β` absorbed: column j is the
/// antenna-domain direction carrying v-domain symbol j, i.e. the columns of
/// `β·F·S·B⁻¹` restricted to the leading `m` streams, where `S` is the
/// structure's transmit-side scaling.
pub fn effective_private_columns(
    filters: &ThpFilters,
    m: usize,
    beta: f64,
) -> CMatrix {
    assert!(m >= 1 && m <= filters.l.rows(), "stream count out of range");
    let b_lead = filters.b.row_block(0..m).take_cols(m);
    let mut mix = invert_unit_lower(&b_lead);
    for j in 0..m {
        let s = filters.stream_scale(j);
        if s != 1.0 {
            mix.scale_row_in_place(j, c64(s, 0.0));
        }
    }
    filters.f.take_cols(m).matmul(&mix).scale(beta)
}

/// Linear zero-forcing baseline: columns proportional to the right
/// pseudo-inverse of `Ĥᵀ`, scaled by one uniform factor so the total
/// private power equals `(1 − delta)·Etr`. The uniform scale preserves the
/// pseudo-inverse geometry, so the end-to-end estimated channel stays a
/// scaled identity (every stream sees the same gain).
pub fn zf_linear_precoder(
    h_hat: &CMatrix,
    etr: f64,
    delta: f64,
    m: usize,
) -> Result<CMatrix> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Config(format!(
            "common power fraction must lie in [0, 1], got {delta}"
        )));
    }
    let nr = h_hat.rows();
    assert!(m >= 1 && m <= nr, "stream count out of range");
    let gram = h_hat.matmul(&h_hat.adjoint());
    // Right pseudo-inverse Ĥ*(ĤᵀĤ*)⁻¹ assembled column by column.
    let mut inv_cols = CMatrix::zeros(nr, m);
    for j in 0..m {
        let mut e = vec![c64(0.0, 0.0); nr];
        e[j] = c64(1.0, 0.0);
        let x = solve_hermitian_pd(&gram, &e)?;
        for i in 0..nr {
            inv_cols.set(i, j, x[i]);
        }
    }
    let p = h_hat.adjoint().matmul(&inv_cols);
    let total: f64 = (0..m).map(|j| p.col_norm_sq(j)).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::SingularSystem);
    }
    let beta = ((etr - delta * etr) / total).sqrt();
    Ok(p.scale(beta))
}

/// A fully synthesized transmitter for one channel estimate: the common
/// precoder, the effective private columns (power scaling absorbed), and —
/// for THP designs — the filter chain needed by the symbol path and the
/// closed-form rate expressions.
#[derive(Debug, Clone)]
pub struct RsPrecoder {
    pub design: Design,
    /// Fraction of the power budget allocated to the common stream.
    pub delta: f64,
    /// Common precoder, length Nt; all zeros when `delta = 0`.
    pub p_c: Vec<Complex64>,
    /// Effective private columns, Nt×M.
    pub q_cols: CMatrix,
    /// THP filter chain; `None` for the linear baseline.
    pub filters: Option<ThpFilters>,
    /// Private power scale (1 for the linear baseline, where the uniform
    /// normalization is absorbed into the columns).
    pub beta: f64,
}

impl RsPrecoder {
    /// Synthesize the transmitter for `h_hat` (= `Ĥᵀ`, Nr×Nt).
    pub fn build(
        design: Design,
        h_hat: &CMatrix,
        cfg: &SystemConfig,
        delta: f64,
        convention: BetaConvention,
    ) -> Result<RsPrecoder> {
        let m = cfg.streams;
        let p_c = common_precoder(h_hat, delta, cfg.etr)?;
        let (q_cols, filters, beta) = match design {
            Design::ZfLinear => {
                (zf_linear_precoder(h_hat, cfg.etr, delta, m)?, None, 1.0)
            }
            Design::ZfThp(structure) => {
                let filters = zf_thp_filters(h_hat, structure)?;
                let beta =
                    beta_scaling(&filters, m, cfg.etr, delta, convention);
                let q = effective_private_columns(&filters, m, beta);
                (q, Some(filters), beta)
            }
            Design::MmseThp(structure) => {
                let filters =
                    mmse_thp_filters(h_hat, cfg.etr, cfg.sigma_n2, structure)?;
                let beta =
                    beta_scaling(&filters, m, cfg.etr, delta, convention);
                let q = effective_private_columns(&filters, m, beta);
                (q, Some(filters), beta)
            }
        };
        Ok(RsPrecoder { design, delta, p_c, q_cols, filters, beta })
    }

    /// Number of private streams.
    pub fn streams(&self) -> usize {
        self.q_cols.cols()
    }
}
