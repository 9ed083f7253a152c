//! SINR and rate computation: instantaneous common/private rates, the
//! closed-form per-antenna common SINRs, average sum-rates conditioned on a
//! channel estimate (ASR), and the ergodic sum-rate (ESR) Monte-Carlo
//! engine with branch selection and common-stream power search.
//!
//! Two rate models coexist. [`private_sinrs`] / [`instantaneous_rates`]
//! rate a single realization from its end-to-end effective gains through
//! the linearized columns — the right picture for the linear baseline and
//! for perfect CSIT. The Monte-Carlo engine additionally knows how a THP
//! chain behaves under a channel-estimation error: the modulo recursion
//! emits white unit-power folded symbols at the physical transmit power,
//! pre-subtracts the estimated triangle, and leaves only the unexplained
//! part of the realized channel as interference (see [`ThpRateView`] on
//! `branch_asr`).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{draw_error_unit, draw_estimate, ErrorModel, SystemConfig};
use crate::combining::{
    combined_sinr_from_vectors, minmax_select, mmsec_combiner, mrc_combiner,
    CombinerKind,
};
use crate::error::{Error, Result};
use crate::multibranch::{branch_patterns, Pattern};
use crate::numerics::{c64, dot_u, invert_unit_lower, CMatrix, StreamPurpose};
use crate::precoding::{BetaConvention, RsPrecoder, ThpFilters};
use crate::scheme::{SchemeSpec, Structure};

fn rate(gamma: f64) -> f64 {
    (1.0 + gamma).log2()
}

/// Instantaneous rates of one realization: per-user common rates and
/// per-stream private rates, in bits/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSample {
    pub common_rate_per_user: Vec<f64>,
    pub private_rate_per_stream: Vec<f64>,
    pub delta_used: f64,
}

impl RateSample {
    /// Common rate actually delivered: the worst user must decode it.
    pub fn common_min(&self) -> f64 {
        self.common_rate_per_user.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn private_sum(&self) -> f64 {
        self.private_rate_per_stream.iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.common_min() + self.private_sum()
    }
}

/// Average rates conditioned on one channel estimate (one branch): sample
/// means over the inner error draws. Common rates are indexed by the
/// original user, regardless of any reordering pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct AsrEstimate {
    pub common_per_user: Vec<f64>,
    pub private_per_stream: Vec<f64>,
    pub branch_index: usize,
}

impl AsrEstimate {
    pub fn private_sum(&self) -> f64 {
        self.private_per_stream.iter().sum()
    }

    /// Branch-selection metric: delivered common rate plus private sum.
    pub fn score(&self) -> f64 {
        let min_common = self
            .common_per_user
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        min_common + self.private_sum()
    }
}

/// Ergodic summary over the outer channel ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Ergodic common rate per user (mean of the per-estimate ASR).
    pub asr_common_per_user: Vec<f64>,
    /// Ergodic private sum-rate; identical to `esr_private` (kept for
    /// symmetry with the per-user common vector).
    pub asr_private: f64,
    /// Delivered ergodic common rate: the minimum over users.
    pub esr_common: f64,
    pub esr_private: f64,
    pub esr_total: f64,
    /// 95% normal-approximation halfwidth on `esr_total`, from the
    /// per-channel totals of the limiting user.
    pub ci_halfwidth: f64,
    pub n_channels: usize,
    pub n_errors: usize,
    pub delta: f64,
}

/// Private-stream SINRs after ideal common-stream SIC. `E = H_true·Q` holds
/// the effective gains: stream i is decoded at receive chain i against the
/// other streams' leakage. Any receiver-side diagonal scaling multiplies
/// signal and noise alike, so it never appears here.
pub fn private_sinrs(h_true: &CMatrix, q_cols: &CMatrix, sigma_n2: f64) -> Vec<f64> {
    let e = h_true.matmul(q_cols);
    private_sinrs_from_e(&e, sigma_n2)
}

fn private_sinrs_from_e(e: &CMatrix, sigma_n2: f64) -> Vec<f64> {
    let m = e.cols();
    (0..m)
        .map(|i| {
            let mut interference = 0.0;
            for j in 0..m {
                if j != i {
                    interference += e.at(i, j).norm_sqr();
                }
            }
            e.at(i, i).norm_sqr() / (interference + sigma_n2)
        })
        .collect()
}

/// Interference power seen at receive chain `r` while decoding the common
/// stream: every private stream counts.
fn antenna_private_power(e: &CMatrix, r: usize) -> f64 {
    (0..e.cols()).map(|j| e.at(r, j).norm_sqr()).sum()
}

/// Instantaneous rates for one realization. `combiners` holds one combining
/// vector per user (length = that user's antenna count) and is required
/// exactly when the precoder carries a common stream.
pub fn instantaneous_rates(
    h_true: &CMatrix,
    cfg: &SystemConfig,
    pre: &RsPrecoder,
    combiners: Option<&[Vec<Complex64>]>,
) -> Result<RateSample> {
    let k_users = cfg.num_users();
    let private_rate_per_stream: Vec<f64> =
        private_sinrs(h_true, &pre.q_cols, cfg.sigma_n2)
            .into_iter()
            .map(rate)
            .collect();
    let mut common_rate_per_user = vec![0.0; k_users];
    if pre.delta > 0.0 {
        let ws = combiners.ok_or_else(|| {
            Error::Config("a common stream needs one combiner per user".into())
        })?;
        if ws.len() != k_users {
            return Err(Error::Config(format!(
                "expected {} combiners, got {}",
                k_users,
                ws.len()
            )));
        }
        let h_c = h_true.matvec(&pre.p_c);
        let e = h_true.matmul(&pre.q_cols);
        for (k, w) in ws.iter().enumerate() {
            let rows = cfg.user_rows(k);
            let h_c_blk: Vec<Complex64> = rows.clone().map(|r| h_c[r]).collect();
            let h_q: Vec<Vec<Complex64>> = (0..e.cols())
                .map(|j| rows.clone().map(|r| e.at(r, j)).collect())
                .collect();
            let gamma = combined_sinr_from_vectors(w, &h_c_blk, &h_q, cfg.sigma_n2)?;
            common_rate_per_user[k] = rate(gamma);
        }
    }
    Ok(RateSample {
        common_rate_per_user,
        private_rate_per_stream,
        delta_used: pre.delta,
    })
}

/// Closed-form per-antenna common-stream SINR for the ZF designs, with the
/// power scale normalized out (β = 1) and a uniform second moment
/// `sigma_v2` for the feedback-recursion output. `antenna` indexes the
/// receive chain (needed for the decentralized self-interference row norm).
pub fn closed_form_common_sinr(
    h_hat_row: &[Complex64],
    h_tilde_row: &[Complex64],
    antenna: usize,
    p_c: &[Complex64],
    filters: &ThpFilters,
    sigma_v2: f64,
    sigma_n2: f64,
) -> f64 {
    let num = dot_u(h_hat_row, p_c).norm_sqr();
    let common_err = dot_u(h_tilde_row, p_c).norm_sqr();
    let m = filters.l.rows();
    let nt = filters.f.rows();
    let mut leak = 0.0;
    for j in 0..m {
        let fj: Vec<Complex64> = (0..nt).map(|n| filters.f.at(n, j)).collect();
        let s = filters.stream_scale(j);
        leak += s * s * dot_u(h_tilde_row, &fj).norm_sqr();
    }
    let self_term = match filters.structure {
        Structure::Centralized => 1.0,
        Structure::Decentralized => {
            (0..filters.l.cols()).map(|j| filters.l.at(antenna, j).norm_sqr()).sum()
        }
    };
    num / (common_err + sigma_v2 * (self_term + leak) + sigma_n2)
}

/// `‖H_kᵀ·q_{b_i}‖²` evaluated by the term-by-term expansion of the
/// feedforward/scaling/feedback product (β = 1), rather than by forming the
/// effective column first. Exercises the index and scaling conventions of
/// the factored filters.
pub fn mrc_gain_expansion(hk: &CMatrix, filters: &ThpFilters, stream: usize) -> f64 {
    let m = filters.b.rows();
    let b_inv = invert_unit_lower(&filters.b);
    let mut total = 0.0;
    for p in 0..hk.rows() {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..hk.cols() {
            for j in 0..m {
                acc += hk.at(p, n)
                    * filters.f.at(n, j)
                    * filters.stream_scale(j)
                    * b_inv.at(j, stream);
            }
        }
        total += acc.norm_sqr();
    }
    total
}

fn user_of_row(cfg: &SystemConfig, row: usize) -> usize {
    (0..cfg.num_users())
        .find(|&k| cfg.user_rows(k).contains(&row))
        .expect("row inside the stacked channel")
}

/// Statistical view of a THP transmitter for the averaged-rate engine.
///
/// The feedback recursion emits modulo-folded symbols `v̌` that are white
/// with unit power; the antennas see them through the physical columns
/// `W = β·F·S`. Against the *estimated* channel those gains are the
/// triangle `β·L·S`, and the recursion turns each stream's triangle row
/// into a single decodable tap of gain `β·s_i·l_ii` — known interference
/// costs nothing. Whatever the estimate does not explain (the MMSE design
/// residual plus the realized CSIT error) stays as interference with the
/// full white-symbol power. The linear baseline has no folding and keeps
/// the plain effective-gain model.
struct ThpRateView {
    structure: Structure,
    /// Physical transmit columns `β·F·S`, Nt×M: the antenna-domain carrier
    /// of folded symbol j at its actual power.
    w_cols: CMatrix,
    /// Pre-subtracted triangle `β·L·S`, Nr×M; rows past the stream count
    /// stay zero because no recursion acts there.
    tri: CMatrix,
    /// Decodable signal tap per stream, `β·s_i·l_ii` (real positive).
    diag: Vec<f64>,
    /// Re-summed folded-symbol tap: in the centralized designs the
    /// transmit-side scaling makes `β·s_i·l_ii = β`, so while an antenna
    /// decodes the common stream its own private stream shows up as one
    /// unit-power source of amplitude β.
    beta: f64,
}

fn thp_rate_view(filters: &ThpFilters, beta: f64, m: usize, nr: usize) -> ThpRateView {
    let nt = filters.f.rows();
    let mut w_cols = CMatrix::zeros(nt, m);
    for j in 0..m {
        let s = beta * filters.stream_scale(j);
        for n in 0..nt {
            w_cols.set(n, j, filters.f.at(n, j) * s);
        }
    }
    let mut tri = CMatrix::zeros(nr, m);
    for i in 0..m.min(nr) {
        for j in 0..=i {
            tri.set(i, j, filters.l.at(i, j) * (beta * filters.stream_scale(j)));
        }
    }
    let diag: Vec<f64> = (0..m)
        .map(|j| beta * filters.stream_scale(j) * filters.l.at(j, j).re)
        .collect();
    ThpRateView { structure: filters.structure, w_cols, tri, diag, beta }
}

/// Average rates for one channel estimate under one reordering pattern:
/// builds the precoder once from the reordered estimate and averages the
/// per-draw rates over the given unit-variance error draws, scaled by
/// `√sigma_e2` — here `sigma_e2` is the complex per-entry variance actually
/// applied (see [`ErrorModel::entry_variance`]). An empty draw list means
/// perfect CSIT: a single evaluation on the estimate itself.
///
/// Every design rates stream i against its realized own tap — the
/// estimated effective diagonal plus whatever the realized channel adds on
/// that same column — with the realized cross-stream leakage as
/// interference. THP designs get there through [`ThpRateView`]: the
/// recursion's folded symbols are white at the physical transmit power,
/// the estimated triangle re-sums into the per-stream decodable tap, and
/// only what the estimate cannot explain leaks across streams.
///
/// Min-Max combiners are resolved here: the antenna with the best average
/// per-antenna common rate is selected per user, so its average rate is the
/// user's ASR. MRC/MMSEc combiners are rebuilt from the realized channel on
/// every draw.
pub fn branch_asr(
    cfg: &SystemConfig,
    scheme: &SchemeSpec,
    h_hat: &CMatrix,
    pattern: &Pattern,
    unit_errors: &[CMatrix],
    sigma_e2: f64,
    delta: f64,
) -> Result<AsrEstimate> {
    let k_users = cfg.num_users();
    let nr = cfg.nr();
    let m = cfg.streams;
    let hp = pattern.apply_rows(h_hat);
    let pre = RsPrecoder::build(scheme.design, &hp, cfg, delta, BetaConvention::default())?;
    let view = pre.filters.as_ref().map(|f| thp_rate_view(f, pre.beta, m, nr));
    let rs_active = scheme.is_rs() && delta > 0.0;
    let combiner = scheme.combiner;

    let n_draws = unit_errors.len().max(1);
    let mut antenna_rate = vec![0.0; nr];
    let mut user_rate = vec![0.0; k_users];
    let mut private_rate = vec![0.0; m];
    let sqrt_e = sigma_e2.sqrt();

    for d in 0..n_draws {
        let h_true = if unit_errors.is_empty() {
            hp.clone()
        } else {
            hp.add(&pattern.apply_rows(&unit_errors[d]).scale(sqrt_e))
        };
        // Private rates, plus the matrix of unit-power interference sources
        // the common stream sees (one column per private stream) and the
        // re-summed own-stream tap amplitude (centralized THP only; zero
        // means the columns already carry everything).
        let (src, tap) = match &view {
            Some(v) => {
                let e_true = h_true.matmul(&v.w_cols);
                let unexplained = e_true.sub(&v.tri);
                for (i, acc) in private_rate.iter_mut().enumerate() {
                    // The own column rides the same folded symbol the
                    // detector locks onto, so its unexplained part perturbs
                    // the signal tap rather than adding an independent
                    // interferer — the same treatment the effective-gain
                    // rule gives the diagonal.
                    let signal =
                        (c64(v.diag[i], 0.0) + unexplained.at(i, i)).norm_sqr();
                    let mut interference = 0.0;
                    for j in 0..m {
                        if j != i {
                            interference += unexplained.at(i, j).norm_sqr();
                        }
                    }
                    *acc += rate(signal / (interference + cfg.sigma_n2));
                }
                match v.structure {
                    Structure::Centralized => (unexplained, v.beta),
                    Structure::Decentralized => (e_true, 0.0),
                }
            }
            None => {
                let e = h_true.matmul(&pre.q_cols);
                for (i, acc) in private_rate.iter_mut().enumerate() {
                    let mut interference = 0.0;
                    for j in 0..m {
                        if j != i {
                            interference += e.at(i, j).norm_sqr();
                        }
                    }
                    *acc += rate(e.at(i, i).norm_sqr() / (interference + cfg.sigma_n2));
                }
                (e, 0.0)
            }
        };
        if rs_active {
            let h_c = h_true.matvec(&pre.p_c);
            match combiner.expect("rate-splitting scheme carries a combiner") {
                CombinerKind::MinMax => {
                    for r in 0..nr {
                        let own = if r < m { tap * tap } else { 0.0 };
                        let g = h_c[r].norm_sqr()
                            / (antenna_private_power(&src, r) + own + cfg.sigma_n2);
                        antenna_rate[r] += rate(g);
                    }
                }
                kind => {
                    for blk in 0..k_users {
                        let rows = cfg.user_rows(blk);
                        let h_c_blk: Vec<Complex64> =
                            rows.clone().map(|r| h_c[r]).collect();
                        let mut h_q: Vec<Vec<Complex64>> = (0..m)
                            .map(|j| rows.clone().map(|r| src.at(r, j)).collect())
                            .collect();
                        if tap > 0.0 {
                            for (local, r) in rows.clone().enumerate() {
                                if r < m {
                                    let mut own =
                                        vec![Complex64::ZERO; h_c_blk.len()];
                                    own[local] = c64(tap, 0.0);
                                    h_q.push(own);
                                }
                            }
                        }
                        let w = match kind {
                            CombinerKind::Mrc => mrc_combiner(&h_c_blk)?,
                            CombinerKind::Mmsec => {
                                mmsec_combiner(&h_c_blk, &h_q, cfg.sigma_n2)?
                            }
                            CombinerKind::MinMax => unreachable!(),
                        };
                        let g =
                            combined_sinr_from_vectors(&w, &h_c_blk, &h_q, cfg.sigma_n2)?;
                        user_rate[blk] += rate(g);
                    }
                }
            }
        }
    }

    let inv = 1.0 / n_draws as f64;
    let mut common_per_user = vec![0.0; k_users];
    if rs_active {
        for blk in 0..k_users {
            let rows = cfg.user_rows(blk);
            let blk_rate = match combiner.expect("checked above") {
                CombinerKind::MinMax => {
                    let slice: Vec<f64> =
                        rows.clone().map(|r| antenna_rate[r] * inv).collect();
                    slice[minmax_select(&slice)]
                }
                _ => user_rate[blk] * inv,
            };
            let orig = user_of_row(cfg, pattern.original_row(rows.start));
            common_per_user[orig] = blk_rate;
        }
    }
    let private_per_stream: Vec<f64> =
        private_rate.into_iter().map(|a| a * inv).collect();
    Ok(AsrEstimate {
        common_per_user,
        private_per_stream,
        branch_index: pattern.index,
    })
}

/// Average rates for one channel estimate without reordering, drawing
/// `n_err` fresh CSIT errors from the substream scoped by `channel_index`.
pub fn average_rates(
    cfg: &SystemConfig,
    scheme: &SchemeSpec,
    h_hat: &CMatrix,
    error_model: &ErrorModel,
    delta: f64,
    n_err: usize,
    channel_index: u32,
) -> Result<AsrEstimate> {
    if n_err == 0 {
        return Err(Error::Config("need at least one error draw".into()));
    }
    error_model.validate()?;
    let sigma_e2 = error_model.entry_variance(cfg.etr);
    let identity = Pattern::identity(cfg.nr());
    let unit_errors: Vec<CMatrix> = if sigma_e2 > 0.0 {
        (0..n_err)
            .map(|d| draw_error_unit(cfg, StreamPurpose::ChannelError, channel_index, d as u32))
            .collect()
    } else {
        Vec::new()
    };
    branch_asr(cfg, scheme, h_hat, &identity, &unit_errors, sigma_e2, delta)
}

fn check_delta(scheme: &SchemeSpec, delta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Config(format!("delta {delta} outside [0, 1]")));
    }
    if delta > 0.0 && !scheme.is_rs() {
        return Err(Error::Config(format!(
            "scheme {} has no common stream; delta must be 0",
            scheme.id()
        )));
    }
    Ok(())
}

fn channel_patterns(cfg: &SystemConfig, scheme: &SchemeSpec) -> Result<Vec<Pattern>> {
    if scheme.branches <= 1 {
        Ok(vec![Pattern::identity(cfg.nr())])
    } else {
        branch_patterns(&cfg.nk, scheme.branches)
    }
}

/// Resampling budget for numerically rank-deficient channel estimates. Each
/// retry draws from its own substream, so accepted realizations never shift.
const ESTIMATE_RETRIES: u32 = 4;

fn channel_best_asr(
    cfg: &SystemConfig,
    scheme: &SchemeSpec,
    patterns: &[Pattern],
    sigma_e2: f64,
    delta: f64,
    ch: u32,
) -> Result<AsrEstimate> {
    let unit_errors: Vec<CMatrix> = if sigma_e2 > 0.0 {
        (0..cfg.mc_errors)
            .map(|d| draw_error_unit(cfg, StreamPurpose::ChannelError, ch, d as u32))
            .collect()
    } else {
        Vec::new()
    };
    for retry in 0..ESTIMATE_RETRIES {
        let h_hat = draw_estimate(cfg, StreamPurpose::ChannelEstimate, ch, retry);
        let mut best: Option<AsrEstimate> = None;
        let mut rank_failure = None;
        for pattern in patterns {
            match branch_asr(cfg, scheme, &h_hat, pattern, &unit_errors, sigma_e2, delta) {
                Ok(asr) => {
                    if best.as_ref().map_or(true, |b| asr.score() > b.score()) {
                        best = Some(asr);
                    }
                }
                Err(e @ Error::RankDeficient { .. }) => {
                    rank_failure = Some(e);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        match (best, rank_failure) {
            (Some(asr), None) => return Ok(asr),
            (_, Some(e)) if retry + 1 == ESTIMATE_RETRIES => return Err(e),
            (_, Some(_)) => {
                eprintln!(
                    "resampling rank-deficient channel estimate {ch} (attempt {})",
                    retry + 1
                );
            }
            (None, None) => unreachable!("at least one pattern"),
        }
    }
    unreachable!("retry loop always returns")
}

/// Ergodic sum-rate: outer Monte-Carlo mean over channel estimates of the
/// per-estimate average rates, with the delivered common rate taken as the
/// minimum over users of the ergodic per-user common rates. Outer
/// realizations run in parallel; every realization derives its own RNG
/// substreams, so results are identical for any thread count.
pub fn ergodic_sum_rate(
    cfg: &SystemConfig,
    scheme: &SchemeSpec,
    error_model: &ErrorModel,
    delta: f64,
) -> Result<RateReport> {
    cfg.validate()?;
    error_model.validate()?;
    check_delta(scheme, delta)?;
    let sigma_e2 = error_model.entry_variance(cfg.etr);
    let patterns = channel_patterns(cfg, scheme)?;
    let n = cfg.mc_channels;
    let per_channel: Vec<Result<AsrEstimate>> = (0..n as u32)
        .into_par_iter()
        .map(|ch| channel_best_asr(cfg, scheme, &patterns, sigma_e2, delta, ch))
        .collect();
    let mut samples = Vec::with_capacity(n);
    for r in per_channel {
        samples.push(r?);
    }

    let k_users = cfg.num_users();
    let inv = 1.0 / n as f64;
    let mut asr_common_per_user = vec![0.0; k_users];
    let mut asr_private = 0.0;
    for s in &samples {
        for (acc, &v) in asr_common_per_user.iter_mut().zip(&s.common_per_user) {
            *acc += v;
        }
        asr_private += s.private_sum();
    }
    for v in asr_common_per_user.iter_mut() {
        *v *= inv;
    }
    asr_private *= inv;

    let (k_star, esr_common) = asr_common_per_user
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, v)| if v < best.1 { (k, v) } else { best });
    let esr_private = asr_private;
    let esr_total = esr_common + esr_private;

    // Spread of the per-channel totals of the limiting user.
    let ci_halfwidth = if n > 1 {
        let totals: Vec<f64> = samples
            .iter()
            .map(|s| s.common_per_user[k_star] + s.private_sum())
            .collect();
        let mean = totals.iter().sum::<f64>() * inv;
        let var = totals.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>()
            / (n - 1) as f64;
        1.96 * (var / n as f64).sqrt()
    } else {
        0.0
    };

    Ok(RateReport {
        asr_common_per_user,
        asr_private,
        esr_common,
        esr_private,
        esr_total,
        ci_halfwidth,
        n_channels: n,
        n_errors: if sigma_e2 > 0.0 { cfg.mc_errors } else { 1 },
        delta,
    })
}

/// Grid search for the common-stream power fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSearch {
    /// Number of grid points over [0, 1]; must be ≥ 2.
    pub grid_points: usize,
    /// Optional reduced Monte-Carlo budgets for the search phase; `None`
    /// evaluates every grid point on the full configured ensemble.
    pub mc_channels: Option<usize>,
    pub mc_errors: Option<usize>,
}

impl Default for DeltaSearch {
    fn default() -> Self {
        DeltaSearch { grid_points: 41, mc_channels: None, mc_errors: None }
    }
}

/// Picks `δ ∈ {0, 1/(G−1), …, 1}` maximizing the Monte-Carlo ESR estimate;
/// ties break toward smaller δ. Returns the winning fraction and its report
/// on the full ensemble.
pub fn allocate_common_power(
    cfg: &SystemConfig,
    scheme: &SchemeSpec,
    error_model: &ErrorModel,
    search: &DeltaSearch,
) -> Result<(f64, RateReport)> {
    if search.grid_points < 2 {
        return Err(Error::Config("delta grid needs at least two points".into()));
    }
    if !scheme.is_rs() {
        return Err(Error::Config(format!(
            "scheme {} has no common stream to allocate power to",
            scheme.id()
        )));
    }
    let mut eval_cfg = cfg.clone();
    if let Some(c) = search.mc_channels {
        eval_cfg.mc_channels = c;
    }
    if let Some(e) = search.mc_errors {
        eval_cfg.mc_errors = e;
    }
    eval_cfg.validate()?;
    let g = search.grid_points;
    let mut best: Option<(f64, RateReport)> = None;
    for i in 0..g {
        let delta = i as f64 / (g - 1) as f64;
        let report = ergodic_sum_rate(&eval_cfg, scheme, error_model, delta)?;
        if best.as_ref().map_or(true, |(_, b)| report.esr_total > b.esr_total) {
            best = Some((delta, report));
        }
    }
    let (delta_o, report) = best.expect("non-empty grid");
    let reduced = eval_cfg.mc_channels != cfg.mc_channels
        || eval_cfg.mc_errors != cfg.mc_errors;
    let final_report = if reduced {
        ergodic_sum_rate(cfg, scheme, error_model, delta_o)?
    } else {
        report
    };
    Ok((delta_o, final_report))
}
