//! Symbol-domain THP chain with finite alphabets: the feedback recursion,
//! modulo-lattice arithmetic, transmit assembly, and receiver-side scaling,
//! modulo, and slicing. The rate path never touches this module; it exists
//! to verify the end-to-end cancellation identities on real constellations
//! and to measure the transmit-power and modulo effects that the rate
//! analysis abstracts away.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::Modulation;
use crate::error::{Error, Result};
use crate::numerics::{c64, norm_sq, CMatrix};
use crate::precoding::RsPrecoder;
use crate::scheme::Structure;

/// Constellation period for the modulo lattice: `λ = √(6·M_o·E_k/(M_o−1))`
/// for square QAM with per-stream power `E_k`.
pub fn lambda_for(modulation: Modulation, e_k: f64) -> Result<f64> {
    let order = match modulation {
        Modulation::Qpsk => 4.0,
        Modulation::Qam16 => 16.0,
        Modulation::Gaussian => return Err(Error::UnsupportedModulation),
    };
    Ok((6.0 * order * e_k / (order - 1.0)).sqrt())
}

/// Per-stream modulo periods.
#[derive(Debug, Clone)]
pub struct ModuloSpec {
    pub lambda: Vec<f64>,
}

impl ModuloSpec {
    /// Same period on every one of `m` streams (uniform power allocation).
    pub fn uniform(modulation: Modulation, e_k: f64, m: usize) -> Result<Self> {
        Ok(ModuloSpec { lambda: vec![lambda_for(modulation, e_k)?; m] })
    }
}

/// Element-wise modulo onto the half-open cell `[−λ/2, λ/2)` in each of the
/// real and imaginary parts: `v − λ⌊Re(v)/λ + ½⌋ − jλ⌊Im(v)/λ + ½⌋`.
pub fn modulo(v: Complex64, lambda: f64) -> Complex64 {
    debug_assert!(lambda > 0.0);
    let re = v.re - lambda * (v.re / lambda + 0.5).floor();
    let im = v.im - lambda * (v.im / lambda + 0.5).floor();
    c64(re, im)
}

/// Unit-average-power constellation points in a canonical deterministic
/// order (real level outer, imaginary level inner, descending).
pub fn constellation(modulation: Modulation) -> Result<Vec<Complex64>> {
    let levels: Vec<f64> = match modulation {
        Modulation::Qpsk => vec![1.0, -1.0],
        Modulation::Qam16 => vec![3.0, 1.0, -1.0, -3.0],
        Modulation::Gaussian => return Err(Error::UnsupportedModulation),
    };
    let power: f64 = levels.iter().map(|l| l * l).sum::<f64>() / levels.len() as f64;
    let scale = 1.0 / (2.0 * power).sqrt();
    let mut points = Vec::with_capacity(levels.len() * levels.len());
    for &re in &levels {
        for &im in &levels {
            points.push(c64(re * scale, im * scale));
        }
    }
    Ok(points)
}

/// Draw `m` symbols uniformly from the constellation.
pub fn draw_symbols(
    points: &[Complex64],
    m: usize,
    rng: &mut impl Rng,
) -> Vec<Complex64> {
    (0..m).map(|_| points[rng.random_range(0..points.len())]).collect()
}

/// Nearest constellation point by Euclidean distance; ties resolve to the
/// earliest point in the canonical order.
pub fn slice_nearest(z: Complex64, points: &[Complex64]) -> Complex64 {
    let mut best = points[0];
    let mut best_d = (z - best).norm_sqr();
    for &p in &points[1..] {
        let d = (z - p).norm_sqr();
        if d < best_d {
            best = p;
            best_d = d;
        }
    }
    best
}

/// One encoded THP frame: source symbols `s`, recursion output `v`, and the
/// implied lattice perturbation `d = B·v − s`.
#[derive(Debug, Clone)]
pub struct SymbolFrame {
    pub s: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub d: Vec<Complex64>,
}

impl SymbolFrame {
    /// `s + d`, the effective symbols seen through the inverted feedback.
    pub fn perturbed(&self) -> Vec<Complex64> {
        self.s.iter().zip(&self.d).map(|(&s, &d)| s + d).collect()
    }
}

/// Feedback recursion with modulo reduction: `v_1 = s_1` and
/// `v_i = modulo(s_i − Σ_{j<i} b_{ij}·v_j)`. `b` must be unit-diagonal
/// lower-triangular of the same size as `s`.
pub fn thp_encode(s: &[Complex64], b: &CMatrix, spec: &ModuloSpec) -> SymbolFrame {
    let m = s.len();
    assert_eq!(b.rows(), m, "feedback filter size mismatch");
    assert_eq!(b.cols(), m, "feedback filter must be square");
    assert!(spec.lambda.len() >= m, "missing modulo periods");
    let mut v = Vec::with_capacity(m);
    for i in 0..m {
        let mut acc = s[i];
        for j in 0..i {
            acc -= b.at(i, j) * v[j];
        }
        v.push(if i == 0 { acc } else { modulo(acc, spec.lambda[i]) });
    }
    // d = B·v − s is lattice-valued by construction of the modulo.
    let mut d = Vec::with_capacity(m);
    for i in 0..m {
        let mut acc = -s[i];
        for j in 0..=i {
            acc += b.at(i, j) * v[j];
        }
        d.push(acc);
    }
    SymbolFrame { s: s.to_vec(), v, d }
}

/// Antenna-domain transmit vector `x = p_c·s_c + Q·(s + d)`, where `Q` holds
/// the effective private columns (power scaling absorbed). Equivalent to
/// feeding `v` through the feedforward/scaling chain.
pub fn transmit(
    frame: &SymbolFrame,
    precoder: &RsPrecoder,
    s_c: Complex64,
) -> Vec<Complex64> {
    let private = precoder.q_cols.matvec(&frame.perturbed());
    private
        .into_iter()
        .zip(&precoder.p_c)
        .map(|(p, &pc)| p + pc * s_c)
        .collect()
}

/// Received samples `y = Hᵀ·x + n` in the stream domain.
pub fn propagate(
    h_true: &CMatrix,
    x: &[Complex64],
    noise: Option<&[Complex64]>,
) -> Vec<Complex64> {
    let mut y = h_true.matvec(x);
    if let Some(n) = noise {
        assert_eq!(n.len(), y.len());
        for (yi, &ni) in y.iter_mut().zip(n) {
            *yi += ni;
        }
    }
    y
}

/// Ideal common-stream SIC: subtract the known common contribution
/// `s_c·Hᵀp_c` (no decision errors propagated).
pub fn sic_subtract(
    y: &[Complex64],
    h_true: &CMatrix,
    p_c: &[Complex64],
    s_c: Complex64,
) -> Vec<Complex64> {
    let common = h_true.matvec(p_c);
    y.iter().zip(&common).map(|(&yi, &ci)| yi - ci * s_c).collect()
}

/// Receiver-side private processing for stream i: apply the structure's
/// receive scaling (the diagonal C for dTHP, nothing for cTHP), undo the
/// power scale β, then reduce onto the modulo cell. Returns the soft
/// symbols ready for slicing.
pub fn receive_private(
    y_after_sic: &[Complex64],
    precoder: &RsPrecoder,
    spec: &ModuloSpec,
) -> Result<Vec<Complex64>> {
    let filters = precoder.filters.as_ref().ok_or_else(|| {
        Error::Config("symbol path requires a THP design".into())
    })?;
    if !(precoder.beta > 0.0) {
        return Err(Error::Config(
            "private decoding requires positive private power".into(),
        ));
    }
    let m = precoder.streams();
    assert!(y_after_sic.len() >= m, "missing received streams");
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let scale = match filters.structure {
            Structure::Decentralized => filters.c_diag[i],
            Structure::Centralized => 1.0,
        };
        let z = y_after_sic[i] * (scale / precoder.beta);
        out.push(modulo(z, spec.lambda[i]));
    }
    Ok(out)
}

/// Private decode result for one frame.
#[derive(Debug, Clone)]
pub struct PrivateDecode {
    pub soft: Vec<Complex64>,
    pub hard: Vec<Complex64>,
    /// Per-stream symbol-error indicators against the transmitted frame.
    pub errors: Vec<bool>,
}

/// Slice the private soft symbols and compare with the transmitted ones.
pub fn decode_private(
    y_after_sic: &[Complex64],
    precoder: &RsPrecoder,
    spec: &ModuloSpec,
    points: &[Complex64],
    frame: &SymbolFrame,
) -> Result<PrivateDecode> {
    let soft = receive_private(y_after_sic, precoder, spec)?;
    let hard: Vec<Complex64> =
        soft.iter().map(|&z| slice_nearest(z, points)).collect();
    let errors: Vec<bool> = hard
        .iter()
        .zip(&frame.s)
        .map(|(&h, &s)| (h - s).norm() > 1e-6)
        .collect();
    Ok(PrivateDecode { soft, hard, errors })
}

/// Per-stream second moment of the recursion output `v` over random frames
/// (the inverse of the power-loss factor τ, per stream).
pub fn measure_v_variance(
    b: &CMatrix,
    points: &[Complex64],
    spec: &ModuloSpec,
    n_frames: usize,
    rng: &mut impl Rng,
) -> Vec<f64> {
    assert!(n_frames >= 1);
    let m = b.rows();
    let mut acc = vec![0.0; m];
    for _ in 0..n_frames {
        let s = draw_symbols(points, m, rng);
        let frame = thp_encode(&s, b, spec);
        for (a, &vi) in acc.iter_mut().zip(&frame.v) {
            *a += vi.norm_sqr();
        }
    }
    acc.into_iter().map(|a| a / n_frames as f64).collect()
}

/// Empirical mean transmit power `E[‖x‖²]` over random frames with a random
/// unit-power common symbol.
pub fn measure_transmit_power(
    precoder: &RsPrecoder,
    b: &CMatrix,
    points: &[Complex64],
    spec: &ModuloSpec,
    n_frames: usize,
    rng: &mut impl Rng,
) -> f64 {
    assert!(n_frames >= 1);
    let m = precoder.streams();
    let mut acc = 0.0;
    for _ in 0..n_frames {
        let s = draw_symbols(points, m, rng);
        let frame = thp_encode(&s, b, spec);
        let s_c = points[rng.random_range(0..points.len())];
        let x = transmit(&frame, precoder, s_c);
        acc += norm_sq(&x);
    }
    acc / n_frames as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SystemConfig;
    use crate::numerics::{sample_cgauss, substream, StreamPurpose};
    use crate::precoding::{BetaConvention, RsPrecoder};
    use crate::scheme::Design;

    const RT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn lambda_matches_published_values() {
        assert!((lambda_for(Modulation::Qpsk, 1.0).unwrap() - 2.0 * RT2).abs() < 1e-12);
        assert!(
            (lambda_for(Modulation::Qam16, 1.0).unwrap() - 8.0 / 10.0_f64.sqrt()).abs()
                < 1e-12
        );
        assert!(
            (lambda_for(Modulation::Qpsk, 4.0).unwrap() - 4.0 * RT2).abs() < 1e-12
        );
        assert!(lambda_for(Modulation::Gaussian, 1.0).is_err());
    }

    #[test]
    fn modulo_hand_cases() {
        let l = 2.0 * RT2;
        let z = c64(0.5, 0.5);
        assert_eq!(modulo(z, l), z, "in-cell input unchanged");
        assert!(modulo(c64(l, 0.0), l).norm() < 1e-15, "lattice point wraps to 0");
        let wrapped = modulo(c64(1.5 * RT2, 0.0), l);
        assert!((wrapped.re + 0.5 * RT2).abs() < 1e-12);
        assert!(wrapped.im.abs() < 1e-15);
    }

    #[test]
    fn modulo_properties_randomized() {
        let mut rng = substream(5, StreamPurpose::Probe, 1, 0);
        let l = 2.0 * RT2;
        for _ in 0..20_000 {
            let z = c64(
                rng.random_range(-10.0..10.0),
                rng.random_range(-10.0..10.0),
            );
            let m1 = modulo(z, l);
            // Half-open range.
            assert!((-l / 2.0..l / 2.0).contains(&m1.re), "{z} -> {m1}");
            assert!((-l / 2.0..l / 2.0).contains(&m1.im));
            // Idempotence.
            assert_eq!(modulo(m1, l), m1);
            // Periodicity.
            let a = rng.random_range(-3i32..=3) as f64;
            let b = rng.random_range(-3i32..=3) as f64;
            let shifted = modulo(z + c64(a * l, b * l), l);
            assert!((shifted - m1).norm() < 1e-9, "{z} + ({a},{b})λ");
            // Offset is lattice-valued.
            let d = z - m1;
            assert!((d.re / l - (d.re / l).round()).abs() < 1e-9);
            assert!((d.im / l - (d.im / l).round()).abs() < 1e-9);
        }
    }

    #[test]
    fn constellations_have_unit_power() {
        for modulation in [Modulation::Qpsk, Modulation::Qam16] {
            let points = constellation(modulation).unwrap();
            let p: f64 =
                points.iter().map(|z| z.norm_sqr()).sum::<f64>() / points.len() as f64;
            assert!((p - 1.0).abs() < 1e-12, "{modulation:?}");
        }
        assert_eq!(constellation(Modulation::Qpsk).unwrap().len(), 4);
        assert_eq!(constellation(Modulation::Qam16).unwrap().len(), 16);
        assert!(constellation(Modulation::Gaussian).is_err());
    }

    #[test]
    fn encode_identity_feedback_is_transparent() {
        let spec = ModuloSpec::uniform(Modulation::Qpsk, 1.0, 3).unwrap();
        let points = constellation(Modulation::Qpsk).unwrap();
        let mut rng = substream(5, StreamPurpose::Probe, 2, 0);
        let s = draw_symbols(&points, 3, &mut rng);
        let frame = thp_encode(&s, &CMatrix::identity(3), &spec);
        for i in 0..3 {
            assert_eq!(frame.v[i], s[i]);
            assert!(frame.d[i].norm() < 1e-15);
        }
    }

    #[test]
    fn encode_single_recursion_step() {
        let spec = ModuloSpec::uniform(Modulation::Qpsk, 1.0, 2).unwrap();
        let b = CMatrix::new(
            2,
            2,
            vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.9, 0.0), c64(1.0, 0.0)],
        )
        .unwrap();
        let s = vec![c64(1.0, 0.0), c64(1.0, 0.0)];
        let frame = thp_encode(&s, &b, &spec);
        assert_eq!(frame.v[0], s[0]);
        assert!((frame.v[1] - c64(0.1, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn encode_consistency_with_inverted_feedback() {
        // v must satisfy B·v = s + d with lattice-valued d, d_1 = 0.
        let mut rng = substream(5, StreamPurpose::Probe, 3, 0);
        let points = constellation(Modulation::Qam16).unwrap();
        let spec = ModuloSpec::uniform(Modulation::Qam16, 1.0, 6).unwrap();
        let lambda = spec.lambda[0];
        for _ in 0..200 {
            let g = sample_cgauss(6, 6, 1.0, &mut rng);
            let b = CMatrix::from_fn(6, 6, |i, j| {
                if i == j {
                    c64(1.0, 0.0)
                } else if i > j {
                    g.at(i, j)
                } else {
                    c64(0.0, 0.0)
                }
            });
            let s = draw_symbols(&points, 6, &mut rng);
            let frame = thp_encode(&s, &b, &spec);
            let bv = b.matvec(&frame.v);
            for i in 0..6 {
                let resid = bv[i] - s[i] - frame.d[i];
                assert!(resid.norm() < 1e-9, "stream {i}");
                assert!(
                    (frame.d[i].re / lambda - (frame.d[i].re / lambda).round()).abs()
                        < 1e-9,
                    "d not lattice-valued"
                );
                assert!(
                    (frame.d[i].im / lambda - (frame.d[i].im / lambda).round()).abs()
                        < 1e-9
                );
            }
            assert!(frame.d[0].norm() == 0.0, "first stream has no offset");
        }
    }

    fn build(
        design: Design,
        h: &CMatrix,
        cfg: &SystemConfig,
        delta: f64,
    ) -> RsPrecoder {
        RsPrecoder::build(design, h, cfg, delta, BetaConvention::default()).unwrap()
    }

    #[test]
    fn noiseless_round_trip_all_thp_designs() {
        use crate::scheme::Structure::*;
        let cfg = SystemConfig::new(6, vec![2, 2, 2], None).unwrap();
        let points = constellation(Modulation::Qpsk).unwrap();
        let spec = ModuloSpec::uniform(Modulation::Qpsk, 1.0, 6).unwrap();
        let mut rng = substream(5, StreamPurpose::Probe, 4, 0);
        for design in [
            Design::ZfThp(Centralized),
            Design::ZfThp(Decentralized),
            Design::MmseThp(Centralized),
            Design::MmseThp(Decentralized),
        ] {
            for trial in 0..20 {
                let h = sample_cgauss(6, 6, 1.0, &mut rng);
                let pre = build(design, &h, &cfg, 0.2);
                let filters = pre.filters.as_ref().unwrap();
                let s = draw_symbols(&points, 6, &mut rng);
                let frame = thp_encode(&s, &filters.b, &spec);
                let s_c = points[0];
                let x = transmit(&frame, &pre, s_c);
                let y = propagate(&h, &x, None);
                let y_sic = sic_subtract(&y, &h, &pre.p_c, s_c);
                let decode =
                    decode_private(&y_sic, &pre, &spec, &points, &frame).unwrap();
                // With MMSE designs the perfect-CSIT cancellation is only
                // approximate (regularized inversion leaves residual
                // interference), but at this size the residual stays far
                // below a decision boundary.
                assert!(
                    decode.errors.iter().all(|&e| !e),
                    "{design:?} trial {trial}: symbol errors {:?}",
                    decode.errors
                );
                if matches!(design, Design::ZfThp(_)) {
                    for i in 0..6 {
                        assert!(
                            (decode.soft[i] - s[i]).norm() < 1e-9,
                            "{design:?} trial {trial} stream {i}: ZF soft \
                             symbols must match exactly"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn high_noise_reaches_random_guess_rate() {
        let cfg = SystemConfig::new(4, vec![2, 2], None).unwrap();
        let points = constellation(Modulation::Qpsk).unwrap();
        let spec = ModuloSpec::uniform(Modulation::Qpsk, 1.0, 4).unwrap();
        let mut rng = substream(5, StreamPurpose::Probe, 5, 0);
        let h = sample_cgauss(4, 4, 1.0, &mut rng);
        let pre = build(Design::ZfThp(crate::scheme::Structure::Decentralized), &h, &cfg, 0.0);
        let filters = pre.filters.as_ref().unwrap();
        let mut errors = 0usize;
        let mut total = 0usize;
        for _ in 0..2500 {
            let s = draw_symbols(&points, 4, &mut rng);
            let frame = thp_encode(&s, &filters.b, &spec);
            let x = transmit(&frame, &pre, c64(0.0, 0.0));
            let noise = sample_cgauss(4, 1, 1e8, &mut rng).col(0);
            let y = propagate(&h, &x, Some(&noise));
            let decode = decode_private(&y, &pre, &spec, &points, &frame).unwrap();
            errors += decode.errors.iter().filter(|&&e| e).count();
            total += 4;
        }
        let rate = errors as f64 / total as f64;
        assert!((rate - 0.75).abs() < 0.02, "error rate {rate}");
    }

    #[test]
    fn identity_feedback_keeps_v_power_at_symbol_power() {
        let points = constellation(Modulation::Qpsk).unwrap();
        let spec = ModuloSpec::uniform(Modulation::Qpsk, 1.0, 4).unwrap();
        let mut rng = substream(5, StreamPurpose::Probe, 6, 0);
        let vars = measure_v_variance(
            &CMatrix::identity(4),
            &points,
            &spec,
            5000,
            &mut rng,
        );
        for v in vars {
            assert!((v - 1.0).abs() < 1e-12, "QPSK symbols have unit power");
        }
    }

    #[test]
    fn v_variance_structure_on_random_feedback() {
        // First stream passes through untouched. Wrapped streams live inside
        // the modulo cell, so their power is hard-bounded by the corner
        // value λ²/2; deep wrapping drives them toward the uniform moment
        // λ²/6, while light feedback can sit anywhere between the symbol
        // power and the corner bound.
        let points = constellation(Modulation::Qpsk).unwrap();
        let spec = ModuloSpec::uniform(Modulation::Qpsk, 1.0, 6).unwrap();
        let mut rng = substream(5, StreamPurpose::Probe, 7, 0);
        let h = sample_cgauss(6, 6, 1.0, &mut rng);
        let filters = crate::precoding::zf_thp_filters(
            &h,
            crate::scheme::Structure::Decentralized,
        )
        .unwrap();
        let vars =
            measure_v_variance(&filters.b, &points, &spec, 4000, &mut rng);
        assert!((vars[0] - 1.0).abs() < 1e-12, "v_1 = s_1 exactly");
        let cell_max = spec.lambda[0] * spec.lambda[0] / 2.0;
        let uniform = spec.lambda[0] * spec.lambda[0] / 6.0;
        for (i, &v) in vars.iter().enumerate().skip(1) {
            assert!(v < cell_max, "stream {i}: {v} outside the cell bound");
            assert!(v >= 0.9, "stream {i}: {v} below symbol power");
        }
        // The last stream has the strongest feedback and wraps deeply,
        // pulling its moment close to the uniform value.
        assert!(
            (vars[5] - uniform).abs() < 0.15 * uniform,
            "deep-wrap stream at {} vs uniform moment {uniform}",
            vars[5]
        );
    }

    #[test]
    fn transmit_power_identity_channel_meets_budget() {
        // With an orthonormal-row channel the feedback filter is identity,
        // no wrapping occurs, and E[‖x‖²] equals the budget exactly in
        // expectation (1% Monte-Carlo band).
        let cfg = SystemConfig::new(4, vec![2, 2], None).unwrap();
        let points = constellation(Modulation::Qpsk).unwrap();
        let spec = ModuloSpec::uniform(Modulation::Qpsk, 1.0, 4).unwrap();
        let mut rng = substream(5, StreamPurpose::Probe, 8, 0);
        let h = CMatrix::identity(4);
        for delta in [0.0, 0.3, 1.0] {
            let pre = build(
                Design::ZfThp(crate::scheme::Structure::Centralized),
                &h,
                &cfg,
                delta,
            );
            let filters = pre.filters.as_ref().unwrap();
            let p = measure_transmit_power(
                &pre, &filters.b, &points, &spec, 20_000, &mut rng,
            );
            assert!(
                (p - cfg.etr).abs() < 0.01 * cfg.etr,
                "delta={delta}: measured {p} vs budget {}",
                cfg.etr
            );
        }
    }

    #[test]
    fn transmit_power_random_channel_shows_bounded_loss() {
        // On random channels the wrapped streams carry more than unit power
        // (bounded by the cell corner λ²/2), so the measured transmit power
        // sits between the budget and that bound. This quantifies the power
        // loss that the β normalization (unit-power v assumption) ignores.
        let cfg = SystemConfig::new(6, vec![2, 2, 2], None).unwrap();
        let points = constellation(Modulation::Qpsk).unwrap();
        let spec = ModuloSpec::uniform(Modulation::Qpsk, 1.0, 6).unwrap();
        let mut rng = substream(5, StreamPurpose::Probe, 9, 0);
        let h = sample_cgauss(6, 6, 1.0, &mut rng);
        let pre = build(
            Design::ZfThp(crate::scheme::Structure::Decentralized),
            &h,
            &cfg,
            0.2,
        );
        let filters = pre.filters.as_ref().unwrap();
        let p = measure_transmit_power(
            &pre, &filters.b, &points, &spec, 20_000, &mut rng,
        );
        let bound = spec.lambda[0] * spec.lambda[0] / 2.0;
        assert!(p >= 0.98 * cfg.etr, "measured {p} below budget");
        assert!(p <= bound * cfg.etr, "measured {p} above cell bound");
    }

    #[test]
    fn delta_one_sends_common_only() {
        let cfg = SystemConfig::new(4, vec![2, 2], None).unwrap();
        let mut rng = substream(5, StreamPurpose::Probe, 10, 0);
        let h = sample_cgauss(4, 4, 1.0, &mut rng);
        let pre = build(
            Design::ZfThp(crate::scheme::Structure::Centralized),
            &h,
            &cfg,
            1.0,
        );
        assert_eq!(pre.beta, 0.0);
        let points = constellation(Modulation::Qpsk).unwrap();
        let spec = ModuloSpec::uniform(Modulation::Qpsk, 1.0, 4).unwrap();
        let s = draw_symbols(&points, 4, &mut rng);
        let frame = thp_encode(&s, &pre.filters.as_ref().unwrap().b, &spec);
        let s_c = points[1];
        let x = transmit(&frame, &pre, s_c);
        let expect: Vec<Complex64> = pre.p_c.iter().map(|&p| p * s_c).collect();
        for (a, b) in x.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn boundary_points_suffer_more_wrap_errors() {
        // 16-QAM outer levels sit closer to the modulo-cell edge, so at
        // moderate noise their error rate exceeds the inner levels'.
        let points = constellation(Modulation::Qam16).unwrap();
        let spec = ModuloSpec::uniform(Modulation::Qam16, 1.0, 2).unwrap();
        let lambda = spec.lambda[0];
        let mut rng = substream(5, StreamPurpose::Probe, 11, 0);
        let inner = 1.0 / 10.0_f64.sqrt();
        let mut boundary = [0usize; 2];
        let mut interior = [0usize; 2];
        for _ in 0..60_000 {
            let s = draw_symbols(&points, 1, &mut rng)[0];
            let n = sample_cgauss(1, 1, 0.15, &mut rng).at(0, 0);
            let hard = slice_nearest(modulo(s + n, lambda), &points);
            let is_boundary =
                s.re.abs() > inner + 1e-9 || s.im.abs() > inner + 1e-9;
            let idx = usize::from(is_boundary);
            boundary[idx] += usize::from((hard - s).norm() > 1e-9);
            interior[idx] += 1;
        }
        let rate_boundary = boundary[1] as f64 / interior[1] as f64;
        let rate_interior = boundary[0] as f64 / interior[0] as f64;
        assert!(
            rate_boundary > rate_interior,
            "boundary {rate_boundary} vs interior {rate_interior}"
        );
    }
}
