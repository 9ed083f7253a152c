//! Multi-branch symbol ordering: pre-stored row-permutation patterns and
//! selection of the branch with the best rate-splitting sum rate.
//!
//! Patterns act on the rows of the transposed channel (streams). They are
//! built from a user-level permutation Kronecker-combined with a per-user
//! stream-level permutation, so the streams of one user always stay inside
//! that user's block.

use crate::error::{Error, Result};
use crate::numerics::CMatrix;

/// One ordering pattern: a permutation of the Nr stream rows.
///
/// `perm[r]` is the input row that lands in output row r, i.e. the pattern
/// matrix `T` has `T[r, perm[r]] = 1` and the reordered channel is `T·Ĥᵀ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub index: usize,
    pub perm: Vec<usize>,
}

impl Pattern {
    /// The identity pattern on n rows.
    pub fn identity(n: usize) -> Self {
        Pattern { index: 0, perm: (0..n).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(r, &p)| r == p)
    }

    /// Original (input) row feeding output row r.
    pub fn original_row(&self, r: usize) -> usize {
        self.perm[r]
    }

    /// Apply the pattern to a matrix: returns `T·A` (rows reordered).
    pub fn apply_rows(&self, a: &CMatrix) -> CMatrix {
        assert_eq!(a.rows(), self.perm.len(), "pattern/matrix size mismatch");
        CMatrix::from_fn(a.rows(), a.cols(), |r, c| a.at(self.perm[r], c))
    }

    /// Dense 0/1 matrix form of the pattern.
    pub fn matrix(&self) -> CMatrix {
        let n = self.perm.len();
        CMatrix::from_fn(n, n, |r, c| {
            if c == self.perm[r] {
                crate::numerics::c64(1.0, 0.0)
            } else {
                crate::numerics::c64(0.0, 0.0)
            }
        })
    }
}

/// Permutation vectors for one level (users or streams): the identity
/// followed by reversals of progressively smaller trailing blocks.
fn level_perms(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(n);
    out.push((0..n).collect());
    for i in 2..=n {
        let offset = i - 2;
        let mut p: Vec<usize> = (0..offset).collect();
        for rb in 0..(n - offset) {
            p.push(n - 1 - rb);
        }
        out.push(p);
    }
    out
}

/// The K user-level ordering patterns.
pub fn user_patterns(k: usize) -> Vec<Vec<usize>> {
    assert!(k >= 1);
    level_perms(k)
}

/// The Nk stream-level ordering patterns.
pub fn stream_patterns(nk: usize) -> Vec<Vec<usize>> {
    assert!(nk >= 1);
    level_perms(nk)
}

/// The first `l_o` combined patterns from the (user, stream) grid,
/// enumerated row-major with the identity pair first. Requires every user
/// to have the same antenna count.
pub fn branch_patterns(nk: &[usize], l_o: usize) -> Result<Vec<Pattern>> {
    let k = nk.len();
    if k == 0 {
        return Err(Error::Config("no users configured".into()));
    }
    let per_user = nk[0];
    if nk.iter().any(|&n| n != per_user) {
        return Err(Error::UnequalUserAntennas);
    }
    let max = k * per_user;
    if l_o == 0 || l_o > max {
        return Err(Error::Config(format!(
            "branch count must lie in 1..={max} for K={k}, Nk={per_user}; \
             got {l_o}"
        )));
    }
    let users = user_patterns(k);
    let streams = stream_patterns(per_user);
    let mut out = Vec::with_capacity(l_o);
    'outer: for u in &users {
        for s in &streams {
            if out.len() == l_o {
                break 'outer;
            }
            let mut perm = Vec::with_capacity(k * per_user);
            for &ub in u {
                for &sb in s {
                    perm.push(ub * per_user + sb);
                }
            }
            out.push(Pattern { index: out.len(), perm });
        }
    }
    Ok(out)
}

/// Selects the ordering pattern with the best estimated sum rate for one
/// channel estimate: every branch reorders the estimate, rebuilds its
/// filters and common precoder, and is scored on `inner_mc` pilot error
/// draws (minimum common rate plus private sum). With zero error variance
/// the score is the instantaneous rate of the estimate itself. Ties break
/// toward the lowest branch index. Returns the winning pattern and the
/// reordered estimate.
#[allow(clippy::too_many_arguments)]
pub fn select_branch(
    h_hat: &CMatrix,
    patterns: &[Pattern],
    scheme: &crate::scheme::SchemeSpec,
    cfg: &crate::channel::SystemConfig,
    error_model: &crate::channel::ErrorModel,
    delta: f64,
    inner_mc: usize,
    channel_index: u32,
) -> Result<(Pattern, CMatrix)> {
    use crate::channel::draw_error_unit;
    use crate::numerics::StreamPurpose;
    use crate::rates::branch_asr;

    if patterns.is_empty() {
        return Err(Error::Config("need at least one ordering pattern".into()));
    }
    error_model.validate()?;
    let sigma_e2 = error_model.entry_variance(cfg.etr);
    let pilots: Vec<CMatrix> = if sigma_e2 > 0.0 {
        (0..inner_mc.max(1))
            .map(|d| {
                draw_error_unit(cfg, StreamPurpose::PilotError, channel_index, d as u32)
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut best: Option<(f64, &Pattern)> = None;
    for pattern in patterns {
        let asr = branch_asr(cfg, scheme, h_hat, pattern, &pilots, sigma_e2, delta)?;
        let score = asr.score();
        if best.map_or(true, |(s, _)| score > s) {
            best = Some((score, pattern));
        }
    }
    let (_, pattern) = best.expect("non-empty pattern list");
    Ok((pattern.clone(), pattern.apply_rows(h_hat)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c64, sample_cgauss, substream, StreamPurpose};

    fn is_permutation(p: &[usize]) -> bool {
        let mut seen = vec![false; p.len()];
        for &v in p {
            if v >= p.len() || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        true
    }

    #[test]
    fn user_patterns_match_hand_cases() {
        assert_eq!(user_patterns(1), vec![vec![0]]);
        let k3 = user_patterns(3);
        assert_eq!(k3.len(), 3);
        assert_eq!(k3[0], vec![0, 1, 2]);
        assert_eq!(k3[1], vec![2, 1, 0], "full reversal");
        assert_eq!(k3[2], vec![0, 2, 1], "identity block then 2-swap");
    }

    #[test]
    fn stream_patterns_match_hand_cases() {
        let s2 = stream_patterns(2);
        assert_eq!(s2, vec![vec![0, 1], vec![1, 0]]);
        for p in stream_patterns(5) {
            assert!(is_permutation(&p));
        }
    }

    #[test]
    fn single_branch_is_identity() {
        let b = branch_patterns(&[2, 2, 2], 1).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].is_identity());
        assert_eq!(b[0].index, 0);
    }

    #[test]
    fn branch_matches_kronecker_oracle() {
        // K=2, Nk=2, (user pattern 2, stream pattern 2) is branch index 3
        // in row-major order.
        let b = branch_patterns(&[2, 2], 4).unwrap();
        let u = vec![1usize, 0];
        let s = vec![1usize, 0];
        let ku = CMatrix::from_fn(2, 2, |r, c| {
            if c == u[r] { c64(1.0, 0.0) } else { c64(0.0, 0.0) }
        });
        let ks = CMatrix::from_fn(2, 2, |r, c| {
            if c == s[r] { c64(1.0, 0.0) } else { c64(0.0, 0.0) }
        });
        // Kronecker product of the two pattern matrices.
        let kron = CMatrix::from_fn(4, 4, |r, c| {
            ku.at(r / 2, c / 2) * ks.at(r % 2, c % 2)
        });
        assert!(b[3].matrix().sub(&kron).max_abs() == 0.0);
    }

    #[test]
    fn patterns_are_distinct_block_preserving_permutations() {
        let nk = [3usize, 3, 3, 3];
        let all = branch_patterns(&nk, 12).unwrap();
        assert_eq!(all.len(), 12);
        for (i, p) in all.iter().enumerate() {
            assert_eq!(p.index, i);
            assert!(is_permutation(&p.perm), "branch {i}");
            // User-block property: each output block draws all its rows
            // from one input block.
            for block in 0..4 {
                let source = p.perm[block * 3] / 3;
                for r in 0..3 {
                    assert_eq!(
                        p.perm[block * 3 + r] / 3,
                        source,
                        "branch {i} splits a user block"
                    );
                }
            }
            for (j, q) in all.iter().enumerate().take(i) {
                assert_ne!(p.perm, q.perm, "branches {j} and {i} coincide");
            }
        }
    }

    #[test]
    fn apply_rows_reorders_consistently() {
        let mut rng = substream(3, StreamPurpose::Probe, 0, 0);
        let a = sample_cgauss(4, 5, 1.0, &mut rng);
        let b = branch_patterns(&[2, 2], 4).unwrap();
        let p = &b[3];
        let permuted = p.apply_rows(&a);
        let via_matrix = p.matrix().matmul(&a);
        assert!(permuted.sub(&via_matrix).max_abs() == 0.0);
        for r in 0..4 {
            assert_eq!(permuted.row(r), a.row(p.original_row(r)));
        }
    }

    #[test]
    fn rejects_bad_configurations() {
        assert!(matches!(
            branch_patterns(&[2, 3], 2),
            Err(Error::UnequalUserAntennas)
        ));
        assert!(branch_patterns(&[2, 2], 0).is_err());
        assert!(branch_patterns(&[2, 2], 5).is_err());
        assert!(branch_patterns(&[], 1).is_err());
    }

    fn selection_fixture() -> (crate::channel::SystemConfig, CMatrix) {
        use crate::numerics::{sample_cgauss, substream, StreamPurpose};
        let mut cfg = crate::channel::SystemConfig::new(6, vec![2, 2, 2], None).unwrap();
        cfg.etr = 100.0;
        cfg.seed = 11;
        let mut rng = substream(42, StreamPurpose::Probe, 60, 0);
        let h = sample_cgauss(6, 6, 1.0, &mut rng);
        (cfg, h)
    }

    #[test]
    fn select_branch_single_pattern_returns_it() {
        let (cfg, h) = selection_fixture();
        let scheme: crate::scheme::SchemeSpec = "ZF-dTHP".parse().unwrap();
        let em = crate::channel::ErrorModel::Fixed { sigma_e2: 0.05 };
        let patterns = branch_patterns(&cfg.nk, 1).unwrap();
        let (p, reordered) = select_branch(&h, &patterns, &scheme, &cfg, &em, 0.0, 8, 0).unwrap();
        assert!(p.is_identity());
        assert!(reordered.sub(&h).max_abs() == 0.0);
        assert!(select_branch(&h, &[], &scheme, &cfg, &em, 0.0, 8, 0).is_err());
    }

    #[test]
    fn selected_branch_dominates_every_candidate() {
        let (cfg, h) = selection_fixture();
        let scheme: crate::scheme::SchemeSpec = "RS-ZF-dTHP-MMSEc".parse().unwrap();
        let em = crate::channel::ErrorModel::Fixed { sigma_e2: 0.06 };
        let sigma_e2 = 0.06;
        let inner = 10usize;
        let patterns = branch_patterns(&cfg.nk, 4).unwrap();
        let (winner, _) =
            select_branch(&h, &patterns, &scheme, &cfg, &em, 0.3, inner, 5).unwrap();
        // Recreate the pilot draws and check argmax dominance by hand.
        let pilots: Vec<CMatrix> = (0..inner)
            .map(|d| {
                crate::channel::draw_error_unit(
                    &cfg,
                    crate::numerics::StreamPurpose::PilotError,
                    5,
                    d as u32,
                )
            })
            .collect();
        let score = |p: &Pattern| {
            crate::rates::branch_asr(&cfg, &scheme, &h, p, &pilots, sigma_e2, 0.3)
                .unwrap()
                .score()
        };
        let best = score(&patterns[winner.index]);
        for p in &patterns {
            assert!(score(p) <= best, "branch {} beats the winner", p.index);
        }
    }

    #[test]
    fn nested_branch_sets_never_lose() {
        let (cfg, h) = selection_fixture();
        let scheme: crate::scheme::SchemeSpec = "ZF-dTHP".parse().unwrap();
        let em = crate::channel::ErrorModel::Fixed { sigma_e2: 0.06 };
        let mut last = f64::NEG_INFINITY;
        for l_o in [1, 2, 4, 6] {
            let patterns = branch_patterns(&cfg.nk, l_o).unwrap();
            let (winner, _) =
                select_branch(&h, &patterns, &scheme, &cfg, &em, 0.0, 10, 5).unwrap();
            let pilots: Vec<CMatrix> = (0..10)
                .map(|d| {
                    crate::channel::draw_error_unit(
                        &cfg,
                        crate::numerics::StreamPurpose::PilotError,
                        5,
                        d as u32,
                    )
                })
                .collect();
            let score =
                crate::rates::branch_asr(&cfg, &scheme, &h, &winner, &pilots, 0.06, 0.0)
                    .unwrap()
                    .score();
            assert!(
                score >= last,
                "L_o={l_o}: selected score {score} below smaller set's {last}"
            );
            last = score;
        }
    }

    #[test]
    fn perfect_csit_selection_is_instantaneous_and_deterministic() {
        let (cfg, h) = selection_fixture();
        let scheme: crate::scheme::SchemeSpec = "ZF-cTHP".parse().unwrap();
        let em = crate::channel::ErrorModel::PERFECT;
        let patterns = branch_patterns(&cfg.nk, 6).unwrap();
        // The pilot budget is irrelevant without errors.
        let (a, _) = select_branch(&h, &patterns, &scheme, &cfg, &em, 0.0, 3, 0).unwrap();
        let (b, _) = select_branch(&h, &patterns, &scheme, &cfg, &em, 0.0, 50, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn engine_multibranch_never_hurts() {
        let (mut cfg, _) = selection_fixture();
        cfg.mc_channels = 15;
        cfg.mc_errors = 10;
        let em = crate::channel::ErrorModel::Fixed { sigma_e2: 0.06 };
        for id in ["ZF-cTHP", "ZF-dTHP"] {
            let base: crate::scheme::SchemeSpec = id.parse().unwrap();
            let mb = base.with_branches(4);
            let r1 = crate::rates::ergodic_sum_rate(&cfg, &base, &em, 0.0).unwrap();
            let r4 = crate::rates::ergodic_sum_rate(&cfg, &mb, &em, 0.0).unwrap();
            assert!(
                r4.esr_total >= r1.esr_total,
                "{id}: MB {} below single-branch {}",
                r4.esr_total,
                r1.esr_total
            );
        }
    }
}
