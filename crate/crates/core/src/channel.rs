//! System geometry, channel statistics, and the imperfect-CSIT model.
//!
//! The downlink has `nt` transmit antennas and `k` users with `nk[k]`
//! receive antennas each; the channel is handled throughout in its
//! receive-side orientation, an `nr×nt` matrix whose row blocks are the
//! per-user channels. The transmitter designs its filters from an estimate
//! `Ĥ` while the realized channel is `Ĥ + H̃`, with the estimation error
//! drawn entry-wise iid circular Gaussian. The error variance `σ_e²`
//! counts per real dimension, so a complex entry carries `2σ_e²`
//! ([`ErrorModel::entry_variance`]). Error draws are produced as
//! unit-variance matrices and scaled by the entry deviation, so ensembles
//! with different error variances (or variances tied to SNR) share the
//! identical underlying randomness — intentional, to make cross-scheme and
//! cross-variance comparisons common-random-number comparisons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sample_cgauss, substream, CMatrix, StreamPurpose};

/// Input alphabet for the symbol-domain pipeline. Rate evaluation always
/// uses Gaussian inputs; the finite alphabets drive the modulo/THP symbol
/// chain and its power measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Gaussian,
    Qpsk,
    Qam16,
}

/// Static description of one simulated system plus Monte-Carlo budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Transmit antennas at the base station.
    pub nt: usize,
    /// Receive antennas per user, one entry per user.
    pub nk: Vec<usize>,
    /// Number of private streams (at most the total receive antenna count).
    pub streams: usize,
    /// Total transmit power budget. With unit noise power the SNR in dB is
    /// `10·log10(etr)`.
    pub etr: f64,
    /// Noise power per receive antenna.
    pub sigma_n2: f64,
    pub modulation: Modulation,
    /// Outer Monte-Carlo budget: number of channel estimates.
    pub mc_channels: usize,
    /// Inner Monte-Carlo budget: error draws per estimate.
    pub mc_errors: usize,
    /// Master seed; all substreams derive from it.
    pub seed: u64,
}

impl SystemConfig {
    pub fn new(nt: usize, nk: Vec<usize>, streams: Option<usize>) -> Result<Self> {
        let cfg = SystemConfig {
            nt,
            streams: streams.unwrap_or_else(|| nk.iter().sum()),
            nk,
            etr: 100.0,
            sigma_n2: 1.0,
            modulation: Modulation::Gaussian,
            mc_channels: 100,
            mc_errors: 100,
            seed: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let nr = self.nr();
        if self.nk.is_empty() || self.nk.iter().any(|&n| n == 0) {
            return Err(Error::Config("every user needs at least one antenna".into()));
        }
        if self.nt < nr {
            return Err(Error::Config(format!(
                "transmit antennas ({}) must cover the {} receive antennas",
                self.nt, nr
            )));
        }
        if self.streams == 0 || self.streams > nr {
            return Err(Error::Config(format!(
                "stream count {} outside 1..={}",
                self.streams, nr
            )));
        }
        if !(self.etr > 0.0) || !(self.sigma_n2 > 0.0) {
            return Err(Error::Config(
                "transmit power and noise power must be positive".into(),
            ));
        }
        if self.mc_channels == 0 || self.mc_errors == 0 {
            return Err(Error::Config("Monte-Carlo budgets must be positive".into()));
        }
        Ok(())
    }

    /// Total receive antennas across users.
    pub fn nr(&self) -> usize {
        self.nk.iter().sum()
    }

    pub fn num_users(&self) -> usize {
        self.nk.len()
    }

    /// Row range of user `k` inside the stacked receive-side channel.
    pub fn user_rows(&self, k: usize) -> std::ops::Range<usize> {
        let start: usize = self.nk[..k].iter().sum();
        start..start + self.nk[k]
    }

    /// Copy of the configuration at a different transmit power.
    pub fn with_etr(&self, etr: f64) -> Self {
        SystemConfig { etr, ..self.clone() }
    }
}

/// CSIT error statistics: either a fixed error variance or one that decays
/// polynomially with the transmit power, `σ_e² = scale·etr^(−alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ErrorModel {
    Fixed { sigma_e2: f64 },
    SnrScaled { scale: f64, alpha: f64 },
}

impl ErrorModel {
    /// Perfect channel knowledge (zero error variance).
    pub const PERFECT: ErrorModel = ErrorModel::Fixed { sigma_e2: 0.0 };

    /// Nominal error variance of the model: the configured value for
    /// `Fixed`, `scale·etr^(−alpha)` for `SnrScaled`. This is the value
    /// quoted in reports and sweeps.
    pub fn sigma_e2(&self, etr: f64) -> f64 {
        match *self {
            ErrorModel::Fixed { sigma_e2 } => sigma_e2,
            ErrorModel::SnrScaled { scale, alpha } => scale * etr.powf(-alpha),
        }
    }

    /// Variance of one complex error entry. The nominal variance counts
    /// per real dimension, so each complex entry carries twice it; this is
    /// the factor the Monte-Carlo engines scale the unit draws by.
    pub fn entry_variance(&self, etr: f64) -> f64 {
        2.0 * self.sigma_e2(etr)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ErrorModel::Fixed { sigma_e2 } => sigma_e2 >= 0.0,
            ErrorModel::SnrScaled { scale, alpha } => scale >= 0.0 && alpha >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config("error-model parameters must be non-negative".into()))
        }
    }
}

/// One channel realization: the transmitter-side estimate, the realized
/// error, and their sum (what the physical signal actually propagates
/// through).
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub h_hat: CMatrix,
    pub h_tilde: CMatrix,
    pub h_true: CMatrix,
}

impl ChannelSet {
    pub fn assemble(h_hat: CMatrix, h_tilde: CMatrix) -> Result<Self> {
        if (h_hat.rows(), h_hat.cols()) != (h_tilde.rows(), h_tilde.cols()) {
            return Err(Error::BadShape {
                op: "ChannelSet::assemble",
                rows: h_tilde.rows(),
                cols: h_tilde.cols(),
            });
        }
        let h_true = h_hat.add(&h_tilde);
        Ok(ChannelSet {
            h_hat,
            h_tilde,
            h_true,
        })
    }

    /// View of one user's rows of the realized channel.
    pub fn user_block(&self, cfg: &SystemConfig, k: usize) -> CMatrix {
        self.h_true.row_block(cfg.user_rows(k))
    }
}

/// Draws the channel estimate for outer realization `index`. The `retry`
/// counter addresses resampled draws after a numerically rank-deficient
/// estimate; retries use fresh substreams, so accepted draws stay identical
/// no matter how many rejections preceded other indices.
pub fn draw_estimate(cfg: &SystemConfig, purpose: StreamPurpose, index: u32, retry: u32) -> CMatrix {
    let mut rng = substream(cfg.seed, purpose, index, retry);
    sample_cgauss(cfg.nr(), cfg.nt, 1.0, &mut rng)
}

/// Draws the unit-variance CSIT error matrix for `(realization, draw)`.
/// Callers scale by `σ_e` themselves.
pub fn draw_error_unit(cfg: &SystemConfig, purpose: StreamPurpose, index: u32, draw: u32) -> CMatrix {
    let mut rng = substream(cfg.seed, purpose, index, draw);
    sample_cgauss(cfg.nr(), cfg.nt, 1.0, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SystemConfig {
        SystemConfig::new(12, vec![2; 6], None).unwrap()
    }

    #[test]
    fn geometry_accessors() {
        let c = cfg();
        assert_eq!(c.nr(), 12);
        assert_eq!(c.streams, 12);
        assert_eq!(c.user_rows(0), 0..2);
        assert_eq!(c.user_rows(5), 10..12);
    }

    #[test]
    fn validation_rejects_bad_geometry() {
        assert!(SystemConfig::new(8, vec![2; 6], None).is_err()); // nt < nr
        assert!(SystemConfig::new(12, vec![2; 6], Some(13)).is_err());
        assert!(SystemConfig::new(12, vec![], None).is_err());
        let mut c = cfg();
        c.etr = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn error_model_resolution() {
        let fixed = ErrorModel::Fixed { sigma_e2: 0.05 };
        assert_eq!(fixed.sigma_e2(123.0), 0.05);
        assert_eq!(fixed.entry_variance(123.0), 0.1);
        let scaled = ErrorModel::SnrScaled {
            scale: 0.95,
            alpha: 0.6,
        };
        let v = scaled.sigma_e2(100.0);
        assert!((v - 0.95 * 100f64.powf(-0.6)).abs() < 1e-15);
        assert!(v < 0.06 && v > 0.059, "decayed variance {v}");
        assert_eq!(scaled.entry_variance(100.0), 2.0 * v);
        // Decreasing in transmit power.
        assert!(scaled.sigma_e2(1000.0) < v);
    }

    #[test]
    fn estimate_is_stable_across_error_draws() {
        let c = cfg();
        let h1 = draw_estimate(&c, StreamPurpose::ChannelEstimate, 7, 0);
        let _ = draw_error_unit(&c, StreamPurpose::ChannelError, 7, 0);
        let _ = draw_error_unit(&c, StreamPurpose::ChannelError, 7, 1);
        let h2 = draw_estimate(&c, StreamPurpose::ChannelEstimate, 7, 0);
        assert_eq!(h1.data(), h2.data());
    }

    #[test]
    fn estimate_and_error_draws_are_uncorrelated() {
        let c = cfg();
        let mut acc = 0.0;
        let mut count = 0usize;
        for idx in 0..70u32 {
            let h = draw_estimate(&c, StreamPurpose::ChannelEstimate, idx, 0);
            let e = draw_error_unit(&c, StreamPurpose::ChannelError, idx, 0);
            for (a, b) in h.data().iter().zip(e.data()) {
                acc += a.re * b.re + a.im * b.im;
                count += 1;
            }
        }
        // > 10⁴ paired samples; empirical correlation should be tiny.
        assert!(count > 10_000);
        let corr = acc / count as f64;
        assert!(corr.abs() < 0.03, "cross-correlation {corr}");
    }

    #[test]
    fn assemble_adds_and_blocks() {
        let c = cfg();
        let h_hat = draw_estimate(&c, StreamPurpose::ChannelEstimate, 0, 0);
        let h_tilde = draw_error_unit(&c, StreamPurpose::ChannelError, 0, 0).scale(0.05f64.sqrt());
        let set = ChannelSet::assemble(h_hat.clone(), h_tilde.clone()).unwrap();
        assert_eq!(set.h_true.at(3, 4), h_hat.at(3, 4) + h_tilde.at(3, 4));
        let blk = set.user_block(&c, 2);
        assert_eq!(blk.rows(), 2);
        assert_eq!(blk.at(0, 0), set.h_true.at(4, 0));
    }
}
