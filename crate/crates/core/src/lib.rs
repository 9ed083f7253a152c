//! Link-level simulator for rate-splitting with Tomlinson-Harashima
//! precoding (THP) in the multi-user MIMO downlink.
//!
//! The crate models a base station serving several multi-antenna users
//! through zero-forcing or MMSE THP in either a centralized or a
//! decentralized structure, optionally splitting off a common stream that
//! every user decodes first through a receive combiner (per-antenna
//! selection, MRC, or MMSE). On top of the per-channel machinery sit a
//! multi-branch symbol-ordering stage, a Monte-Carlo ergodic sum-rate
//! evaluator for imperfect channel knowledge, a floating-point-operation
//! cost model, and a deterministic experiment harness with a CLI front end.
//!
//! Reproducibility is a first-class contract: an experiment specification
//! plus a seed fully determines every output byte, independent of thread
//! count.

pub mod channel;
pub mod combining;
pub mod error;
pub mod flops;
pub mod harness;
pub mod multibranch;
pub mod numerics;
pub mod precoding;
pub mod rates;
pub mod scheme;
pub mod symbols;

pub use error::{Error, Result};
