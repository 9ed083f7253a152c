//! Scheme identifiers: precoder design, THP structure, and common-stream combiner.
//!
//! A scheme id is a dash-separated string such as `ZF`, `ZF-dTHP`,
//! `MMSE-cTHP`, `RS-ZF-MMSEc`, or `RS-MMSE-dTHP-MinMax`. Parsing is
//! case-insensitive; [`SchemeSpec::id`] renders the canonical spelling.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Where the diagonal scaling matrix of the THP chain is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Structure {
    /// Scaling applied at the transmitter (`cTHP`).
    Centralized,
    /// Scaling applied at the receivers (`dTHP`).
    Decentralized,
}

impl Structure {
    fn token(self) -> &'static str {
        match self {
            Structure::Centralized => "cTHP",
            Structure::Decentralized => "dTHP",
        }
    }
}

/// Precoder design: linear zero-forcing or one of the THP families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Design {
    /// Linear zero-forcing precoding (no THP feedback loop).
    ZfLinear,
    /// Zero-forcing THP with the given structure.
    ZfThp(Structure),
    /// MMSE THP (extended-channel factorization) with the given structure.
    MmseThp(Structure),
}

impl Design {
    /// True for both THP families.
    pub fn is_thp(self) -> bool {
        !matches!(self, Design::ZfLinear)
    }

    /// THP structure if this design has one.
    pub fn structure(self) -> Option<Structure> {
        match self {
            Design::ZfLinear => None,
            Design::ZfThp(s) | Design::MmseThp(s) => Some(s),
        }
    }
}

/// Linear combiner used by each user to merge antenna observations of the
/// common stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombinerKind {
    /// Select the single receive antenna with the best average common rate.
    MinMax,
    /// Maximum ratio combining against the effective common channel.
    Mrc,
    /// MMSE combining (interference-plus-noise whitened matched filter).
    Mmsec,
}

impl CombinerKind {
    fn token(self) -> &'static str {
        match self {
            CombinerKind::MinMax => "MinMax",
            CombinerKind::Mrc => "MRC",
            CombinerKind::Mmsec => "MMSEc",
        }
    }

    fn parse_token(tok: &str) -> Option<Self> {
        match tok.to_ascii_lowercase().as_str() {
            "minmax" => Some(CombinerKind::MinMax),
            "mrc" => Some(CombinerKind::Mrc),
            "mmsec" => Some(CombinerKind::Mmsec),
            _ => None,
        }
    }
}

impl fmt::Display for CombinerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A fully resolved transmission scheme.
///
/// Rate splitting is on exactly when a combiner is present; the scheme id
/// carries the `RS-` prefix and combiner suffix together. The multi-branch
/// order count is configured separately (it is not part of the id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeSpec {
    pub design: Design,
    pub combiner: Option<CombinerKind>,
    /// Number of pre-stored ordering branches evaluated per channel (≥ 1).
    pub branches: usize,
}

impl SchemeSpec {
    /// Non-RS scheme with a single branch.
    pub fn base(design: Design) -> Self {
        SchemeSpec { design, combiner: None, branches: 1 }
    }

    /// RS scheme with the given combiner and a single branch.
    pub fn rs(design: Design, combiner: CombinerKind) -> Self {
        SchemeSpec { design, combiner: Some(combiner), branches: 1 }
    }

    /// Same scheme with a different branch count.
    pub fn with_branches(mut self, branches: usize) -> Self {
        self.branches = branches;
        self
    }

    /// Whether rate splitting (common stream + SIC) is active.
    pub fn is_rs(&self) -> bool {
        self.combiner.is_some()
    }

    /// Canonical scheme id, e.g. `RS-MMSE-dTHP-MMSEc`.
    pub fn id(&self) -> String {
        let mut s = String::new();
        if self.is_rs() {
            s.push_str("RS-");
        }
        match self.design {
            Design::ZfLinear => s.push_str("ZF"),
            Design::ZfThp(st) => {
                s.push_str("ZF-");
                s.push_str(st.token());
            }
            Design::MmseThp(st) => {
                s.push_str("MMSE-");
                s.push_str(st.token());
            }
        }
        if let Some(c) = self.combiner {
            s.push('-');
            s.push_str(c.token());
        }
        s
    }

    /// Parse a scheme id. Case-insensitive; `RS-` schemes must carry a
    /// combiner suffix and non-RS schemes must not.
    pub fn parse(input: &str) -> Result<Self> {
        let unknown = || Error::UnknownScheme(input.to_string());
        let tokens: Vec<String> =
            input.split('-').map(|t| t.trim().to_ascii_lowercase()).collect();
        if tokens.iter().any(|t| t.is_empty()) {
            return Err(unknown());
        }
        let mut pos = 0;
        let rs = tokens.first().map(String::as_str) == Some("rs");
        if rs {
            pos += 1;
        }
        let family = tokens.get(pos).ok_or_else(unknown)?.as_str();
        pos += 1;
        let structure = |tok: Option<&String>| match tok.map(String::as_str) {
            Some("cthp") => Some(Structure::Centralized),
            Some("dthp") => Some(Structure::Decentralized),
            _ => None,
        };
        let design = match family {
            "zf" => match structure(tokens.get(pos)) {
                Some(st) => {
                    pos += 1;
                    Design::ZfThp(st)
                }
                None => Design::ZfLinear,
            },
            "mmse" => {
                let st = structure(tokens.get(pos)).ok_or_else(unknown)?;
                pos += 1;
                Design::MmseThp(st)
            }
            _ => return Err(unknown()),
        };
        let combiner = match tokens.get(pos) {
            Some(tok) => {
                pos += 1;
                Some(CombinerKind::parse_token(tok).ok_or_else(unknown)?)
            }
            None => None,
        };
        if pos != tokens.len() || combiner.is_some() != rs {
            return Err(unknown());
        }
        Ok(if rs {
            SchemeSpec::rs(design, combiner.unwrap())
        } else {
            SchemeSpec::base(design)
        })
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeSpec::parse(s)
    }
}

/// All scheme ids exercised by the bundled experiment presets.
pub fn preset_schemes() -> Vec<SchemeSpec> {
    use CombinerKind::*;
    use Design::*;
    use Structure::*;
    vec![
        SchemeSpec::base(ZfLinear),
        SchemeSpec::base(ZfThp(Centralized)),
        SchemeSpec::base(ZfThp(Decentralized)),
        SchemeSpec::rs(ZfLinear, Mmsec),
        SchemeSpec::rs(ZfThp(Centralized), Mmsec),
        SchemeSpec::rs(ZfThp(Decentralized), Mmsec),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_canonical_ids() {
        let cases = [
            ("ZF", SchemeSpec::base(Design::ZfLinear)),
            (
                "ZF-cTHP",
                SchemeSpec::base(Design::ZfThp(Structure::Centralized)),
            ),
            (
                "ZF-dTHP",
                SchemeSpec::base(Design::ZfThp(Structure::Decentralized)),
            ),
            (
                "MMSE-cTHP",
                SchemeSpec::base(Design::MmseThp(Structure::Centralized)),
            ),
            (
                "MMSE-dTHP",
                SchemeSpec::base(Design::MmseThp(Structure::Decentralized)),
            ),
            (
                "RS-ZF-MMSEc",
                SchemeSpec::rs(Design::ZfLinear, CombinerKind::Mmsec),
            ),
            (
                "RS-ZF-cTHP-MinMax",
                SchemeSpec::rs(
                    Design::ZfThp(Structure::Centralized),
                    CombinerKind::MinMax,
                ),
            ),
            (
                "RS-MMSE-dTHP-MRC",
                SchemeSpec::rs(
                    Design::MmseThp(Structure::Decentralized),
                    CombinerKind::Mrc,
                ),
            ),
        ];
        for (id, want) in cases {
            let got = SchemeSpec::parse(id).unwrap();
            assert_eq!(got, want, "{id}");
            assert_eq!(got.id(), id, "round trip");
        }
    }

    #[test]
    fn parse_is_case_insensitive() {
        assert_eq!(
            SchemeSpec::parse("rs-mmse-dthp-mmsec").unwrap(),
            SchemeSpec::rs(
                Design::MmseThp(Structure::Decentralized),
                CombinerKind::Mmsec
            )
        );
        assert_eq!(
            SchemeSpec::parse("Zf-DTHP").unwrap(),
            SchemeSpec::base(Design::ZfThp(Structure::Decentralized))
        );
    }

    #[test]
    fn rejects_invalid_ids() {
        for bad in [
            "",
            "ZF-",
            "THP",
            "MMSE",          // linear MMSE is not a supported design
            "RS-ZF",         // RS requires a combiner
            "ZF-dTHP-MMSEc", // combiner requires RS
            "RS-ZF-dTHP",
            "RS-ZF-dTHP-MMSEc-extra",
            "ZF-xTHP",
            "RS-ZF-dTHP-zf",
        ] {
            assert!(
                matches!(SchemeSpec::parse(bad), Err(Error::UnknownScheme(_))),
                "expected parse failure for {bad:?}"
            );
        }
    }

    #[test]
    fn preset_ids_round_trip() {
        for scheme in preset_schemes() {
            assert_eq!(SchemeSpec::parse(&scheme.id()).unwrap(), scheme);
        }
    }
}
