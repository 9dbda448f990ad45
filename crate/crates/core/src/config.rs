//! Run configuration for the command-line front end.
//!
//! Configs are flat JSON objects with a `schema_version` field. Shifts are
//! written either as strings (`"0.01-0.02i"`) or as `[re, im]` pairs; plain
//! numbers are read as real shifts.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shifts::{parse_complex, ShiftSet};

pub const SCHEMA_VERSION: u32 = 1;

/// A shift as it appears in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShiftValue {
    Pair([f64; 2]),
    Real(f64),
    Text(String),
}

impl ShiftValue {
    pub fn to_complex(&self) -> Result<Complex64> {
        match self {
            ShiftValue::Pair([re, im]) => Ok(Complex64::new(*re, *im)),
            ShiftValue::Real(re) => Ok(Complex64::new(*re, 0.0)),
            ShiftValue::Text(t) => parse_complex(t),
        }
    }
}

impl From<Complex64> for ShiftValue {
    fn from(z: Complex64) -> Self {
        ShiftValue::Pair([z.re, z.im])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Every parameter any subcommand reads. Absent fields take the
/// subcommand's default.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<ShiftValue>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<ShiftValue>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub big_t: Option<f64>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<u64>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(rename = "Q_cutoff", default, skip_serializing_if = "Option::is_none")]
    pub q_cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_list: Option<Vec<u64>>,
    /// Argument of the Dirichlet series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<ShiftValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<u64>,
    /// Largest prime-power exponent in the identity checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_swaps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_points: Option<usize>,
    /// Pass threshold; its meaning depends on the subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// Upper bounds on sizes, chosen so a run fits in desk memory.
pub const MAX_TABLE: u64 = 400_000_000;
pub const MAX_PRIME_BOUND: u64 = 100_000_000;

impl RunConfig {
    pub fn new() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks the schema version, parses every shift and bounds the sizes.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        for (name, set) in [("A", &self.a), ("B", &self.b)] {
            if let Some(v) = set {
                shift_set(v).map_err(|e| Error::Config(format!("field {name}: {e}")))?;
            }
        }
        if let Some(s) = &self.s {
            s.to_complex().map_err(|e| Error::Config(format!("field s: {e}")))?;
        }
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x.is_finite() && x > 0.0) => Err(Error::Config(format!("field {name}: must be positive and finite"))),
            _ => Ok(()),
        };
        positive("T", self.big_t)?;
        positive("tolerance", self.tolerance)?;
        for (name, v, max) in [
            ("N", self.n, MAX_TABLE),
            ("X", self.x, MAX_TABLE),
            ("u_max", self.u_max, MAX_TABLE),
            ("P", self.p, MAX_PRIME_BOUND),
        ] {
            if let Some(v) = v {
                if v == 0 || v > max {
                    return Err(Error::Config(format!("field {name}: {v} is outside 1..={max}")));
                }
            }
        }
        if let Some(h) = &self.h_list {
            if h.is_empty() || h.contains(&0) {
                return Err(Error::Config("field h_list: needs positive entries".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("field threads: must be at least 1".into()));
        }
        Ok(())
    }

    pub fn shifts_a(&self) -> Result<Option<ShiftSet>> {
        self.a.as_deref().map(shift_set).transpose()
    }

    pub fn shifts_b(&self) -> Result<Option<ShiftSet>> {
        self.b.as_deref().map(shift_set).transpose()
    }
}

/// Builds a set from config values. Repeated entries are allowed here; the
/// experiments that need simple poles check separation themselves.
pub fn shift_set(values: &[ShiftValue]) -> Result<ShiftSet> {
    let v = values.iter().map(ShiftValue::to_complex).collect::<Result<Vec<_>>>()?;
    ShiftSet::multiset(v)
}

/// Parses `"a1,a2;b1,b2"` into the two shift lists.
pub fn parse_shift_pair(text: &str) -> Result<(Vec<ShiftValue>, Vec<ShiftValue>)> {
    let (a, b) = text
        .split_once(';')
        .ok_or_else(|| Error::Config(format!("expected \"A;B\" in --shifts, got {text:?}")))?;
    Ok((parse_shift_list(a)?, parse_shift_list(b)?))
}

/// Parses a comma-separated shift list; empty text is the empty set.
pub fn parse_shift_list(text: &str) -> Result<Vec<ShiftValue>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_complex(t).map(ShiftValue::from))
        .collect()
}

/// Parses `"1..8"` (inclusive), `"1,3,5"` or a mix such as `"1..3,7"`.
pub fn parse_h_list(text: &str) -> Result<Vec<u64>> {
    let bad = |part: &str| Error::Config(format!("cannot parse h value {part:?}"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let lo: u64 = lo.trim().parse().map_err(|_| bad(part))?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad(part))?;
            if lo > hi {
                return Err(bad(part));
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("empty h list".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_shift_notations() {
        let cfg = RunConfig::from_json(
            r#"{"schema_version": 1, "A": ["0.01+0.02i", [0.03, -0.01]], "B": [0.02], "T": 100.0}"#,
        )
        .unwrap();
        let a = cfg.shifts_a().unwrap().unwrap();
        assert_eq!(a.as_slice(), &[Complex64::new(0.01, 0.02), Complex64::new(0.03, -0.01)]);
        assert_eq!(cfg.shifts_b().unwrap().unwrap().as_slice(), &[Complex64::new(0.02, 0.0)]);
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let err = RunConfig::from_json("{\"schema_version\": 1,\n \"T\": \"x\"}").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let err = RunConfig::from_json(r#"{"schema_version": 1, "bogus": 3}"#).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
        let err = RunConfig::from_json(r#"{"schema_version": 1, "A": ["zz"]}"#).unwrap_err().to_string();
        assert!(err.contains("field A"), "{err}");
        let err = RunConfig::from_json(r#"{"schema_version": 9}"#).unwrap_err().to_string();
        assert!(err.contains("schema_version"), "{err}");
        assert!(RunConfig::from_json(r#"{"schema_version": 1, "T": -3}"#).is_err());
        assert!(RunConfig::from_json(r#"{"T": 3}"#).is_err());
    }

    #[test]
    fn h_ranges() {
        assert_eq!(parse_h_list("1..8").unwrap(), (1..=8).collect::<Vec<_>>());
        assert_eq!(parse_h_list("1..=3, 7").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_h_list("5..2").is_err());
        assert!(parse_h_list("").is_err());
    }

    #[test]
    fn shift_pairs() {
        let (a, b) = parse_shift_pair("0.02,-0.02;0.01+0.01i").unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(b, vec![ShiftValue::Pair([0.01, 0.01])]);
        assert!(parse_shift_pair("0.02").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig::new();
        cfg.a = Some(vec![ShiftValue::Pair([0.01, 0.0])]);
        cfg.h_list = Some(vec![1, 2]);
        cfg.format = Some(Format::Csv);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
