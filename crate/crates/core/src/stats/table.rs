//! Plain-text table of frozen Monte Carlo maximal variances, one entry per
//! line:
//!
//! ```text
//! manifold n k samples seed estimate std_error failure_fraction
//! ```
//!
//! Blank lines and `#` comments are ignored.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::stiefel::{ManifoldSpec, MaxVarProvenance, StiefelShape};

use super::MonteCarloEstimate;

const BUILTIN: &str = include_str!("../../data/maxvar.txt");
const MANIFOLD_TAG: &str = "stiefel";

#[derive(Debug, Clone, PartialEq)]
pub struct MaxVarEntry {
    pub shape: StiefelShape,
    pub samples: usize,
    pub seed: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub failure_fraction: f64,
}

impl MaxVarEntry {
    pub fn from_estimate(shape: StiefelShape, est: &MonteCarloEstimate) -> Self {
        MaxVarEntry {
            shape,
            samples: est.samples,
            seed: est.seed,
            estimate: est.estimate,
            std_error: est.std_error,
            failure_fraction: est.failure_fraction(),
        }
    }

    pub fn to_spec(&self) -> Result<ManifoldSpec> {
        ManifoldSpec::new(
            self.shape,
            self.estimate,
            MaxVarProvenance::MonteCarlo {
                samples: self.samples,
                seed: self.seed,
                std_error: self.std_error,
                failure_fraction: self.failure_fraction,
            },
        )
    }

    pub fn to_line(&self) -> String {
        format!(
            "{MANIFOLD_TAG} {} {} {} {} {:.10} {:.3e} {:.6}",
            self.shape.n,
            self.shape.k,
            self.samples,
            self.seed,
            self.estimate,
            self.std_error,
            self.failure_fraction
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MaxVarTable {
    entries: Vec<MaxVarEntry>,
}

fn field<T: std::str::FromStr>(tok: &str, name: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::invalid(format!("line {line}: bad {name} `{tok}`")))
}

impl MaxVarTable {
    /// The table shipped with the crate.
    pub fn builtin() -> Self {
        MaxVarTable::parse(BUILTIN).expect("builtin maxvar table is well formed")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            if toks.len() != 8 {
                return Err(Error::invalid(format!(
                    "line {line}: expected 8 fields, found {}",
                    toks.len()
                )));
            }
            if toks[0] != MANIFOLD_TAG {
                return Err(Error::invalid(format!(
                    "line {line}: unknown manifold `{}`",
                    toks[0]
                )));
            }
            let shape = StiefelShape::new(field(toks[1], "n", line)?, field(toks[2], "k", line)?)?;
            let entry = MaxVarEntry {
                shape,
                samples: field(toks[3], "samples", line)?,
                seed: field(toks[4], "seed", line)?,
                estimate: field(toks[5], "estimate", line)?,
                std_error: field(toks[6], "std_error", line)?,
                failure_fraction: field(toks[7], "failure_fraction", line)?,
            };
            if !(entry.estimate.is_finite() && entry.estimate > 0.0) {
                return Err(Error::invalid(format!("line {line}: estimate must be positive")));
            }
            entries.push(entry);
        }
        Ok(MaxVarTable { entries })
    }

    pub fn format(&self) -> String {
        let mut out = String::from(
            "# manifold n k samples seed estimate std_error failure_fraction\n",
        );
        for e in &self.entries {
            let _ = writeln!(out, "{}", e.to_line());
        }
        out
    }

    pub fn entries(&self) -> &[MaxVarEntry] {
        &self.entries
    }

    pub fn get(&self, shape: StiefelShape) -> Option<&MaxVarEntry> {
        self.entries.iter().find(|e| e.shape == shape)
    }

    /// Inserts or replaces the entry for its shape.
    pub fn insert(&mut self, entry: MaxVarEntry) {
        match self.entries.iter_mut().find(|e| e.shape == entry.shape) {
            Some(e) => *e = entry,
            None => self.entries.push(entry),
        }
    }

    pub fn spec(&self, shape: StiefelShape) -> Result<ManifoldSpec> {
        self.get(shape)
            .ok_or_else(|| Error::invalid(format!("no tabulated maximal variance for {shape}")))?
            .to_spec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "# comment\n\nstiefel 4 2 100000 7 1.0330000000 2.100e-3 0.004500  # trailing\n";
        let t = MaxVarTable::parse(text).unwrap();
        assert_eq!(t.entries().len(), 1);
        let e = &t.entries()[0];
        assert_eq!((e.shape.n, e.shape.k, e.samples, e.seed), (4, 2, 100000, 7));
        let again = MaxVarTable::parse(&t.format()).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(MaxVarTable::parse("stiefel 4 2 100").is_err());
        assert!(MaxVarTable::parse("grassmann 4 2 1 1 1.0 0.1 0.0").is_err());
        assert!(MaxVarTable::parse("stiefel 2 4 1 1 1.0 0.1 0.0").is_err());
        assert!(MaxVarTable::parse("stiefel 4 2 1 1 -1.0 0.1 0.0").is_err());
    }

    #[test]
    fn builtin_parses() {
        let t = MaxVarTable::builtin();
        for e in t.entries() {
            assert!(e.failure_fraction <= 0.05);
            assert!(t.spec(e.shape).is_ok());
        }
    }
}
