//! Benchmark problems and their analytic Pareto fronts.

mod dtlz;
mod front;
mod wfg;

pub use front::{for_each_front_point, front_optimal_utility, sample_front, FrontSample};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemName {
    Dtlz2,
    Wfg4,
    Wfg9,
}

impl ProblemName {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemName::Dtlz2 => "dtlz2",
            ProblemName::Wfg4 => "wfg4",
            ProblemName::Wfg9 => "wfg9",
        }
    }

    pub fn is_wfg(self) -> bool {
        matches!(self, ProblemName::Wfg4 | ProblemName::Wfg9)
    }
}

/// A benchmark instance: problem family, objective count and box bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: ProblemName,
    pub m: usize,
    pub d: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// WFG position-parameter count; `None` for DTLZ.
    pub wfg_k: Option<usize>,
    /// Negate objectives after evaluation (maximization problems).
    #[serde(default)]
    pub negate: bool,
}

impl ProblemSpec {
    pub fn new(name: ProblemName, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("need at least 2 objectives, got {m}")));
        }
        let spec = match name {
            ProblemName::Dtlz2 => {
                let d = m + 9;
                ProblemSpec {
                    name,
                    m,
                    d,
                    lower: vec![0.0; d],
                    upper: vec![1.0; d],
                    wfg_k: None,
                    negate: false,
                }
            }
            ProblemName::Wfg4 | ProblemName::Wfg9 => {
                let d = 2 * m + 20;
                ProblemSpec {
                    name,
                    m,
                    d,
                    lower: vec![0.0; d],
                    upper: (1..=d).map(|i| 2.0 * i as f64).collect(),
                    wfg_k: Some(2 * (m - 1)),
                    negate: false,
                }
            }
        };
        Ok(spec)
    }

    /// Identifier used in configuration files, e.g. `wfg9-3`.
    pub fn id(&self) -> String {
        format!("{}-{}", self.name.as_str(), self.m)
    }

    pub fn labels(&self) -> Vec<String> {
        (1..=self.m).map(|i| format!("f{i}")).collect()
    }

    /// Semi-axes of the front: the front is `sum (f_i / r_i)^2 = 1`, `f >= 0`.
    pub fn front_radii(&self) -> Vec<f64> {
        match self.name {
            ProblemName::Dtlz2 => vec![1.0; self.m],
            ProblemName::Wfg4 | ProblemName::Wfg9 => (1..=self.m).map(|i| 2.0 * i as f64).collect(),
        }
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::Shape {
                expected: self.d,
                actual: x.len(),
            });
        }
        for (index, ((&value, &lower), &upper)) in x.iter().zip(&self.lower).zip(&self.upper).enumerate() {
            if !(value >= lower && value <= upper) {
                return Err(Error::Domain {
                    index,
                    value,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }

    /// Evaluate the objective vector (minimization) of `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut f = match self.name {
            ProblemName::Dtlz2 => dtlz::dtlz2(x, self.m),
            ProblemName::Wfg4 => wfg::wfg4(x, self.m, self.wfg_k.unwrap_or(2 * (self.m - 1))),
            ProblemName::Wfg9 => wfg::wfg9(x, self.m, self.wfg_k.unwrap_or(2 * (self.m - 1))),
        };
        if self.negate {
            f.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(f)
    }

    /// A decision vector on the Pareto set whose position variables are `position`
    /// (each in `[0, 1]`, length `m - 1`).
    pub fn pareto_optimal_point(&self, position: &[f64]) -> Result<Vec<f64>> {
        if position.len() != self.m - 1 {
            return Err(Error::Shape {
                expected: self.m - 1,
                actual: position.len(),
            });
        }
        Ok(match self.name {
            ProblemName::Dtlz2 => {
                let mut x = vec![0.5; self.d];
                x[..self.m - 1].copy_from_slice(position);
                x
            }
            ProblemName::Wfg4 | ProblemName::Wfg9 => {
                let k = self.wfg_k.unwrap_or(2 * (self.m - 1));
                wfg::optimal_point(self.name, position, self.m, k, self.d)
            }
        })
    }
}

impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownProblem(s.to_string());
        let (family, m) = s.trim().to_ascii_lowercase().split_once('-').map(|(a, b)| (a.to_string(), b.to_string())).ok_or_else(unknown)?;
        let m: usize = m.parse().map_err(|_| unknown())?;
        let name = match family.as_str() {
            "dtlz2" => ProblemName::Dtlz2,
            "wfg4" => ProblemName::Wfg4,
            "wfg9" => ProblemName::Wfg9,
            _ => return Err(unknown()),
        };
        ProblemSpec::new(name, m).map_err(|_| unknown())
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}
