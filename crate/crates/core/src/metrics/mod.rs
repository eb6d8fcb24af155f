//! Evaluation metrics.

pub mod assignment;
pub mod coref;
pub mod ie;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        Prf {
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
        }
    }
}

pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Sum that does not depend on the order of `terms`, so relabelling or
/// reordering clusters cannot move a score by an ulp.
pub fn ordered_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut v: Vec<f64> = terms.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Ner,
    Re,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Mention,
    Hard,
    Soft,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Mention, Level::Hard, Level::Soft];

    pub fn as_str(&self) -> &'static str {
        match self {
            Level::Mention => "mention",
            Level::Hard => "hard",
            Level::Soft => "soft",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mention" => Ok(Level::Mention),
            "hard" => Ok(Level::Hard),
            "soft" => Ok(Level::Soft),
            other => Err(Error::InvalidArgument(format!("unknown level {other}"))),
        }
    }
}

/// A P/R/F1 triple tagged with the task and level it was computed for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfReport {
    pub task: Task,
    pub level: Level,
    #[serde(flatten)]
    pub scores: Prf,
}

impl PrfReport {
    pub fn precision(&self) -> f64 {
        self.scores.precision
    }

    pub fn recall(&self) -> f64 {
        self.scores.recall
    }

    pub fn f1(&self) -> f64 {
        self.scores.f1
    }
}
