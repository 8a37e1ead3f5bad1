use std::fmt;

use serde::{Deserialize, Serialize};

/// Which solver produced a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Fine,
    MsImplicit,
    MsPartial,
    MsExplicitDiag,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Fine, Scheme::MsImplicit, Scheme::MsPartial, Scheme::MsExplicitDiag];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Fine => "fine",
            Scheme::MsImplicit => "ms_implicit",
            Scheme::MsPartial => "ms_partial",
            Scheme::MsExplicitDiag => "ms_explicit_diag",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Time-indexed fine-grid nodal pressures. Coarse schemes store the
/// reconstructed fine field.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub scheme: Scheme,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(scheme: Scheme) -> Self {
        Trajectory { scheme, times: Vec::new(), snapshots: Vec::new() }
    }

    pub fn push(&mut self, time: f64, field: Vec<f64>) {
        debug_assert!(self.times.last().is_none_or(|&t| time > t), "times must increase");
        self.times.push(time);
        self.snapshots.push(field);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.snapshots.last().map(Vec::as_slice)
    }

    /// Global `(min, max)` over all snapshots.
    pub fn range(&self) -> (f64, f64) {
        self.snapshots
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}
