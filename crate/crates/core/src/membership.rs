use std::fmt;

use crate::subspace::Verdict;

/// One named condition of a membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub label: String,
    pub residual: f64,
    pub holds: bool,
}

/// Graded result of a membership test: every condition with its residual.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Membership {
    pub conditions: Vec<Condition>,
}

impl Membership {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, label: impl Into<String>, verdict: Verdict) {
        self.conditions.push(Condition { label: label.into(), residual: verdict.residual, holds: verdict.holds });
    }

    /// A condition without a continuous residual (dimension counts).
    pub fn push_exact(&mut self, label: impl Into<String>, holds: bool) {
        self.conditions.push(Condition { label: label.into(), residual: if holds { 0.0 } else { 1.0 }, holds });
    }

    pub fn extend(&mut self, other: Membership) {
        self.conditions.extend(other.conditions);
    }

    pub fn holds(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn worst_residual(&self) -> f64 {
        self.conditions.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn first_violation(&self) -> Option<&Condition> {
        self.conditions.iter().find(|c| !c.holds)
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.first_violation() {
            None => write!(f, "holds (worst residual {:.3e})", self.worst_residual()),
            Some(c) => write!(f, "fails at {} (residual {:.3e})", c.label, c.residual),
        }
    }
}
