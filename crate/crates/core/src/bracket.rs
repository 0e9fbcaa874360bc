use serde::{Deserialize, Serialize};

use crate::error::{ParkError, Result};

/// Closed interval `[lo, hi]` known to contain a quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(ParkError::Domain(format!("bracket endpoints must be finite, got [{lo}, {hi}]")));
        }
        if lo > hi {
            return Err(ParkError::Domain(format!("bracket is inverted: [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// True when `v` lies within `slack` of the bracket.
    pub fn contains_within(&self, v: f64, slack: f64) -> bool {
        self.lo - slack <= v && v <= self.hi + slack
    }

    /// True when `self` lies inside `outer`, up to `tol`.
    pub fn is_subset_of(&self, outer: &Bracket, tol: f64) -> bool {
        outer.lo - tol <= self.lo && self.hi <= outer.hi + tol
    }

    pub fn intersect(&self, other: &Bracket) -> Option<Bracket> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Bracket { lo, hi })
    }
}
