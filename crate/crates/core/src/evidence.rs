//! Mass functions over the two-element frame {speaker, hearer}.
//!
//! A basic probability assignment on this frame has three focal elements:
//! the two singletons and the whole frame Θ. Mass on Θ is belief that the
//! evidence does not commit to either participant. Combination uses the
//! normalized Dempster rule.

use std::fmt;

use crate::error::{Error, Result};

/// Tolerance on `speaker + hearer + theta == 1` accepted at construction.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Singleton masses closer than this count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// A participant's role relative to the current turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Speaker,
    Hearer,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Speaker => Role::Hearer,
            Role::Hearer => Role::Speaker,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Speaker => "speaker",
            Role::Hearer => "hearer",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Basic probability assignment over {speaker, hearer}.
///
/// The empty set never carries mass. Values are immutable once built; every
/// constructor checks non-negativity and that the three masses sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassFunction {
    speaker: f64,
    hearer: f64,
    theta: f64,
}

impl MassFunction {
    pub fn new(speaker: f64, hearer: f64, theta: f64) -> Result<Self> {
        for (name, v) in [("speaker", speaker), ("hearer", hearer), ("theta", theta)] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!(
                    "mass on {name} is {v}, outside [0, 1]"
                )));
            }
        }
        let sum = speaker + hearer + theta;
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::domain(format!("masses sum to {sum}, expected 1")));
        }
        Ok(MassFunction {
            speaker,
            hearer,
            theta,
        })
    }

    /// No evidence: all mass on Θ. Identity element of [`combine`](Self::combine).
    pub const fn vacuous() -> Self {
        MassFunction {
            speaker: 0.0,
            hearer: 0.0,
            theta: 1.0,
        }
    }

    /// Bayesian index with `x` on the speaker and `1 - x` on the hearer.
    pub fn bayesian(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("bayesian index {x} outside [0, 1]")));
        }
        Ok(MassFunction {
            speaker: x,
            hearer: 1.0 - x,
            theta: 0.0,
        })
    }

    /// Bayesian index with `strength` on `role` and the rest on the other role.
    pub fn favoring(role: Role, strength: f64) -> Result<Self> {
        match role {
            Role::Speaker => Self::bayesian(strength),
            Role::Hearer => Self::bayesian(1.0 - strength),
        }
    }

    pub fn speaker(&self) -> f64 {
        self.speaker
    }

    pub fn hearer(&self) -> f64 {
        self.hearer
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mass(&self, role: Role) -> f64 {
        match role {
            Role::Speaker => self.speaker,
            Role::Hearer => self.hearer,
        }
    }

    /// Conflict mass `m1(s)·m2(h) + m1(h)·m2(s)` between two assignments.
    pub fn conflict(&self, other: &MassFunction) -> f64 {
        self.speaker * other.hearer + self.hearer * other.speaker
    }

    /// Dempster's rule of combination.
    ///
    /// Fails with [`Error::TotalConflict`] when the conflict mass is one.
    pub fn combine(&self, other: &MassFunction) -> Result<MassFunction> {
        let speaker =
            self.speaker * other.speaker + self.speaker * other.theta + self.theta * other.speaker;
        let hearer =
            self.hearer * other.hearer + self.hearer * other.theta + self.theta * other.hearer;
        let theta = self.theta * other.theta;
        // Equal to 1 - conflict, but summed from non-negative terms so it
        // stays accurate when the conflict is close to one.
        let norm = speaker + hearer + theta;
        if norm <= 0.0 {
            return Err(Error::TotalConflict);
        }
        Ok(MassFunction {
            speaker: speaker / norm,
            hearer: hearer / norm,
            theta: theta / norm,
        })
    }

    /// Same assignment re-expressed with the roles exchanged.
    pub fn swapped(&self) -> MassFunction {
        MassFunction {
            speaker: self.hearer,
            hearer: self.speaker,
            theta: self.theta,
        }
    }

    /// Holder predicted by this assignment; ties go to the speaker.
    ///
    /// Masses within [`TIE_TOLERANCE`] of each other are a tie, so that
    /// rounding in the combination order cannot decide an exact tie.
    pub fn predicted_holder(&self) -> Role {
        if self.speaker + TIE_TOLERANCE >= self.hearer {
            Role::Speaker
        } else {
            Role::Hearer
        }
    }

    /// Move up to `amount` of uncommitted mass onto `role`.
    ///
    /// The transfer is clamped so that at least `floor` stays on Θ; the
    /// opposing singleton is never touched. Returns the amount moved.
    pub(crate) fn shift_from_theta(&mut self, role: Role, amount: f64, floor: f64) -> f64 {
        let moved = amount.min(self.theta - floor).max(0.0);
        match role {
            Role::Speaker => self.speaker += moved,
            Role::Hearer => self.hearer += moved,
        }
        self.theta -= moved;
        moved
    }
}

impl Default for MassFunction {
    fn default() -> Self {
        Self::vacuous()
    }
}

/// Left fold of [`MassFunction::combine`] over `masses`.
pub fn combine_all(masses: &[MassFunction]) -> Result<MassFunction> {
    let (first, rest) = masses
        .split_first()
        .ok_or_else(|| Error::domain("cannot combine an empty list of mass functions"))?;
    rest.iter().try_fold(*first, |acc, m| acc.combine(m))
}
