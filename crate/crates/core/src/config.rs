use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_STATES: usize = 1_000_000;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// Resource ceilings shared by every construction that can blow up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_states: usize,
    pub max_iterations: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: DEFAULT_MAX_STATES,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl Limits {
    pub(crate) fn check_states(&self, n: usize) -> Result<()> {
        if n > self.max_states {
            Err(Error::StateLimit {
                limit: self.max_states,
            })
        } else {
            Ok(())
        }
    }
}

/// Which form of the normality condition a check uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalityMode {
    /// `cl(K) = Q^-1 Q(cl(K)) ∩ cl(L)`.
    #[default]
    Standard,
    /// `cl(K) = Q^-1 Q(K) ∩ cl(L)`; differs from the standard form only
    /// for non-prefix-closed `K`.
    Literal,
}

/// Which subsystems contribute to a group coordinator `G_kj`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoordinatorScope {
    /// Product of the projections of all `n` subsystems.
    #[default]
    AllSubsystems,
    /// Product over the subsystems of group `j` only.
    GroupOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Config {
    pub limits: Limits,
    pub normality: NormalityMode,
    pub coordinator_scope: CoordinatorScope,
    /// Treat unmet sufficient conditions for distributed computation as a
    /// precondition failure instead of repairing them with a posteriori
    /// supervisors.
    pub strict_conditions: bool,
}
