//! Solve-mode switches shared by the formulations, heuristics and oracle.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SplitPolicy {
    #[default]
    Optimize,
    /// No visit is split.
    Forbid,
    /// Every splittable visit is split.
    Force,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Objective {
    /// Wage-weighted working time.
    #[default]
    Cost,
    /// Total travel time.
    Travel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SolveMode {
    pub split_policy: SplitPolicy,
    pub objective: Objective,
    pub preprocessed: bool,
}

impl Default for SolveMode {
    fn default() -> Self {
        Self { split_policy: SplitPolicy::Optimize, objective: Objective::Cost, preprocessed: true }
    }
}

impl SolveMode {
    pub fn raw() -> Self {
        Self { preprocessed: false, ..Self::default() }
    }

    pub fn with_split(mut self, policy: SplitPolicy) -> Self {
        self.split_policy = policy;
        self
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }
}

impl SplitPolicy {
    pub fn name(self) -> &'static str {
        match self {
            SplitPolicy::Optimize => "optimize",
            SplitPolicy::Forbid => "forbid",
            SplitPolicy::Force => "force",
        }
    }

    /// Whether a split decision is allowed under this policy.
    pub fn allows(self, split: bool) -> bool {
        match self {
            SplitPolicy::Optimize => true,
            SplitPolicy::Forbid => !split,
            SplitPolicy::Force => split,
        }
    }
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Cost => "cost",
            Objective::Travel => "travel",
        }
    }
}

impl fmt::Display for SplitPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {what} `{value}`")]
pub struct ParseModeError {
    pub what: &'static str,
    pub value: String,
}

impl FromStr for SplitPolicy {
    type Err = ParseModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "optimize" | "split" => Ok(SplitPolicy::Optimize),
            "forbid" | "no-split" => Ok(SplitPolicy::Forbid),
            "force" | "full-split" => Ok(SplitPolicy::Force),
            _ => Err(ParseModeError { what: "split policy", value: s.to_string() }),
        }
    }
}

impl FromStr for Objective {
    type Err = ParseModeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cost" | "operational-cost" => Ok(Objective::Cost),
            "travel" | "travel-time" => Ok(Objective::Travel),
            _ => Err(ParseModeError { what: "objective", value: s.to_string() }),
        }
    }
}
