//! Lower bounds on the number of queries needed to tell two unitaries apart.
//!
//! All bounds take `theta`, the length of the smallest arc holding the
//! eigenvalues of `U1^dagger U2`, and an error budget. Ceilings are taken as
//! `ceil(raw - CEIL_SLACK)` so that values which are integers analytically are
//! not bumped up by rounding noise.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Subtracted before every ceiling.
pub const CEIL_SLACK: f64 = 1e-9;

/// Below this arc length the pair is treated as equal up to a global phase.
pub const INDISTINGUISHABLE_THETA: f64 = 1e-12;

pub const CEILING_POLICY: &str = "t_lower = ceil(raw_value - 1e-9)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    /// Each candidate identified with probability at least `1 - epsilon`.
    BoundedError,
    /// Never misidentified; inconclusive with probability at most `epsilon`.
    OneSidedError,
}

impl FromStr for ErrorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounded" | "bounded_error" => Ok(Self::BoundedError),
            "onesided" | "one_sided" | "one_sided_error" => Ok(Self::OneSidedError),
            other => Err(Error::Usage(format!(
                "unknown mode {other:?}; expected bounded or onesided"
            ))),
        }
    }
}

impl fmt::Display for ErrorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::BoundedError => "bounded_error",
            Self::OneSidedError => "one_sided_error",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub epsilon: f64,
    pub mode: ErrorMode,
}

impl ErrorBudget {
    pub fn new(epsilon: f64, mode: ErrorMode) -> Result<Self> {
        let max = match mode {
            ErrorMode::BoundedError => 0.5,
            ErrorMode::OneSidedError => 1.0,
        };
        if !(0.0..=max).contains(&epsilon) {
            return Err(Error::Domain(format!(
                "epsilon {epsilon} outside [0, {max}] for {mode}"
            )));
        }
        Ok(Self { epsilon, mode })
    }

    pub fn bounded(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, ErrorMode::BoundedError)
    }

    pub fn one_sided(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, ErrorMode::OneSidedError)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theta: f64,
    pub epsilon: f64,
    pub mode: ErrorMode,
    pub t_lower: u64,
    pub raw_value: f64,
}

fn check_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() || !(0.0..TAU).contains(&theta) {
        return Err(Error::Domain(format!("theta {theta} outside (0, 2pi)")));
    }
    if theta < INDISTINGUISHABLE_THETA {
        return Err(Error::Indistinguishable { theta });
    }
    Ok(())
}

fn ceil_with_slack(raw: f64) -> u64 {
    let c = (raw - CEIL_SLACK).ceil();
    if c <= 0.0 {
        0
    } else {
        c as u64
    }
}

/// Bounded-error lower bound `ceil(2 sqrt(1 - 4 eps (1 - eps)) / theta)`.
pub fn t_min_bounded(theta: f64, epsilon: f64) -> Result<BoundReport> {
    let budget = ErrorBudget::bounded(epsilon)?;
    check_theta(theta)?;
    let radical = (1.0 - 4.0 * epsilon * (1.0 - epsilon)).max(0.0).sqrt();
    let raw_value = 2.0 * radical / theta;
    Ok(BoundReport {
        theta,
        epsilon,
        mode: budget.mode,
        t_lower: ceil_with_slack(raw_value),
        raw_value,
    })
}

/// One-sided-error lower bound `ceil(2 sqrt(1 - eps^2) / theta)`.
pub fn t_min_onesided(theta: f64, epsilon: f64) -> Result<BoundReport> {
    let budget = ErrorBudget::one_sided(epsilon)?;
    check_theta(theta)?;
    let raw_value = 2.0 * (1.0 - epsilon * epsilon).max(0.0).sqrt() / theta;
    Ok(BoundReport {
        theta,
        epsilon,
        mode: budget.mode,
        t_lower: ceil_with_slack(raw_value),
        raw_value,
    })
}

pub fn t_min(theta: f64, budget: ErrorBudget) -> Result<BoundReport> {
    match budget.mode {
        ErrorMode::BoundedError => t_min_bounded(theta, budget.epsilon),
        ErrorMode::OneSidedError => t_min_onesided(theta, budget.epsilon),
    }
}

/// Number of queries with which the pair can be told apart perfectly, `ceil(pi / theta)`.
pub fn t_perfect(theta: f64) -> Result<u64> {
    check_theta(theta)?;
    Ok(ceil_with_slack(PI / theta))
}

/// Smallest error the bound still allows after `t` queries.
///
/// Inverts the bounded-error radical through `sqrt(1 - 4 eps (1 - eps)) = 1 - 2 eps`.
pub fn epsilon_floor(theta: f64, t: u64, mode: ErrorMode) -> Result<f64> {
    check_theta(theta)?;
    let half_reach = t as f64 * theta / 2.0;
    Ok(match mode {
        ErrorMode::BoundedError => ((1.0 - half_reach) / 2.0).max(0.0),
        ErrorMode::OneSidedError => (1.0 - half_reach * half_reach).max(0.0).sqrt(),
    })
}
