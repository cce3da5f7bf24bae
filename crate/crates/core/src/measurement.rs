//! Optimal measurements on the final state pair and the error criteria they
//! are judged against. Priors are equal throughout.
//!
//! Both constructions live in the two-dimensional span of the states and are
//! embedded back into the full space, so no full-dimension eigensolve is
//! needed to build them.

use serde::{Deserialize, Serialize};

use crate::bounds::{ErrorBudget, ErrorMode};
use crate::error::{Error, Result};
use crate::matrix::{hermitian_eigen, ComplexMatrix, StateVector, C64};

/// Eigenvalue floor for an effect to count as positive semidefinite.
pub const PSD_TOL: f64 = -1e-9;
/// Elementwise tolerance on the completeness relation.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Overlap treated as 1 by the unambiguous construction.
pub const UNIT_OVERLAP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeLabel {
    #[serde(rename = "identify_1")]
    Identify1,
    #[serde(rename = "identify_2")]
    Identify2,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    pub effects: Vec<ComplexMatrix>,
    pub labels: Vec<OutcomeLabel>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>, labels: Vec<OutcomeLabel>) -> Result<Self> {
        let m = Self { effects, labels };
        m.validate()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.effects.first().map_or(0, |e| e.dim())
    }

    pub fn effect(&self, label: OutcomeLabel) -> Option<&ComplexMatrix> {
        self.labels.iter().position(|&l| l == label).map(|i| &self.effects[i])
    }

    /// Checks labels, hermiticity, positivity and completeness.
    pub fn validate(&self) -> Result<()> {
        if self.effects.is_empty() || self.effects.len() != self.labels.len() {
            return Err(Error::Validation(format!(
                "{} effects with {} labels",
                self.effects.len(),
                self.labels.len()
            )));
        }
        for (i, l) in self.labels.iter().enumerate() {
            if self.labels[..i].contains(l) {
                return Err(Error::Validation(format!("label {l:?} appears twice")));
            }
        }
        let n = self.dim();
        let mut total = ComplexMatrix::zeros(n);
        for (i, e) in self.effects.iter().enumerate() {
            if e.dim() != n {
                return Err(Error::Validation(format!(
                    "effect {i} ({:?}) has dim {} instead of {n}",
                    self.labels[i],
                    e.dim()
                )));
            }
            if !e.is_hermitian(COMPLETENESS_TOL) {
                return Err(Error::Validation(format!(
                    "effect {i} ({:?}) is not Hermitian",
                    self.labels[i]
                )));
            }
            let (values, _) = hermitian_eigen(e)?;
            if let Some(&low) = values.first() {
                if low < PSD_TOL {
                    return Err(Error::Validation(format!(
                        "effect {i} ({:?}) has eigenvalue {low:e}",
                        self.labels[i]
                    )));
                }
            }
            total = total.add(e)?;
        }
        let dev = total.max_abs_diff(&ComplexMatrix::identity(n))?;
        if dev > COMPLETENESS_TOL {
            return Err(Error::Validation(format!(
                "effects sum to identity only within {dev:e}"
            )));
        }
        Ok(())
    }
}

/// Born probabilities of a measurement on the two candidate final states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationOutcome {
    pub p_correct_1: f64,
    pub p_correct_2: f64,
    /// State 1 reported as candidate 2.
    pub p_error_1: f64,
    /// State 2 reported as candidate 1.
    pub p_error_2: f64,
    pub p_inconclusive_1: f64,
    pub p_inconclusive_2: f64,
    /// `p_correct_1 + p_correct_2`
    pub p_s: f64,
    pub effect_count: usize,
}

impl DiscriminationOutcome {
    /// Worst-case probability of not identifying the input correctly.
    pub fn worst_error(&self) -> f64 {
        (1.0 - self.p_correct_1.min(self.p_correct_2)).clamp(0.0, 1.0)
    }

    pub fn worst_inconclusive(&self) -> f64 {
        self.p_inconclusive_1.max(self.p_inconclusive_2)
    }
}

/// Error of the optimal two-outcome measurement for overlap `c`.
pub fn helstrom_error(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    (1.0 - (1.0 - c * c).sqrt()) / 2.0
}

fn check_pair(phi1: &StateVector, phi2: &StateVector) -> Result<C64> {
    if phi1.dim() != phi2.dim() {
        return Err(Error::Shape(format!(
            "states of dims {} and {}",
            phi1.dim(),
            phi2.dim()
        )));
    }
    phi1.inner(phi2)
}

/// `a - coef * b`, normalized; `None` when the remainder vanishes.
fn orthogonal_remainder(a: &[C64], b: &[C64], coef: C64) -> Option<Vec<C64>> {
    let r: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - coef * y).collect();
    let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (norm > 1e-12).then(|| r.into_iter().map(|z| z / norm).collect())
}

/// Minimum-error two-outcome measurement for equiprobable pure states.
///
/// `Pi_1` projects onto the nonnegative eigenspace of
/// `|Phi_1><Phi_1| - |Phi_2><Phi_2|`. When the states coincide there is
/// nothing to separate and the measurement degenerates to `{I/2, I/2}`.
pub fn helstrom_povm(phi1: &StateVector, phi2: &StateVector) -> Result<Povm> {
    let gamma = check_pair(phi1, phi2)?;
    let n = phi1.dim();
    let labels = vec![OutcomeLabel::Identify1, OutcomeLabel::Identify2];
    let Some(e2) = orthogonal_remainder(phi2.amplitudes(), phi1.amplitudes(), gamma) else {
        let half = ComplexMatrix::identity(n).scale(C64::new(0.5, 0.0));
        return Ok(Povm {
            effects: vec![half.clone(), half],
            labels,
        });
    };
    let c = gamma.norm().min(1.0);
    let s = (1.0 - c * c).sqrt();
    // negative eigenvector of the difference in the basis (Phi_1, e2),
    // orthogonal to the positive one ((1 + s), -conj(gamma)) / norm
    let norm = ((1.0 + s) * (1.0 + s) + c * c).sqrt();
    let x = gamma / norm;
    let y = C64::new((1.0 + s) / norm, 0.0);
    let minus: Vec<C64> = phi1
        .amplitudes()
        .iter()
        .zip(&e2)
        .map(|(a, b)| x * a + y * b)
        .collect();
    let pi2 = ComplexMatrix::outer(&minus, &minus);
    let pi1 = ComplexMatrix::identity(n).sub(&pi2)?;
    Ok(Povm {
        effects: vec![pi1, pi2],
        labels,
    })
}

/// Optimal zero-misidentification measurement for equiprobable pure states.
///
/// `Pi_1 = |a><a| / (1 + c)` with `a` the normalized part of `Phi_1`
/// orthogonal to `Phi_2`, symmetrically for `Pi_2`; the rest is inconclusive.
/// Each state then yields the inconclusive outcome with probability `c`.
pub fn unambiguous_povm(phi1: &StateVector, phi2: &StateVector) -> Result<Povm> {
    let gamma = check_pair(phi1, phi2)?;
    let c = gamma.norm();
    if c >= 1.0 - UNIT_OVERLAP_TOL {
        return Err(Error::UnambiguousImpossible { overlap: c });
    }
    let n = phi1.dim();
    let weight = C64::new(1.0 / (1.0 + c), 0.0);
    let perp1 = orthogonal_remainder(phi1.amplitudes(), phi2.amplitudes(), gamma.conj())
        .ok_or(Error::UnambiguousImpossible { overlap: c })?;
    let perp2 = orthogonal_remainder(phi2.amplitudes(), phi1.amplitudes(), gamma)
        .ok_or(Error::UnambiguousImpossible { overlap: c })?;
    let pi1 = ComplexMatrix::outer(&perp1, &perp1).scale(weight);
    let pi2 = ComplexMatrix::outer(&perp2, &perp2).scale(weight);
    let pi0 = ComplexMatrix::identity(n).sub(&pi1)?.sub(&pi2)?;
    Ok(Povm {
        effects: vec![pi1, pi2, pi0],
        labels: vec![
            OutcomeLabel::Identify1,
            OutcomeLabel::Identify2,
            OutcomeLabel::Inconclusive,
        ],
    })
}

fn born(effect: Option<&ComplexMatrix>, s: &StateVector) -> Result<f64> {
    match effect {
        Some(e) => Ok(e.expectation(s.amplitudes())?.re.clamp(0.0, 1.0)),
        None => Ok(0.0),
    }
}

/// Outcome probabilities of `m` on both candidate states.
pub fn evaluate_povm(m: &Povm, phi1: &StateVector, phi2: &StateVector) -> Result<DiscriminationOutcome> {
    m.validate()?;
    if phi1.dim() != m.dim() || phi2.dim() != m.dim() {
        return Err(Error::Shape(format!(
            "POVM on dim {} applied to states of dims {} and {}",
            m.dim(),
            phi1.dim(),
            phi2.dim()
        )));
    }
    let e1 = m.effect(OutcomeLabel::Identify1);
    let e2 = m.effect(OutcomeLabel::Identify2);
    let e0 = m.effect(OutcomeLabel::Inconclusive);
    let p_correct_1 = born(e1, phi1)?;
    let p_correct_2 = born(e2, phi2)?;
    Ok(DiscriminationOutcome {
        p_correct_1,
        p_correct_2,
        p_error_1: born(e2, phi1)?,
        p_error_2: born(e1, phi2)?,
        p_inconclusive_1: born(e0, phi1)?,
        p_inconclusive_2: born(e0, phi2)?,
        p_s: p_correct_1 + p_correct_2,
        effect_count: m.effects.len(),
    })
}

/// Result of checking an outcome against an error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub satisfied: bool,
    /// Bounded mode: `min p_correct - (1 - eps)`. One-sided mode: `eps - max p_inconclusive`.
    pub slack: f64,
    /// Largest misidentification probability (one-sided mode only; 0 otherwise).
    pub misidentification: f64,
}

/// Whether the outcome meets a bounded-error or one-sided-error budget.
pub fn check_definition1(outcome: &DiscriminationOutcome, budget: &ErrorBudget) -> Result<ComplianceReport> {
    const TOL: f64 = 1e-9;
    match budget.mode {
        ErrorMode::BoundedError => {
            let slack = outcome.p_correct_1.min(outcome.p_correct_2) - (1.0 - budget.epsilon);
            Ok(ComplianceReport {
                satisfied: slack >= -TOL,
                slack,
                misidentification: 0.0,
            })
        }
        ErrorMode::OneSidedError => {
            if outcome.effect_count < 3 {
                return Err(Error::Usage(format!(
                    "one-sided check needs an inconclusive outcome; POVM has {} effects",
                    outcome.effect_count
                )));
            }
            let misidentification = outcome.p_error_1.max(outcome.p_error_2);
            let slack = budget.epsilon - outcome.worst_inconclusive();
            Ok(ComplianceReport {
                satisfied: misidentification <= TOL && slack >= -TOL,
                slack,
                misidentification,
            })
        }
    }
}
