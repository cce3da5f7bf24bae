//! Sequential T-query discrimination procedures.
//!
//! A protocol applies `W_0`, then alternates `(U_i (x) I_a)` and `W_k`, to a
//! probe on the system (dimension `d`) plus an ancilla (dimension `a`). Both
//! candidate unitaries are run side by side and every intermediate state is
//! kept so that per-step audits can be replayed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_cap, haar_unitary_with, random_state, StateVector, UnitaryMatrix, C64};
use crate::spectral::{fidelity_closed_form, trace_distance_pure};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Protocol {
    pub system_dim: usize,
    pub ancilla_dim: usize,
    pub queries: usize,
    pub probe: StateVector,
    /// `W_0 ... W_T`
    pub interleavers: Vec<UnitaryMatrix>,
}

#[derive(Deserialize)]
struct ProtocolRepr {
    system_dim: usize,
    ancilla_dim: usize,
    queries: usize,
    probe: StateVector,
    interleavers: Vec<UnitaryMatrix>,
}

impl<'de> Deserialize<'de> for Protocol {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = ProtocolRepr::deserialize(de)?;
        Protocol::new(r.system_dim, r.ancilla_dim, r.queries, r.probe, r.interleavers)
            .map_err(serde::de::Error::custom)
    }
}

impl Protocol {
    pub fn new(
        system_dim: usize,
        ancilla_dim: usize,
        queries: usize,
        probe: StateVector,
        interleavers: Vec<UnitaryMatrix>,
    ) -> Result<Self> {
        if system_dim == 0 || ancilla_dim == 0 {
            return Err(Error::Shape("system and ancilla dimensions must be positive".into()));
        }
        let total = system_dim.saturating_mul(ancilla_dim);
        check_cap(total)?;
        if interleavers.len() != queries + 1 {
            return Err(Error::Shape(format!(
                "{queries} queries need {} interleavers, got {}",
                queries + 1,
                interleavers.len()
            )));
        }
        if probe.dim() != total {
            return Err(Error::Shape(format!(
                "probe has dim {} but system x ancilla is {total}",
                probe.dim()
            )));
        }
        if let Some(k) = interleavers.iter().position(|w| w.dim() != total) {
            return Err(Error::Shape(format!(
                "interleaver W_{k} has dim {} but system x ancilla is {total}",
                interleavers[k].dim()
            )));
        }
        Ok(Self {
            system_dim,
            ancilla_dim,
            queries,
            probe,
            interleavers,
        })
    }

    /// All interleavers the identity, probe `|0>`.
    pub fn identity(system_dim: usize, ancilla_dim: usize, queries: usize) -> Result<Self> {
        let n = system_dim * ancilla_dim;
        check_cap(n)?;
        Self::new(
            system_dim,
            ancilla_dim,
            queries,
            StateVector::basis(n, 0),
            vec![UnitaryMatrix::identity(n); queries + 1],
        )
    }

    /// Haar-random probe and interleavers.
    pub fn random<R: Rng + ?Sized>(
        system_dim: usize,
        ancilla_dim: usize,
        queries: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let n = system_dim.saturating_mul(ancilla_dim);
        check_cap(n)?;
        let probe = random_state(n, rng)?;
        let interleavers = (0..=queries)
            .map(|_| haar_unitary_with(n, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(system_dim, ancilla_dim, queries, probe, interleavers)
    }

    pub fn total_dim(&self) -> usize {
        self.system_dim * self.ancilla_dim
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub states_1: Vec<StateVector>,
    pub states_2: Vec<StateVector>,
    /// `D_k` for `k = 0..=T`
    pub distances: Vec<f64>,
    /// `|<Phi_1|Phi_2>|`
    pub final_overlap: f64,
}

impl SimulationTrace {
    /// Builds a trace from two state sequences, filling in the distances.
    pub fn from_states(states_1: Vec<StateVector>, states_2: Vec<StateVector>) -> Result<Self> {
        if states_1.len() != states_2.len() || states_1.is_empty() {
            return Err(Error::Shape(format!(
                "state sequences of length {} and {}",
                states_1.len(),
                states_2.len()
            )));
        }
        let distances = states_1
            .iter()
            .zip(&states_2)
            .map(|(a, b)| trace_distance_pure(a, b))
            .collect::<Result<Vec<_>>>()?;
        let last = states_1.len() - 1;
        let final_overlap = states_1[last].inner(&states_2[last])?.norm().min(1.0);
        Ok(Self {
            states_1,
            states_2,
            distances,
            final_overlap,
        })
    }

    pub fn queries(&self) -> usize {
        self.distances.len().saturating_sub(1)
    }

    pub fn final_states(&self) -> (&StateVector, &StateVector) {
        (
            self.states_1.last().expect("non-empty trace"),
            self.states_2.last().expect("non-empty trace"),
        )
    }
}

/// Applies `U (x) I_a` to a state laid out as `system * a + ancilla`.
pub fn apply_on_system(u: &UnitaryMatrix, state: &[C64], ancilla_dim: usize) -> Vec<C64> {
    let d = u.dim();
    let m = u.matrix();
    let mut out = vec![C64::new(0.0, 0.0); state.len()];
    for s in 0..d {
        for t in 0..d {
            let x = m[(s, t)];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            let src = &state[t * ancilla_dim..(t + 1) * ancilla_dim];
            let dst = &mut out[s * ancilla_dim..(s + 1) * ancilla_dim];
            for (o, v) in dst.iter_mut().zip(src) {
                *o += x * v;
            }
        }
    }
    out
}

fn evolve(u: &UnitaryMatrix, p: &Protocol) -> Result<Vec<StateVector>> {
    let mut states = Vec::with_capacity(p.queries + 1);
    let mut current = p.interleavers[0].matrix().mul_vec(p.probe.amplitudes())?;
    states.push(StateVector::from_raw(current.clone()));
    for w in &p.interleavers[1..] {
        let queried = apply_on_system(u, &current, p.ancilla_dim);
        current = w.matrix().mul_vec(&queried)?;
        states.push(StateVector::from_raw(current.clone()));
    }
    Ok(states)
}

/// Runs the protocol for both candidates and records `|phi_i^k>` and `D_k`.
pub fn run_protocol(u1: &UnitaryMatrix, u2: &UnitaryMatrix, p: &Protocol) -> Result<SimulationTrace> {
    if u1.dim() != p.system_dim || u2.dim() != p.system_dim {
        return Err(Error::Shape(format!(
            "unitaries of dims {} and {} for a protocol on system dim {}",
            u1.dim(),
            u2.dim(),
            p.system_dim
        )));
    }
    check_cap(p.total_dim())?;
    SimulationTrace::from_states(evolve(u1, p)?, evolve(u2, p)?)
}

/// Per-step slack `D_k + 2 sqrt(1 - F^2) - D_{k+1}` of the one-query distance
/// growth bound; nonnegative up to rounding for any valid trace.
pub fn audit_lemma2(trace: &SimulationTrace, theta: f64) -> Result<Vec<f64>> {
    let t = trace.distances.len();
    if t == 0 || trace.states_1.len() != t || trace.states_2.len() != t {
        return Err(Error::Shape(format!(
            "trace holds {} distances for {} and {} states",
            t,
            trace.states_1.len(),
            trace.states_2.len()
        )));
    }
    let f = fidelity_closed_form(theta)?;
    let step = 2.0 * (1.0 - f * f).max(0.0).sqrt();
    Ok(trace.distances.windows(2).map(|w| w[0] + step - w[1]).collect())
}
