//! Constructing discrimination protocols.
//!
//! [`build_parallel`] gives the explicit parallel scheme: `T` copies of the
//! unknown unitary act on an entangled probe built from the two eigenvectors
//! at the ends of the smallest eigenphase arc of `U1^dagger U2`. It is
//! simulated as a tensor power directly instead of being rewritten as a
//! sequential protocol with swap interleavers.
//!
//! [`optimize_protocol`] searches sequential protocols numerically: coordinate
//! sweeps with parabola fits, a BFGS polish on finite-difference gradients,
//! and random restarts. The objective is the final overlap `|<phi1|phi2>|`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::INDISTINGUISHABLE_THETA;
use crate::error::{Error, Result};
use crate::matrix::{check_cap, complex_gaussian, expm_i_hermitian, ComplexMatrix, StateVector, UnitaryMatrix, C64};
use crate::measurement::helstrom_error;
use crate::protocol::{apply_on_system, Protocol, SimulationTrace};
use crate::spectral::relative_arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelPlan {
    pub copies: usize,
    pub theta: f64,
    /// `(theta_a, theta_b)`, the arc endpoints; `theta_b - theta_a = theta` mod 2pi.
    pub extremal_phases: (f64, f64),
    #[serde(skip)]
    pub extremal_vectors: (Vec<C64>, Vec<C64>),
    pub probe: StateVector,
    /// `|cos(T theta / 2)|`
    pub predicted_overlap: f64,
}

fn tensor_power(v: &[C64], t: usize) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for _ in 0..t {
        out = out.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
    }
    out
}

/// Applies `u` to tensor factor `factor` of a `t`-fold product of `d`-dimensional spaces.
fn apply_on_factor(u: &UnitaryMatrix, state: &[C64], factor: usize, t: usize) -> Vec<C64> {
    let d = u.dim();
    let right = d.pow((t - factor - 1) as u32);
    let block = d * right;
    state
        .chunks_exact(block)
        .flat_map(|chunk| apply_on_system(u, chunk, right))
        .collect()
}

/// Parallel scheme on `t` copies.
pub fn build_parallel(u1: &UnitaryMatrix, u2: &UnitaryMatrix, t: usize) -> Result<ParallelPlan> {
    if t == 0 {
        return Err(Error::Domain("the parallel scheme needs at least one copy".into()));
    }
    let d = u1.dim();
    let total = u32::try_from(t)
        .ok()
        .and_then(|e| d.checked_pow(e))
        .unwrap_or(usize::MAX);
    check_cap(total)?;
    let (arc, spec) = relative_arc(u1, u2)?;
    if arc.theta < INDISTINGUISHABLE_THETA {
        return Err(Error::Indistinguishable { theta: arc.theta });
    }
    // on multiplicity take the first eigenvector at each endpoint phase
    let first_at = |phase: f64| spec.phases.iter().position(|&p| p == phase).expect("endpoint is a spectrum member");
    let a = spec.vectors[first_at(arc.start_phase)].clone();
    let b = spec.vectors[first_at(arc.end_phase)].clone();
    let pa = tensor_power(&a, t);
    let pb = tensor_power(&b, t);
    let probe = StateVector::new(
        pa.iter()
            .zip(&pb)
            .map(|(x, y)| (x + y) * FRAC_1_SQRT_2)
            .collect(),
    )?;
    Ok(ParallelPlan {
        copies: t,
        theta: arc.theta,
        extremal_phases: (arc.start_phase, arc.end_phase),
        extremal_vectors: (a, b),
        probe,
        predicted_overlap: (t as f64 * arc.theta / 2.0).cos().abs(),
    })
}

impl ParallelPlan {
    /// Applies the copies one at a time; entry `k` of each state list has the
    /// first `k` copies applied, so the distances can be audited per query.
    pub fn trace(&self, u1: &UnitaryMatrix, u2: &UnitaryMatrix) -> Result<SimulationTrace> {
        let d = self.extremal_vectors.0.len();
        if u1.dim() != d || u2.dim() != d {
            return Err(Error::Shape(format!(
                "plan built for dim {d}, got unitaries of dims {} and {}",
                u1.dim(),
                u2.dim()
            )));
        }
        let run = |u: &UnitaryMatrix| {
            let mut cur = self.probe.amplitudes().to_vec();
            let mut states = vec![StateVector::from_raw(cur.clone())];
            for k in 0..self.copies {
                cur = apply_on_factor(u, &cur, k, self.copies);
                states.push(StateVector::from_raw(cur.clone()));
            }
            states
        };
        SimulationTrace::from_states(run(u1), run(u2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub queries: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub seed: u64,
    /// Defaults to the system dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla_dim: Option<usize>,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Validation("restarts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Validation("max_iterations must be at least 1".into()));
        }
        if self.step_tolerance.is_nan() || self.step_tolerance <= 0.0 {
            return Err(Error::Validation("step_tolerance must be positive".into()));
        }
        if self.ancilla_dim == Some(0) {
            return Err(Error::Validation("ancilla_dim must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub protocol: Protocol,
    /// `|<Phi_1|Phi_2>|` of the returned protocol.
    pub overlap: f64,
    /// Overlap of the first restart's random starting point.
    pub initial_overlap: f64,
    pub budget_exhausted: bool,
    pub best_restart: usize,
    /// Best overlap after each sweep, per restart.
    pub histories: Vec<Vec<f64>>,
}

/// Search space: probe amplitudes, then one Hermitian generator per inner
/// interleaver `W_1 .. W_{T-1}`. `W_0` and `W_T` are fixed to the identity:
/// `W_0` folds into the probe and `W_T` does not change the overlap.
struct Objective<'a> {
    u1: &'a UnitaryMatrix,
    u2: &'a UnitaryMatrix,
    ancilla_dim: usize,
    queries: usize,
    n: usize,
}

impl Objective<'_> {
    fn param_count(&self) -> usize {
        2 * self.n + self.queries.saturating_sub(1) * self.n * self.n
    }

    fn probe(&self, x: &[f64]) -> Vec<C64> {
        let raw: Vec<C64> = x[..2 * self.n].chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        raw.into_iter().map(|z| z / norm).collect()
    }

    fn generator(&self, p: &[f64]) -> ComplexMatrix {
        let n = self.n;
        let mut h = ComplexMatrix::zeros(n);
        let mut it = p.iter();
        for r in 0..n {
            h[(r, r)] = C64::new(*it.next().unwrap(), 0.0);
            for c in (r + 1)..n {
                let z = C64::new(*it.next().unwrap(), *it.next().unwrap());
                h[(r, c)] = z;
                h[(c, r)] = z.conj();
            }
        }
        h
    }

    fn interleavers(&self, x: &[f64]) -> Result<Vec<UnitaryMatrix>> {
        let n2 = self.n * self.n;
        let inner = x[2 * self.n..]
            .chunks_exact(n2)
            .map(|p| expm_i_hermitian(&self.generator(p)));
        std::iter::once(Ok(UnitaryMatrix::identity(self.n)))
            .chain(inner)
            .chain((self.queries > 0).then(|| Ok(UnitaryMatrix::identity(self.n))))
            .collect()
    }

    fn inner(&self, probe: &[C64], ws: &[UnitaryMatrix]) -> Result<C64> {
        let mut s1 = probe.to_vec();
        let mut s2 = probe.to_vec();
        for (k, w) in ws.iter().enumerate().skip(1) {
            s1 = apply_on_system(self.u1, &s1, self.ancilla_dim);
            s2 = apply_on_system(self.u2, &s2, self.ancilla_dim);
            if k < self.queries {
                s1 = w.matrix().mul_vec(&s1)?;
                s2 = w.matrix().mul_vec(&s2)?;
            }
        }
        Ok(s1.iter().zip(&s2).map(|(a, b)| a.conj() * b).sum())
    }

    fn residual(&self, x: &[f64]) -> Result<C64> {
        self.inner(&self.probe(x), &self.interleavers(x)?)
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.residual(x)?.norm().min(1.0))
    }

    fn protocol(&self, x: &[f64]) -> Result<Protocol> {
        let probe = StateVector::normalized(self.probe(x))?;
        Protocol::new(
            self.u1.dim(),
            self.ancilla_dim,
            self.queries,
            probe,
            self.interleavers(x)?,
        )
    }
}

struct RestartResult {
    x: Vec<f64>,
    value: f64,
    initial: f64,
    exhausted: bool,
    history: Vec<f64>,
}

const INITIAL_STEP: f64 = 0.5;
const POLISH_ITERATIONS: usize = 20;

fn gradient(obj: &Objective, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut xs = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        xs[i] = x[i] + h;
        let fp = obj.eval(&xs)?;
        xs[i] = x[i] - h;
        let fm = obj.eval(&xs)?;
        xs[i] = x[i];
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS with central-difference gradients and backtracking. Only moves to
/// points that lower the objective.
fn bfgs_polish(obj: &Objective, x: &mut Vec<f64>, fx: &mut f64, iterations: usize) -> Result<bool> {
    let m = x.len();
    let h = 1e-6;
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    let mut g = gradient(obj, x, h)?;
    let mut moved = false;
    for _ in 0..iterations {
        let dir: Vec<f64> = (0..m).map(|i| -dot(&inv[i * m..(i + 1) * m], &g)).collect();
        let slope = dot(&dir, &g);
        if slope.is_nan() || slope >= 0.0 {
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + alpha * di).collect();
            let fv = obj.eval(&xn)?;
            if fv <= *fx + 1e-4 * alpha * slope {
                accepted = Some((xn, fv));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fv)) = accepted else { break };
        let gn = gradient(obj, &xn, h)?;
        let s: Vec<f64> = xn.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let hy: Vec<f64> = (0..m).map(|i| dot(&inv[i * m..(i + 1) * m], &y)).collect();
            let yhy = dot(&y, &hy);
            let k = (sy + yhy) / (sy * sy);
            for i in 0..m {
                for j in 0..m {
                    inv[i * m + j] += k * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        *x = xn;
        *fx = fv;
        g = gn;
        moved = true;
    }
    Ok(moved)
}

/// Coordinate-wise search: at each coordinate try `x +- h` and the vertex of
/// the parabola through the three values; halve `h` after a sweep that
/// improves nothing. Each sweep ends with a short BFGS polish.
fn local_search(obj: &Objective, cfg: &SearchConfig, rng: &mut ChaCha8Rng) -> Result<RestartResult> {
    let dim = obj.param_count();
    let mut x: Vec<f64> = (0..obj.n)
        .flat_map(|_| {
            let z = complex_gaussian(rng);
            [z.re, z.im]
        })
        .collect();
    x.extend((2 * obj.n..dim).map(|_| rng.random_range(-PI..PI)));
    let mut fx = obj.eval(&x)?;
    let initial = fx;
    let mut history = vec![fx];
    let mut step = INITIAL_STEP;
    let mut sweeps = 0;
    while sweeps < cfg.max_iterations && step > cfg.step_tolerance && fx > 0.0 {
        let mut improved = false;
        for i in 0..dim {
            let x0 = x[i];
            x[i] = x0 + step;
            let fp = obj.eval(&x)?;
            x[i] = x0 - step;
            let fm = obj.eval(&x)?;
            let mut best = (fx, x0);
            if fp < best.0 {
                best = (fp, x0 + step);
            }
            if fm < best.0 {
                best = (fm, x0 - step);
            }
            let curvature = fp - 2.0 * fx + fm;
            if curvature > 0.0 {
                let delta = (step * (fm - fp) / (2.0 * curvature)).clamp(-2.0 * step, 2.0 * step);
                x[i] = x0 + delta;
                let fv = obj.eval(&x)?;
                if fv < best.0 {
                    best = (fv, x0 + delta);
                }
            }
            x[i] = best.1;
            if best.0 < fx {
                fx = best.0;
                improved = true;
            }
        }
        if bfgs_polish(obj, &mut x, &mut fx, POLISH_ITERATIONS)? {
            improved = true;
        }
        sweeps += 1;
        history.push(fx);
        if !improved {
            step *= 0.5;
        }
    }
    Ok(RestartResult {
        x,
        value: fx,
        initial,
        exhausted: sweeps >= cfg.max_iterations && step > cfg.step_tolerance && fx > 0.0,
        history,
    })
}

/// Best sequential protocol found for the pair at `cfg.queries` queries.
///
/// Deterministic for a fixed configuration; restarts are reduced by minimum
/// overlap with ties going to the lower restart index. The returned protocol
/// is checked against the query lower bound before it is handed out.
pub fn optimize_protocol(u1: &UnitaryMatrix, u2: &UnitaryMatrix, cfg: &SearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    if u1.dim() != u2.dim() {
        return Err(Error::Shape(format!(
            "unitaries of dims {} and {}",
            u1.dim(),
            u2.dim()
        )));
    }
    let d = u1.dim();
    let a = cfg.ancilla_dim.unwrap_or(d);
    let n = d.saturating_mul(a);
    check_cap(n)?;
    let (arc, _) = relative_arc(u1, u2)?;
    if arc.theta < INDISTINGUISHABLE_THETA {
        return Err(Error::Indistinguishable { theta: arc.theta });
    }

    if cfg.queries == 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let probe = crate::matrix::random_state(n, &mut rng)?;
        let protocol = Protocol::new(d, a, 0, probe, vec![UnitaryMatrix::identity(n)])?;
        return Ok(SearchOutcome {
            protocol,
            overlap: 1.0,
            initial_overlap: 1.0,
            budget_exhausted: false,
            best_restart: 0,
            histories: vec![vec![1.0]],
        });
    }

    let obj = Objective {
        u1,
        u2,
        ancilla_dim: a,
        queries: cfg.queries,
        n,
    };
    let mut results = Vec::with_capacity(cfg.restarts);
    for r in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(r as u64);
        results.push(local_search(&obj, cfg, &mut rng)?);
    }
    let best_restart = results
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let best = &results[best_restart];
    let protocol = obj.protocol(&best.x)?;
    let overlap = best.value.min(1.0);

    let eps = helstrom_error(overlap);
    let reach = cfg.queries as f64 * arc.theta;
    let needed = 2.0 * (1.0 - 4.0 * eps * (1.0 - eps)).max(0.0).sqrt();
    if needed > reach + 1e-6 {
        return Err(Error::BoundViolation(format!(
            "search returned Helstrom error {eps} at T = {} and theta = {}, \
             requiring 2 sqrt(1 - 4 eps (1 - eps)) = {needed} > T theta = {reach}",
            cfg.queries, arc.theta
        )));
    }

    Ok(SearchOutcome {
        protocol,
        overlap,
        initial_overlap: results[0].initial.min(1.0),
        budget_exhausted: best.exhausted,
        best_restart,
        histories: results.into_iter().map(|r| r.history).collect(),
    })
}
