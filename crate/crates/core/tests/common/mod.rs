#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use unidisc::matrix::{haar_unitary_with, ComplexMatrix, StateVector, UnitaryMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smallest covering arc by brute force: anchor an arc at every phase and
/// measure how far counter-clockwise it must reach to cover the rest.
pub fn anchored_arc_oracle(phases: &[f64]) -> f64 {
    phases
        .iter()
        .map(|&start| {
            phases
                .iter()
                .map(|&p| (p - start).rem_euclid(TAU))
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Distance from the origin to the convex hull of unit-circle points, through
/// the support function: `max(0, max_phi min_k Re(e^{-i phi} z_k))`.
/// Dense grid search followed by golden-section refinement.
pub fn hull_distance_oracle(phases: &[f64]) -> f64 {
    let support = |phi: f64| {
        phases
            .iter()
            .map(|&p| (p - phi).cos())
            .fold(f64::INFINITY, f64::min)
    };
    let n = 2048;
    let step = TAU / n as f64;
    let (best_i, _) = (0..n)
        .map(|i| (i, support(i as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let (mut lo, mut hi) = ((best_i as f64 - 1.0) * step, (best_i as f64 + 1.0) * step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (support(a), support(b));
    for _ in 0..80 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = support(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = support(a);
        }
    }
    support((lo + hi) / 2.0).max(0.0)
}

pub fn random_phases(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(0.0..TAU)).collect()
}

/// Random spectrum that sometimes packs its points into a short arc, so that
/// both the `theta < pi` and `theta >= pi` regimes are exercised.
pub fn random_spectrum(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let len = rng.random_range(1..=8);
    if rng.random_bool(0.5) {
        random_phases(rng, len)
    } else {
        let width = rng.random_range(0.0..1.2 * PI);
        let start = rng.random_range(0.0..TAU);
        (0..len)
            .map(|_| (start + rng.random_range(0.0..=width)).rem_euclid(TAU))
            .collect()
    }
}

pub fn haar_pair(rng: &mut ChaCha8Rng, d: usize) -> (UnitaryMatrix, UnitaryMatrix) {
    (haar_unitary_with(d, rng).unwrap(), haar_unitary_with(d, rng).unwrap())
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    loop {
        if let Ok(s) = StateVector::normalized(gaussian_vec(rng, n)) {
            return s;
        }
    }
}

/// Pair of states in dimension `n` with prescribed overlap magnitude `c`.
pub fn state_pair_with_overlap(rng: &mut ChaCha8Rng, n: usize, c: f64) -> (StateVector, StateVector) {
    assert!(n >= 2);
    let a = random_state(rng, n);
    let b = random_state(rng, n);
    let ab = a.inner(&b).unwrap();
    let perp: Vec<C64> = b
        .amplitudes()
        .iter()
        .zip(a.amplitudes())
        .map(|(y, x)| y - ab * x)
        .collect();
    let perp = StateVector::normalized(perp).unwrap();
    let phase = C64::from_polar(1.0, rng.random_range(0.0..TAU));
    let s = (1.0 - c * c).sqrt();
    let second: Vec<C64> = a
        .amplitudes()
        .iter()
        .zip(perp.amplitudes())
        .map(|(x, y)| phase * c * x + s * y)
        .collect();
    (a, StateVector::normalized(second).unwrap())
}

/// Random two-effect POVM `{E, I - E}` with `E = V diag(lambda) V^dagger`,
/// `lambda` uniform in `[0, 1]`, and sometimes a projective one.
pub fn random_two_outcome_effects(rng: &mut ChaCha8Rng, n: usize) -> (ComplexMatrix, ComplexMatrix) {
    let v = haar_unitary_with(n, rng).unwrap();
    let projective = rng.random_bool(0.5);
    let lambda: Vec<C64> = (0..n)
        .map(|_| {
            let x: f64 = if projective {
                f64::from(u8::from(rng.random_bool(0.5)))
            } else {
                rng.random()
            };
            C64::new(x, 0.0)
        })
        .collect();
    let e = v
        .matrix()
        .matmul(&ComplexMatrix::from_diag(&lambda))
        .unwrap()
        .matmul(&v.matrix().adjoint())
        .unwrap();
    let rest = ComplexMatrix::identity(n).sub(&e).unwrap();
    (e, rest)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
