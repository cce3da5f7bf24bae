//! Dense complex linear algebra for small dimensions.
//!
//! Everything here works on row-major `Vec<Complex64>` storage. Dimensions are
//! capped at [`DIM_CAP`] so that tensor powers used by the parallel scheme stay
//! within memory.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest matrix or state dimension any operation will build.
pub const DIM_CAP: usize = 4096;

/// Elementwise tolerance on `M^dagger M - I` for a matrix to count as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// Tolerance on `sum |a_i|^2 - 1` for a state to count as normalized.
pub const NORM_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;

pub(crate) fn check_cap(dim: usize) -> Result<()> {
    if dim > DIM_CAP {
        Err(Error::Capacity {
            requested: dim,
            cap: DIM_CAP,
        })
    } else {
        Ok(())
    }
}

/// Wire form shared by every matrix in the JSON schemas.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct MatrixRepr {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        let entries = repr.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::new(repr.dim, entries)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr {
            dim: m.dim,
            entries: m.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("matrix dimension must be positive".into()));
        }
        check_cap(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain(format!("entry {pos} is not finite")));
        }
        Ok(Self { dim, entries })
    }

    /// Builds a matrix from rows; fails with a shape error unless square.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::Shape(format!(
                "non-square input: {dim} rows but a row of length {}",
                bad.len()
            )));
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Rank-one outer product `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len(), "outer product of mismatched vectors");
        let dim = a.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for x in a {
            for y in b {
                entries.push(x * y.conj());
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!(
                "cannot multiply {0}x{0} by {1}x{1}",
                self.dim, other.dim
            )));
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.entries[k * n..(k + 1) * n];
                let dst = &mut out.entries[r * n..(r + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::Shape(format!(
                "cannot apply a {0}x{0} matrix to a vector of length {1}",
                self.dim,
                v.len()
            )));
        }
        Ok(self
            .entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `<v| M |v>`
    pub fn expectation(&self, v: &[C64]) -> Result<C64> {
        let mv = self.mul_vec(v)?;
        Ok(v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * k).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self
            .sub(other)?
            .entries
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim;
        (0..n).all(|r| (r..n).all(|c| (self[(r, c)] - self[(c, r)].conj()).norm() <= tol))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.entries[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.entries[r * self.dim + c]
    }
}

/// True iff `max |(M^dagger M - I)_ij| <= tol`.
pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let gram = m.adjoint().matmul(m)?;
    Ok(gram.max_abs_diff(&ComplexMatrix::identity(m.dim()))? <= tol)
}

/// Kronecker product; entry `(a*dimB + b, c*dimB + d)` is `A[a,c] * B[b,d]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (na, nb) = (a.dim(), b.dim());
    let n = na.saturating_mul(nb);
    check_cap(n)?;
    let mut out = ComplexMatrix::zeros(n);
    for ar in 0..na {
        for ac in 0..na {
            let x = a[(ar, ac)];
            for br in 0..nb {
                for bc in 0..nb {
                    out[(ar * nb + br, ac * nb + bc)] = x * b[(br, bc)];
                }
            }
        }
    }
    Ok(out)
}

/// A matrix known to satisfy the unitarity tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitaryMatrix(ComplexMatrix);

impl<'de> Deserialize<'de> for UnitaryMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(de)?;
        UnitaryMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

impl UnitaryMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let gram = m.adjoint().matmul(&m)?;
        let dev = gram.max_abs_diff(&ComplexMatrix::identity(m.dim()))?;
        if dev > UNITARY_TOL {
            return Err(Error::Validation(format!(
                "matrix is not unitary: max |M^dagger M - I| = {dev:e}"
            )));
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    /// `diag(e^{i phi_0}, e^{i phi_1}, ...)`
    pub fn diag_phases(phases: &[f64]) -> Self {
        let d: Vec<C64> = phases.iter().map(|&p| C64::from_polar(1.0, p)).collect();
        Self(ComplexMatrix::from_diag(&d))
    }

    pub fn pauli_z() -> Self {
        Self::diag_phases(&[0.0, std::f64::consts::PI])
    }

    pub fn hadamard() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Self(ComplexMatrix::new(2, vec![h, h, h, -h]).expect("2x2"))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.matmul(&other.0)?))
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        Ok(StateVector {
            amplitudes: self.0.mul_vec(&s.amplitudes)?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StateRepr {
    dim: usize,
    amplitudes: Vec<[f64; 2]>,
}

/// Pure state with unit norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl TryFrom<StateRepr> for StateVector {
    type Error = Error;

    fn try_from(repr: StateRepr) -> Result<Self> {
        if repr.amplitudes.len() != repr.dim {
            return Err(Error::Shape(format!(
                "state declares dim {} but carries {} amplitudes",
                repr.dim,
                repr.amplitudes.len()
            )));
        }
        StateVector::new(repr.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect())
    }
}

impl From<StateVector> for StateRepr {
    fn from(s: StateVector) -> Self {
        StateRepr {
            dim: s.amplitudes.len(),
            amplitudes: s.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Shape("state dimension must be positive".into()));
        }
        check_cap(amplitudes.len())?;
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm2.is_finite() || (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "state is not normalized: squared norm {norm2}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::Domain("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|z| z / norm).collect())
    }

    pub(crate) fn from_raw(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut a = vec![C64::new(0.0, 0.0); dim];
        a[k] = C64::new(1.0, 0.0);
        Self { amplitudes: a }
    }

    /// `(|0> + |1>)/sqrt(2)` padded with zeros to `dim`.
    pub fn plus(dim: usize) -> Self {
        let mut a = vec![C64::new(0.0, 0.0); dim];
        a[0] = C64::new(FRAC_1_SQRT_2, 0.0);
        a[1] = C64::new(FRAC_1_SQRT_2, 0.0);
        Self { amplitudes: a }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "inner product of states with dims {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Eigenphases in `[0, 2pi)`, ascending, with an aligned orthonormal eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpectrum {
    pub phases: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl PhaseSpectrum {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Points `e^{i theta_j}` on the unit circle.
    pub fn points(&self) -> Vec<C64> {
        self.phases.iter().map(|&p| C64::from_polar(1.0, p)).collect()
    }
}

/// Reduces an angle into `[0, 2pi)`.
pub fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns ascending eigenvalues and a unitary whose columns are the
/// matching eigenvectors.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = h.dim();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    s += a[(r, c)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = n <= 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= threshold * 1e-3 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * r);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) * [[c, s], [-s, c]] in the (p, q) plane
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }
    if !converged && off_norm(&a) > threshold {
        return Err(Error::Numerical {
            message: "Jacobi iteration did not converge".into(),
            residual: off_norm(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (new_c, &old_c) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new_c)] = v[(r, old_c)];
        }
    }
    Ok((values, vectors))
}

/// Mixing angles for the Hermitian combination `cos(b) Re U + sin(b) Im U`;
/// two distinct eigenphases only collide when they are mirror images about `b`.
const MIXING_ANGLES: [f64; 4] = [0.912_345_678_9, 2.271_828_182_8, 0.331_415_926_5, 1.618_033_988_7];

/// Eigenphases and eigenvectors of a unitary matrix.
///
/// The commuting Hermitian parts `(U + U^dagger)/2` and `(U - U^dagger)/2i` are
/// folded into one Hermitian matrix and diagonalized; each candidate basis is
/// accepted only if every residual `|U v - e^{i theta} v|` stays below `1e-8`.
pub fn eigen_system(u: &UnitaryMatrix) -> Result<PhaseSpectrum> {
    let m = u.matrix();
    let n = m.dim();
    let adj = m.adjoint();
    let re_part = m.add(&adj)?.scale(C64::new(0.5, 0.0));
    let im_part = m.sub(&adj)?.scale(C64::new(0.0, -0.5));

    let mut best: Option<(f64, PhaseSpectrum)> = None;
    for &angle in &MIXING_ANGLES {
        let h = re_part
            .scale(C64::new(angle.cos(), 0.0))
            .add(&im_part.scale(C64::new(angle.sin(), 0.0)))?;
        let (_, basis) = hermitian_eigen(&h)?;
        let mut pairs = Vec::with_capacity(n);
        let mut residual: f64 = 0.0;
        for c in 0..n {
            let v = basis.column(c);
            let uv = m.mul_vec(&v)?;
            let lambda: C64 = v.iter().zip(&uv).map(|(a, b)| a.conj() * b).sum();
            let eig = lambda / lambda.norm();
            let res = uv
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - eig * y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            residual = residual.max(res);
            pairs.push((wrap_phase(lambda.arg()), v));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let spectrum = PhaseSpectrum {
            phases: pairs.iter().map(|p| p.0).collect(),
            vectors: pairs.into_iter().map(|p| p.1).collect(),
        };
        if residual <= 1e-10 {
            return Ok(spectrum);
        }
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, spectrum));
        }
    }
    match best {
        Some((r, s)) if r <= 1e-8 => Ok(s),
        Some((r, _)) => Err(Error::Numerical {
            message: "eigenvector residual above 1e-8 for every mixing angle".into(),
            residual: r,
        }),
        None => Err(Error::Shape("empty matrix".into())),
    }
}

/// `exp(i H)` for Hermitian `H`.
pub fn expm_i_hermitian(h: &ComplexMatrix) -> Result<UnitaryMatrix> {
    let (values, basis) = hermitian_eigen(h)?;
    let n = h.dim();
    let mut out = ComplexMatrix::zeros(n);
    for (k, &lambda) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, lambda);
        for r in 0..n {
            let vr = basis[(r, k)] * phase;
            for c in 0..n {
                out[(r, c)] += vr * basis[(c, k)].conj();
            }
        }
    }
    Ok(UnitaryMatrix::new_unchecked(out))
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * FRAC_1_SQRT_2
}

/// Haar-distributed unitary drawn from `rng`.
///
/// Orthonormalizes the columns of a complex Gaussian matrix. Gram-Schmidt
/// yields a QR factor with positive real diagonal in `R`, which is the phase
/// normalization that makes `Q` Haar distributed.
pub fn haar_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if d == 0 {
        return Err(Error::Domain("Haar sampling needs d >= 1".into()));
    }
    check_cap(d)?;
    let g: Vec<C64> = (0..d * d).map(|_| complex_gaussian(rng)).collect();
    let mut cols: Vec<Vec<C64>> = (0..d).map(|c| (0..d).map(|r| g[r * d + c]).collect()).collect();
    for j in 0..d {
        // two passes keep the columns orthonormal to working precision
        for _ in 0..2 {
            for k in 0..j {
                let proj: C64 = cols[k].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let (done, rest) = cols.split_at_mut(j);
                for (x, y) in rest[0].iter_mut().zip(&done[k]) {
                    *x -= proj * y;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 1e-300 {
            return Err(Error::Numerical {
                message: "degenerate Gaussian sample".into(),
                residual: norm,
            });
        }
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    let mut m = ComplexMatrix::zeros(d);
    for (c, col) in cols.iter().enumerate() {
        for (r, &z) in col.iter().enumerate() {
            m[(r, c)] = z;
        }
    }
    Ok(UnitaryMatrix::new_unchecked(m))
}

/// Deterministic Haar unitary for a given `(d, seed)`.
pub fn haar_unitary(d: usize, seed: u64) -> Result<UnitaryMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with(d, &mut rng)
}

/// Uniformly random pure state.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<StateVector> {
    check_cap(dim)?;
    StateVector::normalized((0..dim).map(|_| complex_gaussian(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unitarity_examples() {
        assert!(is_unitary(&ComplexMatrix::identity(4), 1e-10).unwrap());
        let ph = ComplexMatrix::from_diag(&[c(1.0, 0.0), C64::from_polar(1.0, PI / 3.0)]);
        assert!(is_unitary(&ph, 1e-10).unwrap());
        let shrink = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(0.5, 0.0)]);
        assert!(!is_unitary(&shrink, 1e-10).unwrap());
        assert!(matches!(is_unitary(&shrink, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn non_square_rows_rejected() {
        let rows = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0)]];
        assert!(matches!(ComplexMatrix::from_rows(rows), Err(Error::Shape(_))));
        assert!(matches!(
            ComplexMatrix::new(2, vec![c(1.0, 0.0); 3]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn eigen_examples() {
        let z = eigen_system(&UnitaryMatrix::pauli_z()).unwrap();
        assert!(z.phases[0].abs() < 1e-12);
        assert!((z.phases[1] - PI).abs() < 1e-12);

        let h = eigen_system(&UnitaryMatrix::hadamard()).unwrap();
        assert!(h.phases[0].abs() < 1e-10 || (h.phases[0] - TAU).abs() < 1e-10);
        assert!((h.phases[1] - PI).abs() < 1e-10);

        let id = eigen_system(&UnitaryMatrix::identity(3)).unwrap();
        assert_eq!(id.phases, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn eigen_residuals_on_haar_samples() {
        for seed in 0..50 {
            for d in [2, 3, 5, 8] {
                let u = haar_unitary(d, seed).unwrap();
                let s = eigen_system(&u).unwrap();
                for (p, v) in s.phases.iter().zip(&s.vectors) {
                    assert!((0.0..TAU).contains(p));
                    let uv = u.matrix().mul_vec(v).unwrap();
                    let lam = C64::from_polar(1.0, *p);
                    let res: f64 = uv.iter().zip(v).map(|(x, y)| (x - lam * y).norm_sqr()).sum();
                    assert!(res.sqrt() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn eigen_handles_mirror_symmetric_spectrum() {
        // phases symmetric about every mixing angle at once are impossible, but
        // test a spectrum that collides under the first one
        let b = MIXING_ANGLES[0];
        let u = UnitaryMatrix::diag_phases(&[b - 0.3, b + 0.3, 4.0]);
        let s = eigen_system(&u).unwrap();
        assert!((s.phases[0] - (b - 0.3)).abs() < 1e-9);
        assert!((s.phases[1] - (b + 0.3)).abs() < 1e-9);
    }

    #[test]
    fn haar_zero_dimension_is_domain_error() {
        assert!(matches!(haar_unitary(0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn haar_is_deterministic_and_unitary() {
        let a = haar_unitary(2, 42).unwrap();
        let b = haar_unitary(2, 42).unwrap();
        assert_eq!(a, b);
        for d in [1, 2, 4, 16, 64] {
            let u = haar_unitary(d, 9).unwrap();
            assert!(is_unitary(u.matrix(), 1e-10).unwrap());
        }
    }

    #[test]
    fn kron_examples() {
        let i4 = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
        let z = UnitaryMatrix::pauli_z();
        let zi = kron(z.matrix(), &ComplexMatrix::identity(2)).unwrap();
        let expect = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)]);
        assert!(zi.max_abs_diff(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn kron_capacity() {
        let a = ComplexMatrix::identity(64);
        let b = ComplexMatrix::identity(65);
        assert!(matches!(kron(&a, &b), Err(Error::Capacity { .. })));
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 3, 6, 10] {
            let g: Vec<C64> = (0..n * n).map(|_| complex_gaussian(&mut rng)).collect();
            let g = ComplexMatrix::new(n, g).unwrap();
            let h = g.add(&g.adjoint()).unwrap();
            let (vals, vecs) = hermitian_eigen(&h).unwrap();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            let diag = ComplexMatrix::from_diag(&vals.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
            let rebuilt = vecs.matmul(&diag).unwrap().matmul(&vecs.adjoint()).unwrap();
            assert!(rebuilt.max_abs_diff(&h).unwrap() < 1e-12 * (n as f64) * 10.0);
        }
    }

    #[test]
    fn state_validation() {
        assert!(StateVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(StateVector::normalized(vec![c(0.0, 0.0)]).is_err());
        let s = StateVector::normalized(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_schema_round_trip() {
        let u = UnitaryMatrix::hadamard();
        let text = serde_json::to_string(&u).unwrap();
        assert!(text.starts_with("{\"dim\":2,\"entries\":[["));
        let back: UnitaryMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, u);
        let bad = r#"{"dim": 2, "entries": [[1,0],[0,0],[0,0],[0.5,0]]}"#;
        assert!(serde_json::from_str::<UnitaryMatrix>(bad).is_err());
        let s: StateVector =
            serde_json::from_str(r#"{"dim": 2, "amplitudes": [[0.6, 0], [0, 0.8]]}"#).unwrap();
        assert_eq!(s.dim(), 2);
    }
}
