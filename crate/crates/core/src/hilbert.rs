//! Truncated tensor-product space and operator algebra.
//!
//! The full space is `emitter ⊗ Fock(mode 1) ⊗ Fock(mode 2)` with the emitter
//! levels ordered `|1⟩, |2⟩, |e⟩`. A basis state `(level, n1, n2)` has index
//!
//! ```text
//! level·(n_max1+1)·(n_max2+1) + n1·(n_max2+1) + n2
//! ```
//!
//! so mode 2 is the fastest-varying factor. Every other module relies on this
//! ordering.

use alloc::{format, string::ToString, vec, vec::Vec};
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::C64;

/// Emitter level of the lambda system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    /// Ground state `|1⟩`.
    One,
    /// Metastable state `|2⟩`.
    Two,
    /// Excited state `|e⟩`.
    Excited,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::One, Level::Two, Level::Excited];

    pub fn index(self) -> usize {
        match self {
            Level::One => 0,
            Level::Two => 1,
            Level::Excited => 2,
        }
    }

    pub fn from_label(label: &str) -> Result<Self> {
        match label.trim() {
            "1" => Ok(Level::One),
            "2" => Ok(Level::Two),
            "e" | "E" => Ok(Level::Excited),
            other => Err(Error::InvalidLevel(other.to_string())),
        }
    }
}

/// Tensor factor an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Emitter,
    Mode1,
    Mode2,
}

/// Photon-number truncation of the two antenna modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceConfig {
    pub n_max1: usize,
    pub n_max2: usize,
}

impl SpaceConfig {
    pub const EMITTER_DIM: usize = 3;

    pub fn new(n_max1: usize, n_max2: usize) -> Self {
        Self { n_max1, n_max2 }
    }

    pub fn dim(&self) -> usize {
        Self::EMITTER_DIM * self.modes_dim()
    }

    fn modes_dim(&self) -> usize {
        (self.n_max1 + 1) * (self.n_max2 + 1)
    }

    pub fn local_dim(&self, slot: Slot) -> usize {
        match slot {
            Slot::Emitter => Self::EMITTER_DIM,
            Slot::Mode1 => self.n_max1 + 1,
            Slot::Mode2 => self.n_max2 + 1,
        }
    }

    /// Basis index of `|level, n1, n2⟩`. Panics if a photon number exceeds the
    /// truncation.
    pub fn index(&self, level: Level, n1: usize, n2: usize) -> usize {
        assert!(n1 <= self.n_max1 && n2 <= self.n_max2, "photon number beyond truncation");
        level.index() * self.modes_dim() + n1 * (self.n_max2 + 1) + n2
    }

    /// Inverse of [`SpaceConfig::index`].
    pub fn decode(&self, index: usize) -> (Level, usize, usize) {
        let m = self.modes_dim();
        let level = Level::ALL[index / m];
        let rest = index % m;
        (level, rest / (self.n_max2 + 1), rest % (self.n_max2 + 1))
    }
}

/// Dense complex square matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries; `data.len()` must be a square.
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    /// Non-zero entries as `(row, col, value)`.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        let dim = self.dim;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
            .map(move |(k, v)| (k / dim, k % dim, *v))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * factor).collect() }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)?.try_sub(&other.try_mul(self)?)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let mut out = Self::zeros(n * m);
        for (r1, c1, a) in self.nonzeros() {
            for (r2, c2, b) in other.nonzeros() {
                out[(r1 * m + r2, c1 * m + c2)] = a * b;
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |A − A†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_error() <= rel_tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Action on a column vector.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        Ok((0..self.dim)
            .map(|r| self.data[r * self.dim..(r + 1) * self.dim].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let m = faer::Mat::<C64>::from_fn(self.dim, self.dim, |r, c| self[(r, c)]);
        let evals = m.self_adjoint_eigenvalues(faer::Side::Lower).map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
        Ok(evals)
    }
}

impl Index<(usize, usize)> for OperatorMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for OperatorMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

/// Bosonic annihilation operator on `n_max + 1` Fock states.
pub fn annihilation(n_max: usize) -> OperatorMatrix {
    let mut a = OperatorMatrix::zeros(n_max + 1);
    for n in 1..=n_max {
        a[(n - 1, n)] = C64::new(sqrt(n as f64), 0.0);
    }
    a
}

/// Number operator `a†a` on `n_max + 1` Fock states.
pub fn number(n_max: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(n_max + 1, |r, c| if r == c { C64::new(r as f64, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Flip operator `σ_kl = |k⟩⟨l|` on the emitter.
pub fn emitter_flip(k: Level, l: Level) -> OperatorMatrix {
    let mut s = OperatorMatrix::zeros(3);
    s[(k.index(), l.index())] = C64::new(1.0, 0.0);
    s
}

/// Flip operator from level labels (`"1"`, `"2"`, `"e"`).
pub fn emitter_flip_labels(k: &str, l: &str) -> Result<OperatorMatrix> {
    Ok(emitter_flip(Level::from_label(k)?, Level::from_label(l)?))
}

/// Lifts a single-factor operator to the full space.
pub fn embed(op: &OperatorMatrix, slot: Slot, config: &SpaceConfig) -> Result<OperatorMatrix> {
    let local = config.local_dim(slot);
    if op.dim() != local {
        return Err(Error::DimensionMismatch { expected: local, found: op.dim() });
    }
    let id_e = OperatorMatrix::identity(SpaceConfig::EMITTER_DIM);
    let id_1 = OperatorMatrix::identity(config.n_max1 + 1);
    let id_2 = OperatorMatrix::identity(config.n_max2 + 1);
    Ok(match slot {
        Slot::Emitter => op.kron(&id_1).kron(&id_2),
        Slot::Mode1 => id_e.kron(op).kron(&id_2),
        Slot::Mode2 => id_e.kron(&id_1).kron(op),
    })
}

/// Density matrix on the full (or effective three-level) space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: OperatorMatrix,
}

impl DensityMatrix {
    /// Relative Hermiticity tolerance accepted by [`DensityMatrix::from_matrix`].
    pub const HERMITIAN_TOL: f64 = 1e-10;
    /// Trace tolerance accepted by [`DensityMatrix::from_matrix`].
    pub const TRACE_TOL: f64 = 1e-8;

    /// Validates Hermiticity and unit trace.
    pub fn from_matrix(matrix: OperatorMatrix) -> Result<Self> {
        if !matrix.is_hermitian(Self::HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max |ρ − ρ†| = {:e})",
                matrix.hermiticity_error()
            )));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from one")));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix without validation. Used for integrator output, where
    /// the invariants are tracked as diagnostics instead.
    pub fn from_matrix_unchecked(matrix: OperatorMatrix) -> Self {
        Self { matrix }
    }

    /// Projector onto a basis state.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut m = OperatorMatrix::zeros(dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Self { matrix: m }
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let dim = psi.len();
        let m = OperatorMatrix::from_fn(dim, |r, c| psi[r] * psi[c].conj());
        Self::from_matrix(m)
    }

    /// `I/dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: OperatorMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)) }
    }

    /// Column-stacked vectorization: element `(i, j)` sits at `i + dim·j`.
    pub fn from_vec(dim: usize, v: &[C64]) -> Result<Self> {
        if v.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: v.len() });
        }
        Ok(Self { matrix: OperatorMatrix::from_fn(dim, |r, c| v[r + dim * c]) })
    }

    pub fn to_vec(&self) -> Vec<C64> {
        vectorize(&self.matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.matrix.hermiticity_error()
    }

    /// Divides by the trace.
    pub fn normalized(&self) -> Self {
        let tr = self.trace();
        Self { matrix: self.matrix.scale(C64::new(1.0, 0.0) / tr) }
    }

    /// `(ρ + ρ†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let m = &self.matrix;
        Self { matrix: OperatorMatrix::from_fn(m.dim(), |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5) }
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let evals = self.hermitian_part().matrix.hermitian_eigenvalues()?;
        Ok(evals.first().copied().unwrap_or(0.0))
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        let n = m.dim();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..n {
            for c in 0..n {
                acc += m[(r, c)] * m[(c, r)];
            }
        }
        acc.re
    }
}

pub(crate) fn vectorize(m: &OperatorMatrix) -> Vec<C64> {
    let dim = m.dim();
    let mut v = vec![C64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            v[r + dim * c] = m[(r, c)];
        }
    }
    v
}

/// `Tr(ρ·op)`.
pub fn expectation(rho: &DensityMatrix, op: &OperatorMatrix) -> Result<C64> {
    let m = rho.matrix();
    m.check_dim(op)?;
    let n = m.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += m[(i, j)] * op[(j, i)];
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn annihilation_matrix_elements() {
        let a = annihilation(1);
        assert_eq!(a[(0, 1)], c(1.0));
        assert_eq!(a.nonzeros().count(), 1);
        let a = annihilation(2);
        assert!((a[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn number_operator_diagonal_by_product() {
        let n_max = 6;
        let a = annihilation(n_max);
        let n_op = a.dagger().try_mul(&a).unwrap();
        for n in 0..=n_max {
            let mut ket = vec![c(0.0); n_max + 1];
            ket[n] = c(1.0);
            let out = n_op.apply(&ket).unwrap();
            for (k, v) in out.iter().enumerate() {
                let want = if k == n { n as f64 } else { 0.0 };
                assert!((v - c(want)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn truncated_commutator_defect_sits_at_ceiling() {
        let n_max = 5;
        let a = annihilation(n_max);
        let comm = a.commutator(&a.dagger()).unwrap();
        for r in 0..=n_max {
            for col in 0..=n_max {
                let want = match (r, col) {
                    (r, col) if r != col => 0.0,
                    (r, _) if r < n_max => 1.0,
                    _ => -(n_max as f64),
                };
                assert!((comm[(r, col)] - c(want)).norm() < 1e-12, "({r},{col})");
            }
        }
    }

    #[test]
    fn flips() {
        let s = emitter_flip(Level::Excited, Level::One);
        assert_eq!(s[(2, 0)], c(1.0));
        assert_eq!(s.nonzeros().count(), 1);

        let see = emitter_flip(Level::Excited, Level::One).try_mul(&emitter_flip(Level::One, Level::Excited)).unwrap();
        assert_eq!(see, emitter_flip(Level::Excited, Level::Excited));

        let sum = emitter_flip(Level::One, Level::One)
            .try_add(&emitter_flip(Level::Two, Level::Two))
            .unwrap()
            .try_add(&emitter_flip(Level::Excited, Level::Excited))
            .unwrap();
        assert_eq!(sum, OperatorMatrix::identity(3));
    }

    #[test]
    fn invalid_level_label() {
        assert!(matches!(emitter_flip_labels("e", "3"), Err(Error::InvalidLevel(_))));
        assert!(emitter_flip_labels("e", "1").is_ok());
    }

    #[test]
    fn mismatched_dims_are_errors() {
        let a = OperatorMatrix::identity(2);
        let b = OperatorMatrix::identity(3);
        assert!(matches!(a.try_mul(&b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(a.try_add(&b), Err(Error::DimensionMismatch { .. })));
        let cfg = SpaceConfig::new(2, 1);
        assert!(embed(&annihilation(3), Slot::Mode1, &cfg).is_err());
        assert!(embed(&annihilation(2), Slot::Mode2, &cfg).is_err());
    }

    #[test]
    fn embed_identity_and_commuting_modes() {
        let cfg = SpaceConfig::new(3, 2);
        let id = embed(&OperatorMatrix::identity(3), Slot::Emitter, &cfg).unwrap();
        assert_eq!(id, OperatorMatrix::identity(cfg.dim()));

        let a1 = embed(&annihilation(3), Slot::Mode1, &cfg).unwrap();
        let a2 = embed(&annihilation(2), Slot::Mode2, &cfg).unwrap();
        assert!(a1.commutator(&a2).unwrap().max_abs() < 1e-14);
        assert!(a1.commutator(&a2.dagger()).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn embedded_ladder_element_uses_documented_ordering() {
        let cfg = SpaceConfig::new(5, 2);
        let a1 = embed(&annihilation(5), Slot::Mode1, &cfg).unwrap();
        let bra = cfg.index(Level::Excited, 3, 1);
        let ket = cfg.index(Level::Excited, 4, 1);
        assert!((a1[(bra, ket)] - c(2.0)).norm() < 1e-14);
        // Explicit row-major arithmetic for the same pair.
        assert_eq!(bra, 2 * 6 * 3 + 3 * 3 + 1);
        assert_eq!(cfg.decode(ket), (Level::Excited, 4, 1));
    }

    #[test]
    fn expectation_values() {
        let n = number(4);
        assert!(expectation(&DensityMatrix::basis(5, 0), &n).unwrap().norm() < 1e-15);
        assert!((expectation(&DensityMatrix::basis(5, 2), &n).unwrap() - c(2.0)).norm() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((expectation(&mixed, &OperatorMatrix::identity(4)).unwrap() - c(1.0)).norm() < 1e-15);
        assert!(expectation(&mixed, &OperatorMatrix::identity(3)).is_err());
    }

    #[test]
    fn density_validation() {
        let mut m = OperatorMatrix::identity(2).scale(c(0.5));
        m[(0, 1)] = C64::new(0.1, 0.2);
        assert!(DensityMatrix::from_matrix(m.clone()).is_err());
        m[(1, 0)] = C64::new(0.1, -0.2);
        let rho = DensityMatrix::from_matrix(m).unwrap();
        assert!(rho.min_eigenvalue().unwrap() > 0.0);
        let v = rho.to_vec();
        assert_eq!(v[1], C64::new(0.1, -0.2)); // (1,0) is at 1 + 2·0
        assert_eq!(DensityMatrix::from_vec(2, &v).unwrap(), rho);
        assert!(DensityMatrix::from_matrix(OperatorMatrix::identity(2)).is_err());
    }
}
