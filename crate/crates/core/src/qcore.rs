//! Finite-dimensional complex state and operator algebra.
//!
//! States are unit-norm amplitude vectors, operators are dense `d x d` complex
//! matrices. Time evolution uses `U(t) = exp(-iHt)` with `hbar = 1`, computed
//! exactly from the Hermitian eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result, C64};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Norm below which a vector is treated as zero.
pub const ZERO_NORM: f64 = 1e-14;
/// Hermiticity violation accepted (and symmetrized away) on construction.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Unitarity check applied to [`UnitaryOperator::new`].
pub const UNITARY_TOL: f64 = 1e-9;

/// A unit-norm pure state.
///
/// The global phase of the input is preserved: interference sums downstream
/// depend on it.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    amps: CVector,
}

impl State {
    /// Normalizes `v`; fails with [`Error::ZeroVector`] when `‖v‖ < 1e-14`.
    pub fn normalize(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if !(norm >= ZERO_NORM) {
            return Err(Error::ZeroVector { norm });
        }
        Ok(Self { amps: v / C64::new(norm, 0.0) })
    }

    pub fn from_slice(v: &[C64]) -> Result<Self> {
        Self::normalize(CVector::from_column_slice(v))
    }

    /// Basis vector `|k⟩` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of range for dimension {dim}"
            )));
        }
        let mut v = CVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        Ok(Self { amps: v })
    }

    /// Real two-level state `(cos θ, sin θ)`, θ in radians.
    pub fn from_angle(theta: f64) -> Self {
        Self {
            amps: CVector::from_column_slice(&[
                C64::new(theta.cos(), 0.0),
                C64::new(theta.sin(), 0.0),
            ]),
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    /// Multiplies by the global phase `e^{iθ}`.
    pub fn with_phase(&self, theta: f64) -> Self {
        Self {
            amps: &self.amps * C64::from_polar(1.0, theta),
        }
    }
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner(a: &State, b: &State) -> Result<C64> {
    check_dim(a.dim(), b.dim())?;
    Ok(a.amps.dotc(&b.amps))
}

/// `|⟨a|b⟩|²`.
pub fn state_fidelity(a: &State, b: &State) -> Result<f64> {
    Ok(inner(a, b)?.norm_sqr().min(1.0))
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Largest entrywise deviation `max |m - m†|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation `max |U U† - I|`.
pub fn unitary_deviation(m: &CMatrix) -> f64 {
    let d = m * m.adjoint() - CMatrix::identity(m.nrows(), m.ncols());
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Anything that acts on a [`State`] as a dense matrix.
pub trait Operator {
    fn matrix(&self) -> &CMatrix;

    fn dim(&self) -> usize {
        self.matrix().nrows()
    }
}

/// A Hermitian observable or Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    /// Accepts `m` when `max |m - m†| ≤ 1e-8` and stores `(m + m†)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let deviation = hermitian_deviation(&m);
        if !(deviation <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian { deviation });
        }
        let entries = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { entries })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(CMatrix::from_diagonal(&CVector::from_vec(d)))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            entries: CMatrix::zeros(dim, dim),
        }
    }

    pub fn sigma_x() -> Self {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Self {
            entries: CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        }
    }

    pub fn sigma_y() -> Self {
        let o = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        Self {
            entries: CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        }
    }

    pub fn sigma_z() -> Self {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Self {
            entries: CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }

    /// `V diag(λ) V†` from a real spectrum and (assumed orthonormal) columns.
    pub fn from_spectrum(eigenvalues: &[f64], eigenvectors: &CMatrix) -> Result<Self> {
        check_dim(eigenvectors.ncols(), eigenvalues.len())?;
        let diag = CVector::from_iterator(
            eigenvalues.len(),
            eigenvalues.iter().map(|&e| C64::new(e, 0.0)),
        );
        Self::new(eigenvectors * CMatrix::from_diagonal(&diag) * eigenvectors.adjoint())
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            entries: &self.entries + &other.entries,
        })
    }

    /// `⟨a|H|b⟩`.
    pub fn matrix_element(&self, a: &State, b: &State) -> Result<C64> {
        check_dim(self.dim(), a.dim())?;
        check_dim(self.dim(), b.dim())?;
        Ok(a.amps.dotc(&(&self.entries * &b.amps)))
    }
}

impl Operator for HermitianOperator {
    fn matrix(&self) -> &CMatrix {
        &self.entries
    }
}

/// A unitary evolution or optical element.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    entries: CMatrix,
}

impl UnitaryOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let deviation = unitary_deviation(&m);
        if !(deviation <= UNITARY_TOL) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { entries: m })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
        }
    }

    /// Diagonal unitary with the given phases `e^{iθ_k}`.
    pub fn diagonal_phases(phases: &[f64]) -> Self {
        let d = CVector::from_iterator(phases.len(), phases.iter().map(|&t| C64::from_polar(1.0, t)));
        Self {
            entries: CMatrix::from_diagonal(&d),
        }
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            entries: &self.entries * &other.entries,
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
        }
    }
}

impl Operator for UnitaryOperator {
    fn matrix(&self) -> &CMatrix {
        &self.entries
    }
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> State {
        State {
            amps: self.eigenvectors.column(k).into_owned(),
        }
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_function(|e| C64::new(e, 0.0))
    }

    /// `V diag(f(λ)) V†`.
    pub fn apply_function(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let diag = CVector::from_iterator(self.dim(), self.eigenvalues.iter().map(|&e| f(e)));
        &self.eigenvectors * CMatrix::from_diagonal(&diag) * self.eigenvectors.adjoint()
    }

    /// `exp(-iHt)`.
    pub fn evolution(&self, t: f64) -> UnitaryOperator {
        UnitaryOperator {
            entries: self.apply_function(|e| C64::from_polar(1.0, -e * t)),
        }
    }

    /// Groups numerically equal eigenvalues: returns `(eigenvalue, column indices)`.
    pub fn eigenspaces(&self, tol: f64) -> Vec<(f64, Vec<usize>)> {
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            match groups.last_mut() {
                Some((e0, idx)) if (e - *e0).abs() <= tol => idx.push(k),
                _ => groups.push((e, vec![k])),
            }
        }
        groups
    }
}

pub fn eigh(h: &HermitianOperator) -> Spectrum {
    let eig = SymmetricEigen::new(h.entries.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(h.dim(), h.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// `exp(-iHt)` with `hbar = 1`.
pub fn unitary_from_hamiltonian(h: &HermitianOperator, t: f64) -> UnitaryOperator {
    eigh(h).evolution(t)
}

/// Result of [`apply`]: the (possibly unnormalized) image and its norm.
#[derive(Debug, Clone)]
pub struct Applied {
    pub vector: CVector,
    pub norm: f64,
}

pub fn apply<O: Operator + ?Sized>(op: &O, s: &State) -> Result<Applied> {
    check_dim(op.dim(), s.dim())?;
    let vector = op.matrix() * &s.amps;
    let norm = vector.norm();
    Ok(Applied { vector, norm })
}

/// `[re, im]` pairs, the serialized form of a complex number.
pub fn to_pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn from_pairs(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|p| C64::new(p[0], p[1])).collect()
}

/// Row-major nested pairs.
pub fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyInput("matrix has no rows".into()));
    }
    for row in rows {
        if row.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: row.len(),
            });
        }
    }
    Ok(CMatrix::from_fn(n, n, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

impl Serialize for State {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_pairs(self.amps.as_slice()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        State::from_slice(&from_pairs(&pairs)).map_err(serde::de::Error::custom)
    }
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_pairs(&self.entries).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        matrix_from_pairs(&rows)
            .and_then(HermitianOperator::new)
            .map_err(serde::de::Error::custom)
    }
}
