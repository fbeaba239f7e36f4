//! Dense real linear algebra used throughout the crate.
//!
//! [`DenseMatrix`] wraps an `nalgebra` matrix and guarantees finite entries.
//! On top of it sit the eigenvalue, singular value and discrete Lyapunov
//! routines that the Gramian and stability computations need.

use std::fmt;
use std::ops::Deref;

use nalgebra::linalg::{Schur, SymmetricEigen, SVD};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dimension solved with the Kronecker-vectorized Lyapunov method.
pub const DIRECT_LYAPUNOV_MAX_DIM: usize = 60;

/// Required gap between the spectral radius and 1 for Lyapunov solves.
pub const STABILITY_MARGIN: f64 = 1e-9;

const DOUBLING_MAX_ITERATIONS: usize = 200;
const DOUBLING_TOLERANCE: f64 = 1e-14;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A dense, row-by-column real matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    /// Wraps an `nalgebra` matrix, rejecting NaN and infinite entries.
    pub fn new(inner: DMatrix<f64>) -> Result<Self> {
        if let Some(pos) = inner.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % inner.nrows(), pos / inner.nrows());
            return Err(Error::Validation(format!(
                "non-finite matrix entry at ({r}, {c})"
            )));
        }
        Ok(DenseMatrix(inner))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a matrix from a list of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(rows.len(), cols, &flat)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn is_square(&self) -> bool {
        self.0.is_square()
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix(self.0.transpose())
    }

    /// Largest absolute asymmetry `|m_ij - m_ji|`.
    pub fn asymmetry(&self) -> f64 {
        asymmetry(&self.0)
    }
}

impl Deref for DenseMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix({}x{}) {:?}", self.nrows(), self.ncols(), self.to_row_major())
    }
}

impl fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.nrows() {
            let row: Vec<String> = (0..self.ncols())
                .map(|c| format!("{:>10.4}", self.0[(r, c)]))
                .collect();
            writeln!(f, "[{} ]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Eigenvalues of a square matrix together with its spectral radius.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Sorted by decreasing modulus, then decreasing real part.
    pub eigenvalues: Vec<Complex64>,
    pub radius: f64,
}

/// All eigenvalues of a square matrix via Hessenberg reduction and
/// implicitly shifted QR (sweep cap `100 n`).
pub fn eigenvalues(a: &DenseMatrix) -> Result<Spectrum> {
    eigenvalues_of(a.as_matrix())
}

pub(crate) fn eigenvalues_of(a: &DMatrix<f64>) -> Result<Spectrum> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Spectrum { eigenvalues: Vec::new(), radius: 0.0 });
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 100 * n)
        .ok_or(Error::NotConverged { iterations: 100 * n })?;
    let mut eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|x, y| {
        y.norm()
            .total_cmp(&x.norm())
            .then(y.re.total_cmp(&x.re))
            .then(y.im.total_cmp(&x.im))
    });
    let radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(Spectrum { eigenvalues, radius })
}

/// Spectral radius (max eigenvalue modulus).
pub fn spectral_radius(a: &DenseMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?.radius)
}

/// All singular values in decreasing order.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = SVD::new(a.as_matrix().clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Smallest singular value; zero for an empty matrix.
pub fn smallest_singular_value(a: &DenseMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let sym = symmetrized(m);
    SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in (r + 1)..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)]).abs());
        }
    }
    worst
}

fn check_lyapunov_inputs(a: &DenseMatrix, q: &DenseMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "Lyapunov state matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if q.shape() != a.shape() {
        return Err(Error::Dimension(format!(
            "Lyapunov forcing is {}x{}, state matrix is {}x{}",
            q.nrows(),
            q.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    let asym = q.asymmetry();
    if asym > SYMMETRY_TOLERANCE * q.frobenius_norm().max(1.0) {
        return Err(Error::Validation(format!(
            "Lyapunov forcing is not symmetric (max asymmetry {asym:e})"
        )));
    }
    let radius = spectral_radius(a)?;
    if radius >= 1.0 - STABILITY_MARGIN {
        return Err(Error::Unstable { radius });
    }
    Ok(())
}

/// Solves `AᵀPA − P = −Q` for a stable `A` and symmetric `Q`.
///
/// Dimensions up to [`DIRECT_LYAPUNOV_MAX_DIM`] use the Kronecker-vectorized
/// direct solve; larger systems use the doubling iteration. The result is
/// symmetrized.
pub fn solve_discrete_lyapunov(a: &DenseMatrix, q: &DenseMatrix) -> Result<DenseMatrix> {
    check_lyapunov_inputs(a, q)?;
    if a.nrows() <= DIRECT_LYAPUNOV_MAX_DIM {
        direct_unchecked(a, q)
    } else {
        doubling_unchecked(a, q)
    }
}

/// Kronecker-vectorized solve of `(I − Aᵀ⊗Aᵀ) vec(P) = vec(Q)`, with one
/// step of iterative refinement.
pub fn solve_discrete_lyapunov_direct(a: &DenseMatrix, q: &DenseMatrix) -> Result<DenseMatrix> {
    check_lyapunov_inputs(a, q)?;
    direct_unchecked(a, q)
}

/// Squaring iteration `P ← P + AₖᵀPAₖ`, `Aₖ₊₁ = Aₖ²`, starting from `P = Q`.
pub fn solve_discrete_lyapunov_doubling(a: &DenseMatrix, q: &DenseMatrix) -> Result<DenseMatrix> {
    check_lyapunov_inputs(a, q)?;
    doubling_unchecked(a, q)
}

fn direct_unchecked(a: &DenseMatrix, q: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.nrows();
    let at = a.transpose();
    let mut k = at.as_matrix().kronecker(at.as_matrix());
    k.neg_mut();
    for i in 0..n * n {
        k[(i, i)] += 1.0;
    }
    let lu = k.lu();
    let rhs = DVector::from_column_slice(q.as_slice());
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("Lyapunov operator is singular".into()))?;
    let mut p = DMatrix::from_column_slice(n, n, sol.as_slice());

    let residual = q.as_matrix() - (&p - at.as_matrix() * &p * a.as_matrix());
    if let Some(corr) = lu.solve(&DVector::from_column_slice(residual.as_slice())) {
        p += DMatrix::from_column_slice(n, n, corr.as_slice());
    }
    DenseMatrix::new(symmetrized(&p))
}

fn doubling_unchecked(a: &DenseMatrix, q: &DenseMatrix) -> Result<DenseMatrix> {
    let mut p = q.as_matrix().clone();
    let mut ak = a.as_matrix().clone();
    for _ in 0..DOUBLING_MAX_ITERATIONS {
        let update = ak.transpose() * &p * &ak;
        p += &update;
        if update.norm() <= DOUBLING_TOLERANCE * p.norm().max(1.0) {
            return DenseMatrix::new(symmetrized(&p));
        }
        ak = &ak * &ak;
    }
    Err(Error::NotConverged { iterations: DOUBLING_MAX_ITERATIONS })
}

/// Frobenius norm of `AᵀPA − P + Q`.
pub fn lyapunov_residual(a: &DenseMatrix, p: &DenseMatrix, q: &DenseMatrix) -> f64 {
    let a = a.as_matrix();
    (a.transpose() * p.as_matrix() * a - p.as_matrix() + q.as_matrix()).norm()
}
