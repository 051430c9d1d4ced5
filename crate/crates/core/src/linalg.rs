//! Dense complex-matrix kernels.
//!
//! Everything downstream (spin operators, Hamiltonians, density operators)
//! is a [`CMatrix`]. Dimensions stay small (at most `(2*5+1)^2 = 121` for a
//! spin-5 dimer), so all storage is dense.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Iteration cap handed to the Hermitian eigensolver.
const EIG_MAX_ITER: usize = 10_000;

/// Pauli matrices `(σ_0, σ_x, σ_y, σ_z)`.
pub fn pauli() -> [CMatrix; 4] {
    [
        CMatrix::identity(2, 2),
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn check_square_pair(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "expected equal square matrices, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `ab - ba`
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_square_pair(a, b)?;
    Ok(a * b - b * a)
}

/// `ab + ba`
pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_square_pair(a, b)?;
    Ok(a * b + b * a)
}

/// `(A + A†) / 2`
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Largest absolute entry.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// `max_ij |A_ij - conj(A_ji)|`
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    a.is_square() && hermiticity_defect(a) <= tol * max_abs(a).max(1.0)
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Trace distance `½ Σ|λ_i(A − B)|` between two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let eig = eig_hermitian(&(a - b))?;
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// Spectral decomposition `A = V diag(λ) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: CMatrix,
}

impl EigDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(f(λ)) V†`
    pub fn apply<F>(&self, f: F) -> CMatrix
    where
        F: Fn(f64) -> Complex64,
    {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|l| Complex64::new(l, 0.0))
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// The input is symmetrized first. Each eigenvector is phase-fixed so that
/// its first non-negligible component is real and positive.
pub fn eig_hermitian(a: &CMatrix) -> Result<EigDecomposition> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {:?}",
            a.shape()
        )));
    }
    let n = a.nrows();
    let sym = hermitian_part(a);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::EigNoConvergence(EIG_MAX_ITER))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let pivot = v
            .iter()
            .find(|z| z.norm() > 1e-10)
            .copied()
            .unwrap_or(ONE);
        let phase = pivot.conj() / pivot.norm();
        for i in 0..n {
            eigenvectors[(i, col)] = v[i] * phase;
        }
    }
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `f(A)` for Hermitian `A`, evaluated on the spectrum.
pub fn matfun_hermitian<F>(a: &CMatrix, f: F) -> Result<CMatrix>
where
    F: Fn(f64) -> Complex64,
{
    Ok(eig_hermitian(a)?.apply(f))
}

/// Reduced matrix on subsystem `keep` of a tensor-product space with local
/// dimensions `dims` (site 0 is the most significant index).
pub fn partial_trace(rho: &CMatrix, dims: &[usize], keep: usize) -> Result<CMatrix> {
    if keep >= dims.len() {
        return Err(Error::InvalidSite {
            site: keep,
            n_sites: dims.len(),
        });
    }
    let total: usize = dims.iter().product();
    if rho.shape() != (total, total) {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {:?} but sites {:?} span dimension {}",
            rho.shape(),
            dims,
            total
        )));
    }
    let d = dims[keep];
    let inner: usize = dims[keep + 1..].iter().product();
    let outer: usize = dims[..keep].iter().product();
    let mut out = CMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut acc = ZERO;
            for o in 0..outer {
                for n in 0..inner {
                    let row = (o * d + a) * inner + n;
                    let col = (o * d + b) * inner + n;
                    acc += rho[(row, col)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Singular values of a real 3×3 matrix in descending order.
///
/// One-sided Jacobi: columns are rotated pairwise until mutually
/// orthogonal, after which their norms are the singular values. This keeps
/// high relative accuracy for small singular values, which squaring into
/// `tᵀt` would lose.
pub fn svd3(t: &Matrix3<f64>) -> [f64; 3] {
    let mut a = *t;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..2 {
            for q in (p + 1)..3 {
                let alpha: f64 = a.column(p).norm_squared();
                let beta: f64 = a.column(q).norm_squared();
                let gamma: f64 = a.column(p).dot(&a.column(q));
                if gamma.abs() <= 1e-300 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let tan = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cos = 1.0 / (1.0 + tan * tan).sqrt();
                let sin = cos * tan;
                for i in 0..3 {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)];
                    a[(i, p)] = cos * ap - sin * aq;
                    a[(i, q)] = sin * ap + cos * aq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s = [a.column(0).norm(), a.column(1).norm(), a.column(2).norm()];
    s.sort_by(|x, y| y.total_cmp(x));
    s
}
