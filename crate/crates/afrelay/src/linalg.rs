//! Dense complex Hermitian linear algebra primitives.
//!
//! Everything downstream works with matrices no larger than `m_r²×m_r²`
//! (36×36 for the largest configuration exercised here), so dense
//! double-precision kernels are used throughout.

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Column vector of complex doubles; houses relay vectors and channels.
pub type ComplexVector = DVector<Complex64>;

/// Relative asymmetry tolerated by [`HermitianMatrix::new`].
const HERMITIAN_CHECK_TOL: f64 = 1e-10;

/// A square complex matrix kept exactly Hermitian.
///
/// Construction symmetrizes the input as `(H + Hᴴ)/2`, which absorbs the
/// rounding left behind by Kronecker products and triangular solves.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Builds from a square matrix, rejecting inputs whose asymmetry
    /// exceeds rounding scale.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "hermitian matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let asym = max_asymmetry(&m);
        if asym > HERMITIAN_CHECK_TOL * scale {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian: asymmetry {asym:.3e} exceeds tolerance"
            )));
        }
        Ok(Self::symmetrized(m))
    }

    /// Builds from a square matrix that is Hermitian up to rounding,
    /// without the asymmetry check.
    pub fn symmetrized(m: DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "hermitian matrix must be square");
        let mut h = m;
        for i in 0..n {
            h[(i, i)] = Complex64::new(h[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = 0.5 * (h[(i, j)] + h[(j, i)].conj());
                h[(i, j)] = avg;
                h[(j, i)] = avg.conj();
            }
        }
        Self { inner: h }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            inner: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    /// Rank-one matrix `v·vᴴ`.
    pub fn outer(v: &ComplexVector) -> Self {
        Self {
            inner: v * v.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.inner
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    /// Real quadratic form `gᴴ·H·g`.
    pub fn quadratic_form(&self, g: &ComplexVector) -> f64 {
        (g.adjoint() * &self.inner * g)[(0, 0)].re
    }

    /// `tr(H·X)` for Hermitian `X`; real by symmetry.
    pub fn trace_product(&self, x: &HermitianMatrix) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.inner[(i, j)] * x.inner[(j, i)]).re;
            }
        }
        acc
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.inner[(i, i)].re).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            inner: &self.inner * Complex64::new(c, 0.0),
        }
    }

    /// `H + c·O` with real `c`; exact Hermitian symmetry is preserved.
    pub fn add_scaled(&self, other: &HermitianMatrix, c: f64) -> Self {
        Self {
            inner: &self.inner + &other.inner * Complex64::new(c, 0.0),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Lower Cholesky factor with positive real diagonal; `None` when the
    /// matrix is not positive definite.
    ///
    /// nalgebra's complex Cholesky cannot serve here: complex square roots
    /// never fail, so it factors indefinite matrices without complaint.
    pub fn try_cholesky(&self) -> Option<DMatrix<Complex64>> {
        let n = self.dim();
        let mut l = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..n {
            let mut d = self.inner[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l[(j, j)] = Complex64::new(djj, 0.0);
            for i in (j + 1)..n {
                let mut s = self.inner[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        Some(l)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.try_cholesky().is_some()
    }

    /// Inverse via Cholesky. Fails when not positive definite.
    pub fn pd_inverse(&self) -> Result<Self> {
        let l = self
            .try_cholesky()
            .ok_or_else(|| Error::SingularPencil("matrix is not positive definite".into()))?;
        let eye = DMatrix::<Complex64>::identity(self.dim(), self.dim());
        let linv = l
            .solve_lower_triangular(&eye)
            .ok_or_else(|| Error::SingularPencil("triangular solve failed".into()))?;
        Ok(Self::symmetrized(linv.adjoint() * linv))
    }
}

fn max_asymmetry(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Kronecker product; block `(i,j)` of the result equals `a[i][j]·b`.
pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// Column-major vectorization (stacks the columns of `a`).
pub fn vectorize(a: &DMatrix<Complex64>) -> ComplexVector {
    ComplexVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vectorize`]: reshapes a length `rows·cols` vector.
pub fn unvectorize(v: &ComplexVector, rows: usize, cols: usize) -> DMatrix<Complex64> {
    assert_eq!(v.len(), rows * cols, "length mismatch in unvectorize");
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are real and ascending; `eigenvectors` columns match and
/// form a unitary matrix, so `H = V·diag(λ)·Vᴴ`.
pub struct HermitianEig {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

pub fn hermitian_eig(h: &HermitianMatrix) -> HermitianEig {
    let decomp = SymmetricEigen::new(h.inner.clone());
    sorted_eig(decomp)
}

fn sorted_eig(decomp: SymmetricEigen<Complex64, Dyn>) -> HermitianEig {
    let n = decomp.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| decomp.eigenvalues[i].total_cmp(&decomp.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| decomp.eigenvalues[i]));
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &decomp.eigenvectors.column(src));
    }
    HermitianEig {
        eigenvalues,
        eigenvectors,
    }
}

/// Extreme generalized eigenvalues of the pencil `(a, b)` with `b ≻ 0`,
/// plus the eigenvector of the largest one normalized to `vᴴ·b·v = 1`.
///
/// Solved by Cholesky whitening `b = L·Lᴴ` followed by an ordinary
/// Hermitian eigendecomposition of `L⁻¹·a·L⁻ᴴ`.
pub struct GenEigExtremes {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub v_max: ComplexVector,
}

pub fn gen_eig_extremes(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<GenEigExtremes> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidInput(format!(
            "pencil dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let l = b
        .try_cholesky()
        .ok_or_else(|| Error::SingularPencil("right-hand matrix is not positive definite".into()))?;
    let t1 = l
        .solve_lower_triangular(a.as_matrix())
        .ok_or_else(|| Error::SingularPencil("triangular solve failed".into()))?;
    let whitened = l
        .solve_lower_triangular(&t1.adjoint())
        .ok_or_else(|| Error::SingularPencil("triangular solve failed".into()))?;
    let eig = hermitian_eig(&HermitianMatrix::symmetrized(whitened));
    let n = a.dim();
    let u_max = eig.eigenvectors.column(n - 1).into_owned();
    let v = l
        .adjoint()
        .solve_upper_triangular(&u_max)
        .ok_or_else(|| Error::SingularPencil("triangular solve failed".into()))?;
    let norm = b.quadratic_form(&v).sqrt();
    Ok(GenEigExtremes {
        lambda_min: eig.eigenvalues[0],
        lambda_max: eig.eigenvalues[n - 1],
        v_max: v / Complex64::new(norm, 0.0),
    })
}

/// Hermitian square root `H^{1/2}` of a positive semidefinite matrix;
/// negative rounding noise in the spectrum is clamped to zero.
pub fn psd_sqrt(h: &HermitianMatrix) -> HermitianMatrix {
    let eig = hermitian_eig(h);
    let n = h.dim();
    let mut scaled = eig.eigenvectors.clone();
    for k in 0..n {
        let s = Complex64::new(eig.eigenvalues[k].max(0.0).sqrt(), 0.0);
        let col = scaled.column(k) * s;
        scaled.set_column(k, &col);
    }
    HermitianMatrix::symmetrized(&scaled * eig.eigenvectors.adjoint())
}
