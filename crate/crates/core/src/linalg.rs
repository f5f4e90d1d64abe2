//! Dense linear-algebra adapters with deterministic contracts.
//!
//! Thin wrappers around nalgebra (SVD, symmetric eigendecomposition) and
//! faer (general eigendecomposition) that pin down everything the raw
//! backends leave unspecified:
//!
//! * singular values sorted descending, with a tolerance-based
//!   pseudo-inverse rule `s_i ↦ 1/s_i` iff `s_i > rtol · S[0] · max(m, n)`;
//! * eigenpairs sorted by `|λ|` descending, ties by real part descending,
//!   then imaginary part descending, so complex conjugate pairs from real
//!   inputs sit adjacently with the `+im` member first;
//! * eigenvectors at unit Euclidean norm with the phase (or sign) fixed so
//!   the largest-magnitude component is real and positive.
//!
//! Everything here is pure and deterministic: identical inputs produce
//! bitwise identical outputs.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Default relative tolerance for singular-value truncation
/// (machine-epsilon scale; the effective cutoff is
/// `DEFAULT_RTOL · S[0] · max(m, n)`).
pub const DEFAULT_RTOL: f64 = 2.2e-16;

/// Errors from the dense linear-algebra adapters.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix must be non-empty")]
    EmptyMatrix,
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: max |a_ij - a_ji| = {asymmetry:.3e} exceeds 1e-10 relative")]
    NotSymmetric { asymmetry: f64 },
}

/// Full singular value decomposition `A = Q · diag(S) · Zᴴ`.
///
/// `Q` has orthonormal columns (m×r), `S` holds the singular values sorted
/// descending, `Z` has orthonormal columns (n×r), and `rank = r = min(m, n)`
/// for the full factorization. For real input the reconstruction reads
/// `Q · diag(S) · Zᵀ`.
#[derive(Debug, Clone)]
pub struct SvdResult<T: ComplexField<RealField = f64>> {
    pub q: DMatrix<T>,
    pub s: DVector<f64>,
    pub z: DMatrix<T>,
    pub rank: usize,
}

/// Ordering convention carried by an [`EigResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigOrdering {
    /// `|λ|` descending, ties by real part descending, then imaginary part
    /// descending.
    MagnitudeDescending,
}

/// Eigendecomposition with a deterministic ordering and phase convention.
///
/// Column `i` of `vectors` is the unit-norm eigenvector for `values[i]`,
/// with its largest-magnitude component made real and positive.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub values: DVector<Complex64>,
    pub vectors: DMatrix<Complex64>,
    pub ordering: EigOrdering,
}

fn check_finite<T: ComplexField<RealField = f64>>(mtx: &DMatrix<T>) -> Result<(), LinalgError> {
    if mtx.iter().all(|v| v.clone().norm1().is_finite()) {
        Ok(())
    } else {
        Err(LinalgError::NonFinite)
    }
}

/// Full SVD of a real or complex matrix, singular values descending.
pub fn svd<T: ComplexField<RealField = f64>>(
    mtx: &DMatrix<T>,
) -> Result<SvdResult<T>, LinalgError> {
    if mtx.is_empty() {
        return Err(LinalgError::EmptyMatrix);
    }
    check_finite(mtx)?;
    let fact = nalgebra::SVD::new(mtx.clone(), true, true);
    let u = fact.u.expect("SVD factors were requested");
    let v_t = fact.v_t.expect("SVD factors were requested");
    let s = fact.singular_values;
    let r = s.len();
    // The backend already sorts descending; enforce it anyway so the
    // ordering contract never silently depends on backend internals.
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let q = DMatrix::from_fn(mtx.nrows(), r, |i, k| u[(i, order[k])].clone());
    let z = DMatrix::from_fn(mtx.ncols(), r, |i, k| v_t[(order[k], i)].clone().conjugate());
    let s_sorted = DVector::from_iterator(r, order.iter().map(|&i| s[i]));
    Ok(SvdResult {
        q,
        s: s_sorted,
        z,
        rank: r,
    })
}

/// Tolerance-based reciprocal of a descending singular-value list:
/// `s_i ↦ 1/s_i` if `s_i > rtol · S[0] · max_dim`, else `0`.
///
/// `max_dim` is `max(m, n)` of the matrix the values came from. With
/// `S[0] = 0` (zero matrix) the output is all zeros.
pub fn pinv_values(s: &DVector<f64>, rtol: f64, max_dim: usize) -> DVector<f64> {
    if s.is_empty() {
        return DVector::zeros(0);
    }
    let cutoff = rtol * s[0] * max_dim as f64;
    s.map(|v| if v > cutoff { 1.0 / v } else { 0.0 })
}

/// Moore–Penrose pseudo-inverse assembled from [`svd`] and [`pinv_values`]:
/// `A⁺ = Z · diag(S⁺) · Qᵀ`.
pub fn pseudo_inverse(mtx: &DMatrix<f64>, rtol: f64) -> Result<DMatrix<f64>, LinalgError> {
    let fact = svd(mtx)?;
    let inv = pinv_values(&fact.s, rtol, mtx.nrows().max(mtx.ncols()));
    Ok(&fact.z * DMatrix::from_diagonal(&inv) * fact.q.transpose())
}

/// General (possibly non-symmetric) eigendecomposition of a real square
/// matrix, with the [`EigResult`] ordering and phase conventions.
pub fn eig_general(mtx: &DMatrix<f64>) -> Result<EigResult, LinalgError> {
    if mtx.is_empty() {
        return Err(LinalgError::EmptyMatrix);
    }
    if mtx.nrows() != mtx.ncols() {
        return Err(LinalgError::NotSquare {
            rows: mtx.nrows(),
            cols: mtx.ncols(),
        });
    }
    check_finite(mtx)?;
    let n = mtx.nrows();
    let a = faer::Mat::from_fn(n, n, |i, j| mtx[(i, j)]);
    let evd = a.eigendecomposition::<faer::complex_native::c64>();
    let s = evd.s().column_vector();
    let u = evd.u();
    let raw_values: Vec<Complex64> = (0..n).map(|i| Complex64::new(s[i].re, s[i].im)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        raw_values[j]
            .norm()
            .total_cmp(&raw_values[i].norm())
            .then(raw_values[j].re.total_cmp(&raw_values[i].re))
            .then(raw_values[j].im.total_cmp(&raw_values[i].im))
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| raw_values[i]));
    let mut vectors = DMatrix::from_fn(n, n, |i, k| {
        let v = u[(i, order[k])];
        Complex64::new(v.re, v.im)
    });
    for k in 0..n {
        normalize_phase(&mut vectors.column_mut(k));
    }
    Ok(EigResult {
        values,
        vectors,
        ordering: EigOrdering::MagnitudeDescending,
    })
}

/// Scale a column to unit norm and rotate its phase so the
/// largest-magnitude component is real and positive.
fn normalize_phase(col: &mut nalgebra::DVectorViewMut<Complex64>) {
    let norm = col.norm();
    if norm == 0.0 {
        return;
    }
    *col /= Complex64::new(norm, 0.0);
    let mut lead = 0;
    for i in 1..col.len() {
        if col[i].norm() > col[lead].norm() {
            lead = i;
        }
    }
    let mag = col[lead].norm();
    if mag > 0.0 {
        let phase = col[lead] / Complex64::new(mag, 0.0);
        *col *= phase.conj();
    }
}

/// Eigendecomposition of a symmetric real matrix: eigenvalues descending,
/// orthonormal eigenvectors with the sign convention of [`EigResult`].
///
/// Symmetry is verified up to `1e-10` relative to the largest entry.
pub fn eig_symmetric(mtx: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>), LinalgError> {
    if mtx.is_empty() {
        return Err(LinalgError::EmptyMatrix);
    }
    if mtx.nrows() != mtx.ncols() {
        return Err(LinalgError::NotSquare {
            rows: mtx.nrows(),
            cols: mtx.ncols(),
        });
    }
    check_finite(mtx)?;
    let scale = mtx.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let asymmetry = (mtx - mtx.transpose())
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if asymmetry > 1e-10 * scale {
        return Err(LinalgError::NotSymmetric { asymmetry });
    }
    let n = mtx.nrows();
    let eig = nalgebra::SymmetricEigen::new(mtx.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    for k in 0..n {
        let col = vectors.column(k);
        let mut lead = 0;
        for i in 1..n {
            if col[i].abs() > col[lead].abs() {
                lead = i;
            }
        }
        if vectors[(lead, k)] < 0.0 {
            vectors.column_mut(k).neg_mut();
        }
    }
    Ok((values, vectors))
}

/// Real 2m×2n representation `[[Re A, -Im A], [Im A, Re A]]` of a complex
/// m×n matrix. The map is a *-homomorphism, so pseudo-inverses commute with
/// it and the singular values of `A` appear with doubled multiplicity.
pub(crate) fn real_representation(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    DMatrix::from_fn(2 * m, 2 * n, |i, j| {
        let v = a[(i % m, j % n)];
        match (i >= m, j >= n) {
            (false, false) | (true, true) => v.re,
            (false, true) => -v.im,
            (true, false) => v.im,
        }
    })
}

/// Least-squares solve `min_X ‖A·X − B‖_F` for complex matrices, routed
/// through the real representation so only the real SVD is exercised:
/// `R(A⁺B) = R(A)⁺ · R(B)`.
pub(crate) fn complex_lstsq(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    rtol: f64,
) -> Result<DMatrix<Complex64>, LinalgError> {
    if a.nrows() != b.nrows() {
        return Err(LinalgError::NotSquare {
            rows: a.nrows(),
            cols: b.nrows(),
        });
    }
    let ra = real_representation(a);
    let rb = real_representation(b);
    let pinv = pseudo_inverse(&ra, rtol)?;
    let rx = pinv * rb;
    let (r, k) = (a.ncols(), b.ncols());
    Ok(DMatrix::from_fn(r, k, |i, j| {
        Complex64::new(rx[(i, j)], rx[(i + r, j)])
    }))
}
