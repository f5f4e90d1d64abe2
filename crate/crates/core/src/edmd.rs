//! Extended dynamic mode decomposition, in both its feature-space and
//! kernelized forms.
//!
//! The feature route lifts snapshots through an explicit monomial dictionary
//! ψ and solves the Galerkin problem: with observation matrices
//! `Ψ_x`, `Ψ_y` (row i = ψ(x_i)ᵀ), the approximate composition operator is
//! `𝒦 = 𝔊⁺·feature_A` where `𝔊 = Ψ_xᵀΨ_x` and `feature_A = Ψ_xᵀΨ_y`.
//!
//! The kernel route replaces the N_k×N_k feature matrices with m×m
//! data-indexed ones: `Ĝ_ij = k(x_i, x_j)` and `kernel_A_ij = k(y_i, x_j)`.
//! Factoring `Ĝ = QΣ²Qᵀ` by symmetric eigendecomposition (Σ = sqrt of the
//! clipped eigenvalues, rank-truncated) gives the r×r compression
//! `𝒦̂ = (Σ⁺Qᵀ)·kernel_A·(QΣ⁺)`, whose eigenpairs yield eigenfunction
//! values `phi_data = Q·Σ·V̂` at the snapshots. For any kernel with an
//! explicit feature map the two routes share their nonzero spectrum.
//!
//! (`feature_A` and `kernel_A` are deliberately distinct names for the two
//! differently-shaped interaction matrices.)
//!
//! Koopman modes close the loop: the least-squares factorization
//! `Xᵀ ≈ phi_data·Ξ` recovers the mode matrix `Ξᵀ` whose columns reconstruct
//! the full state observable from eigenfunction values, enabling spectral
//! prediction `x_t = Σ_k ξ_k λ_k^t φ_k(x₀)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::kernels::{self, KernelError, KernelSpec};
use crate::linalg::{self, LinalgError};

/// Errors from decomposition pipelines.
#[derive(Debug, Error)]
pub enum EdmdError {
    #[error("X is {x_rows}x{x_cols} but Y is {y_rows}x{y_cols}; shapes must match")]
    ShapeMismatch {
        x_rows: usize,
        x_cols: usize,
        y_rows: usize,
        y_cols: usize,
    },
    #[error("matrix sizes disagree: expected {expected} {what}, got {got}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("feature dictionary must contain at least one feature over at least one variable")]
    EmptyDictionary,
    #[error("features evaluated to non-finite values; the dictionary overflows on this data")]
    NonFiniteFeatures,
    #[error("Gram matrix is numerically zero: kernel scale is degenerate for this data")]
    DegenerateScale,
    #[error("eigenfunction matrix has no columns; nothing to recover modes from")]
    ZeroRank,
    #[error("need at least {needed} snapshot columns, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One-step snapshot pairs `y_k = F(x_k)`, both n × m.
#[derive(Debug, Clone)]
pub struct SnapshotPairs {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
}

impl SnapshotPairs {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self, EdmdError> {
        if x.shape() != y.shape() {
            return Err(EdmdError::ShapeMismatch {
                x_rows: x.nrows(),
                x_cols: x.ncols(),
                y_rows: y.nrows(),
                y_cols: y.ncols(),
            });
        }
        Ok(SnapshotPairs { x, y })
    }
}

/// Monomial dictionary over `state_dim` variables up to total degree
/// `degree`, constant feature included; the feature count is
/// `N_k = C(state_dim + degree, degree)`.
#[derive(Debug, Clone)]
pub struct FeatureDictionary {
    pub state_dim: usize,
    pub degree: u32,
    exponents: Vec<Vec<u32>>,
}

impl FeatureDictionary {
    /// All monomials of total degree ≤ `degree`, ordered by grade and then
    /// lexicographically (leading variable's exponent descending).
    pub fn monomials(state_dim: usize, degree: u32) -> Result<Self, EdmdError> {
        if state_dim == 0 {
            return Err(EdmdError::EmptyDictionary);
        }
        let mut exponents = Vec::new();
        let mut prefix = Vec::with_capacity(state_dim);
        for total in 0..=degree {
            push_compositions(state_dim, total, &mut prefix, &mut exponents);
        }
        Ok(FeatureDictionary {
            state_dim,
            degree,
            exponents,
        })
    }

    /// Feature count N_k.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// Observation matrix: row i is ψ(x_i)ᵀ for column i of `data`
    /// (m × N_k).
    pub fn psi_matrix(&self, data: &DMatrix<f64>) -> Result<DMatrix<f64>, EdmdError> {
        if data.nrows() != self.state_dim {
            return Err(EdmdError::SizeMismatch {
                what: "state rows",
                expected: self.state_dim,
                got: data.nrows(),
            });
        }
        let m = data.ncols();
        let mut psi = DMatrix::zeros(m, self.len());
        for i in 0..m {
            let x = data.column(i);
            for (j, exps) in self.exponents.iter().enumerate() {
                let mut v = 1.0;
                for (xi, &e) in x.iter().zip(exps) {
                    if e > 0 {
                        v *= xi.powi(e as i32);
                    }
                }
                psi[(i, j)] = v;
            }
        }
        if psi.iter().all(|v| v.is_finite()) {
            Ok(psi)
        } else {
            Err(EdmdError::NonFiniteFeatures)
        }
    }
}

/// Exponent vectors over `n` slots summing to exactly `total`, leading
/// exponent descending.
fn push_compositions(n: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() == n - 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in (0..=total).rev() {
        prefix.push(k);
        push_compositions(n, total - k, prefix, out);
        prefix.pop();
    }
}

/// What produced a decomposition: an explicit kernel, a monomial
/// dictionary, or caller-precomputed Gram/interaction matrices.
#[derive(Debug, Clone)]
pub enum ModelKind {
    Kernel(KernelSpec),
    Monomials { state_dim: usize, degree: u32 },
    Precomputed,
}

/// Output of a decomposition: eigenvalues (ordered by magnitude descending),
/// the compressed-operator eigenvectors `v̂`, eigenfunction values at the X
/// snapshots (`phi_data`, m × r), Koopman modes (n × r), the retained
/// singular values of the feature-data factorization, the retained rank,
/// and the model descriptor.
#[derive(Debug, Clone)]
pub struct EdmdResult {
    pub eigenvalues: DVector<Complex64>,
    pub eigvecs_hat: DMatrix<Complex64>,
    pub phi_data: DMatrix<Complex64>,
    pub modes: DMatrix<Complex64>,
    pub singular_values: DVector<f64>,
    pub rank: usize,
    pub kernel: ModelKind,
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Feature-space decomposition over an explicit dictionary:
/// `𝒦 = 𝔊⁺·(Ψ_xᵀΨ_y)` with `𝔊 = Ψ_xᵀΨ_x`; eigenfunction values are
/// `phi_data = Ψ_x·V`. Every dictionary eigenpair is kept (the
/// pseudo-inverse already suppresses directions outside the feature range),
/// so `rank` equals N_k here.
pub fn edmd_feature(
    pairs: &SnapshotPairs,
    dict: &FeatureDictionary,
    rtol: f64,
) -> Result<EdmdResult, EdmdError> {
    if dict.is_empty() {
        return Err(EdmdError::EmptyDictionary);
    }
    let psi_x = dict.psi_matrix(&pairs.x)?;
    let psi_y = dict.psi_matrix(&pairs.y)?;
    let gram = psi_x.transpose() * &psi_x;
    let feature_a = psi_x.transpose() * &psi_y;
    let koopman = linalg::pseudo_inverse(&gram, rtol)? * feature_a;
    let eig = linalg::eig_general(&koopman)?;
    let phi_data = to_complex(&psi_x) * &eig.vectors;
    let modes = koopman_modes(&phi_data, &pairs.x, rtol)?;
    let singular_values = linalg::svd(&psi_x)?.s;
    Ok(EdmdResult {
        rank: eig.values.len(),
        eigenvalues: eig.values,
        eigvecs_hat: eig.vectors,
        phi_data,
        modes,
        singular_values,
        kernel: ModelKind::Monomials {
            state_dim: dict.state_dim,
            degree: dict.degree,
        },
    })
}

/// Kernelized decomposition: assembles `Ĝ` and `kernel_A` from the kernel
/// and delegates to [`kernel_edmd_from_grams`].
pub fn kernel_edmd(
    pairs: &SnapshotPairs,
    k: &KernelSpec,
    rtol: f64,
) -> Result<EdmdResult, EdmdError> {
    let g = kernels::gram(&pairs.x, k)?;
    let a = kernels::interaction(&pairs.y, &pairs.x, k)?;
    let mut result = kernel_edmd_from_grams(&g, &a, &pairs.x, rtol)?;
    result.kernel = ModelKind::Kernel(k.clone());
    Ok(result)
}

/// Kernelized decomposition from precomputed matrices `g_ij = k(x_i, x_j)`
/// and `a_ij = k(y_i, x_j)`.
///
/// `Ĝ = QΣ²Qᵀ` by symmetric eigendecomposition with negative eigenvalues
/// clipped to zero before the square root. The pseudo-inverse threshold
/// rule applies to the matrix actually being inverted, `Ĝ`, whose singular
/// values are `Σ²`: directions with `Σ_i² ≤ rtol·Σ_0²·m` are discarded.
/// (Thresholding `Σ_i` directly would keep round-off directions, since a
/// noise eigenvalue of order `ε·Σ_0²` has `Σ_i ≈ √ε·Σ_0`, and those
/// directions inject spurious eigenvalues into the compressed operator.)
/// The compressed operator `𝒦̂ = (Σ⁺Qᵀ)·a·(QΣ⁺)` is r×r; its eigenvectors
/// lift to eigenfunction values `phi_data = Q·Σ·V̂`.
pub fn kernel_edmd_from_grams(
    g: &DMatrix<f64>,
    a: &DMatrix<f64>,
    x: &DMatrix<f64>,
    rtol: f64,
) -> Result<EdmdResult, EdmdError> {
    let m = g.nrows();
    if a.shape() != (m, m) {
        return Err(EdmdError::SizeMismatch {
            what: "interaction rows",
            expected: m,
            got: a.nrows(),
        });
    }
    if x.ncols() != m {
        return Err(EdmdError::SizeMismatch {
            what: "snapshot columns",
            expected: m,
            got: x.ncols(),
        });
    }
    if g.iter().all(|&v| v == 0.0) {
        return Err(EdmdError::DegenerateScale);
    }
    let (evals, q) = linalg::eig_symmetric(g)?;
    let clipped: Vec<f64> = evals.iter().map(|&v| v.max(0.0)).collect();
    let cutoff = rtol * clipped[0] * m as f64;
    let r = clipped.iter().take_while(|&&v| v > cutoff).count();
    let sigma_full: Vec<f64> = clipped.iter().map(|&v| v.sqrt()).collect();
    if r == 0 {
        return Err(EdmdError::DegenerateScale);
    }
    let q_r = q.columns(0, r);
    let sigma = DVector::from_iterator(r, sigma_full[..r].iter().copied());
    let sigma_inv = DMatrix::from_diagonal(&sigma.map(|s| 1.0 / s));
    let compressed = &sigma_inv * q_r.transpose() * a * q_r * &sigma_inv;
    let eig = linalg::eig_general(&compressed)?;
    let phi_data = to_complex(&(q_r * DMatrix::from_diagonal(&sigma))) * &eig.vectors;
    let modes = koopman_modes(&phi_data, x, rtol)?;
    Ok(EdmdResult {
        rank: r,
        eigenvalues: eig.values,
        eigvecs_hat: eig.vectors,
        phi_data,
        modes,
        singular_values: sigma,
        kernel: ModelKind::Precomputed,
    })
}

/// Koopman modes by least squares: solves `Xᵀ ≈ phi_data·Ξ` for
/// `Ξ = phi_data⁺·Xᵀ` and returns `Ξᵀ` (n × r; column k is the mode ξ_k,
/// transposed without conjugation).
pub fn koopman_modes(
    phi_data: &DMatrix<Complex64>,
    x: &DMatrix<f64>,
    rtol: f64,
) -> Result<DMatrix<Complex64>, EdmdError> {
    if phi_data.ncols() == 0 {
        return Err(EdmdError::ZeroRank);
    }
    if phi_data.nrows() != x.ncols() {
        return Err(EdmdError::SizeMismatch {
            what: "snapshot columns",
            expected: phi_data.nrows(),
            got: x.ncols(),
        });
    }
    let x_t = to_complex(&x.transpose());
    let xi = linalg::complex_lstsq(phi_data, &x_t, rtol)?;
    Ok(xi.transpose())
}

/// Spectral prediction: column t (t = 0, …, steps−1) is
/// `Σ_k ξ_k · λ_k^t · φ_k(x₀)`, with `x0_phi` holding the eigenfunction
/// values `φ_k(x₀)` (for data-driven use, a row of `phi_data`).
pub fn predict(
    result: &EdmdResult,
    x0_phi: &DVector<Complex64>,
    steps: usize,
) -> Result<DMatrix<Complex64>, EdmdError> {
    if x0_phi.len() != result.rank {
        return Err(EdmdError::SizeMismatch {
            what: "eigenfunction values",
            expected: result.rank,
            got: x0_phi.len(),
        });
    }
    let n = result.modes.nrows();
    let mut out = DMatrix::zeros(n, steps);
    let mut coeff = x0_phi.clone();
    for t in 0..steps {
        out.set_column(t, &(&result.modes * &coeff));
        for k in 0..coeff.len() {
            coeff[k] *= result.eigenvalues[k];
        }
    }
    Ok(out)
}

/// A matched mode pair and the absolute cosine of the angle between the
/// two mode vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMatch {
    pub index_a: usize,
    pub index_b: usize,
    pub similarity: f64,
}

/// Greedily match modes across two decompositions by eigenvalue proximity
/// (`|λ_a − λ_b|`, ties broken lexicographically by index pair), then
/// report `|⟨ξ_a, ξ_b⟩| / (‖ξ_a‖·‖ξ_b‖)` per matched pair.
///
/// The similarity is invariant under per-mode complex rescaling of either
/// side; a zero mode vector scores 0. Returns min(r, s) matches sorted by
/// `index_a`.
pub fn mode_similarity(
    modes_a: &DMatrix<Complex64>,
    eigs_a: &DVector<Complex64>,
    modes_b: &DMatrix<Complex64>,
    eigs_b: &DVector<Complex64>,
) -> Result<Vec<ModeMatch>, EdmdError> {
    if modes_a.nrows() != modes_b.nrows() {
        return Err(EdmdError::SizeMismatch {
            what: "mode rows",
            expected: modes_a.nrows(),
            got: modes_b.nrows(),
        });
    }
    if eigs_a.len() != modes_a.ncols() {
        return Err(EdmdError::SizeMismatch {
            what: "eigenvalues (side a)",
            expected: modes_a.ncols(),
            got: eigs_a.len(),
        });
    }
    if eigs_b.len() != modes_b.ncols() {
        return Err(EdmdError::SizeMismatch {
            what: "eigenvalues (side b)",
            expected: modes_b.ncols(),
            got: eigs_b.len(),
        });
    }
    let (ra, rb) = (eigs_a.len(), eigs_b.len());
    let mut candidates = Vec::with_capacity(ra * rb);
    for ia in 0..ra {
        for ib in 0..rb {
            candidates.push(((eigs_a[ia] - eigs_b[ib]).norm(), ia, ib));
        }
    }
    candidates.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_a = vec![false; ra];
    let mut used_b = vec![false; rb];
    let mut matches = Vec::with_capacity(ra.min(rb));
    for (_, ia, ib) in candidates {
        if used_a[ia] || used_b[ib] {
            continue;
        }
        used_a[ia] = true;
        used_b[ib] = true;
        let a = modes_a.column(ia);
        let b = modes_b.column(ib);
        let denom = a.norm() * b.norm();
        let similarity = if denom == 0.0 {
            0.0
        } else {
            a.dotc(&b).norm() / denom
        };
        matches.push(ModeMatch {
            index_a: ia,
            index_b: ib,
            similarity,
        });
    }
    matches.sort_by_key(|m| m.index_a);
    Ok(matches)
}

/// Cap on the number of pairwise distances the median heuristic inspects.
const MEDIAN_PAIR_CAP: usize = 10_000;

/// Median pairwise distance `‖x_i − x_j‖₂` over the snapshot columns — the
/// conventional default bandwidth when no `sigma` is supplied.
///
/// All m(m−1)/2 pairs are used when there are at most 10⁴ of them;
/// otherwise 10⁴ pairs are sampled (seeded, duplicates allowed). The median
/// of an even count is the average of the two middle values. Errors when
/// fewer than two snapshots exist or when all snapshots coincide (zero
/// median would be a degenerate bandwidth).
pub fn median_heuristic_sigma(x: &DMatrix<f64>, seed: u64) -> Result<f64, EdmdError> {
    let m = x.ncols();
    if m < 2 {
        return Err(EdmdError::InsufficientData { needed: 2, got: m });
    }
    let n_pairs = m * (m - 1) / 2;
    let mut dists = Vec::new();
    if n_pairs <= MEDIAN_PAIR_CAP {
        dists.reserve(n_pairs);
        for i in 0..m {
            for j in (i + 1)..m {
                dists.push((x.column(i) - x.column(j)).norm());
            }
        }
    } else {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        dists.reserve(MEDIAN_PAIR_CAP);
        while dists.len() < MEDIAN_PAIR_CAP {
            let i = rng.gen_range(0..m);
            let j = rng.gen_range(0..m);
            if i != j {
                dists.push((x.column(i) - x.column(j)).norm());
            }
        }
    }
    dists.sort_by(f64::total_cmp);
    let k = dists.len();
    let median = if k % 2 == 1 {
        dists[k / 2]
    } else {
        0.5 * (dists[k / 2 - 1] + dists[k / 2])
    };
    if median > 0.0 {
        Ok(median)
    } else {
        Err(EdmdError::DegenerateScale)
    }
}
