//! Analytics for the reproducing kernel Hilbert space weighted by the
//! radial-exponential (Laplacian) measure `(2πσ²)⁻¹ e^{-‖z‖₂/σ} dV` on ℂ.
//!
//! The scalar monomials are orthogonal under this weight:
//! `∫ z^N conj(z)^M e^{-|z|/σ} dA = 2πσ² σ^{N+M} (N+M+1)! δ_{NM}`,
//! which makes `e_N(z) = z^N / √(σ^{2N} (2N+1)!)` an orthonormal basis and
//! gives the closed-form kernel norm `‖K_z‖² = sinh(‖z‖₂/σ)/(‖z‖₂/σ)`.
//!
//! On top of the closed forms this module provides:
//!
//! * an independent polar quadrature oracle for the monomial integrals
//!   (Gauss–Laguerre radially after `r = σu`, uniform trapezoid angularly —
//!   exact for trigonometric polynomials of degree below the node count);
//! * the two-sided bound `exp(½[(‖z‖/σ)coth(‖z‖/σ) − 1]) < ‖K_z‖² <
//!   exp(‖z‖²/(6σ²))` for `z ≠ 0`;
//! * the compactness ratio `Π_z(φ; σ) = ‖K_{φ(z)}‖² / ‖K_z‖²` for affine
//!   symbols `φ(z) = Az + B`, together with a seeded shell-sampling estimate
//!   of its supremum;
//! * the closability witness sequence `σ·sin(‖z_N‖₂/σ)` with `z_N = (1/N)e₁`
//!   and its image under composition with an affine map.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

/// Largest monomial order accepted by the closed-form and quadrature
/// inner products and by [`onb_eval`]. `(2N+1)!` is still exactly
/// representable in double precision well past this point, but relative
/// error in the factorial grows with the order; failing loudly beats
/// silently losing digits.
pub const MAX_MONOMIAL_ORDER: usize = 20;

/// Errors from RKHS computations.
#[derive(Debug, Error)]
pub enum RkhsError {
    #[error("monomial order {order} exceeds {max}; the factorial scale would lose precision")]
    OrderTooLarge { order: usize, max: usize },
    #[error("the kernel norm bounds are degenerate at z = 0")]
    ZeroPoint,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("quadrature grid too coarse: {radial} radial x {angular} angular nodes (need at least 4 each)")]
    GridTooCoarse { radial: usize, angular: usize },
    #[error("affine symbol matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("sigma must be positive, got {value}")]
    InvalidSigma { value: f64 },
}

fn check_order(n: usize) -> Result<(), RkhsError> {
    if n > MAX_MONOMIAL_ORDER {
        Err(RkhsError::OrderTooLarge {
            order: n,
            max: MAX_MONOMIAL_ORDER,
        })
    } else {
        Ok(())
    }
}

fn check_sigma(sigma: f64) -> Result<(), RkhsError> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(RkhsError::InvalidSigma { value: sigma })
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Closed-form monomial inner product
/// `∫_ℂ z^N conj(z)^M e^{-|z|/σ} dA = 2πσ² σ^{N+M} (N+M+1)! δ_{NM}`.
///
/// This is the *bare* integral, without the `(2πσ²)⁻¹` measure
/// normalization.
pub fn monomial_inner_product(n: usize, m: usize, sigma: f64) -> Result<f64, RkhsError> {
    check_order(n)?;
    check_order(m)?;
    check_sigma(sigma)?;
    if n != m {
        return Ok(0.0);
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(two_pi * sigma * sigma * sigma.powi((n + m) as i32) * factorial(n + m + 1))
}

/// Polar quadrature rule for integrals against `e^{-r/σ} r dr dθ`.
///
/// Radial nodes and weights are Gauss–Laguerre for the weight `e^{-u}` on
/// `[0, ∞)` (applied after the substitution `r = σu`), computed by the
/// Golub–Welsch eigenvalue method; the angular rule is the uniform trapezoid
/// on `[0, 2π)`, which integrates `e^{ikθ}` exactly for `|k|` below the node
/// count.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    angular: usize,
    sigma: f64,
}

impl QuadratureGrid {
    /// Build a grid with the given node counts (both at least 4).
    pub fn new(radial: usize, angular: usize, sigma: f64) -> Result<Self, RkhsError> {
        if radial < 4 || angular < 4 {
            return Err(RkhsError::GridTooCoarse { radial, angular });
        }
        check_sigma(sigma)?;
        let (radial_nodes, radial_weights) = gauss_laguerre(radial);
        Ok(QuadratureGrid {
            radial_nodes,
            radial_weights,
            angular,
            sigma,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Integrate `f(r, θ)` against `e^{-r/σ} r dr dθ` over `[0,∞) × [0,2π)`.
    ///
    /// The radial factor `r` from the area element and the exponential weight
    /// are absorbed into the rule; `f` sees the plain polar coordinates.
    pub fn integrate<F: FnMut(f64, f64) -> Complex64>(&self, mut f: F) -> Complex64 {
        let dtheta = 2.0 * std::f64::consts::PI / self.angular as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (&u, &w) in self.radial_nodes.iter().zip(&self.radial_weights) {
            let r = self.sigma * u;
            // r dr = σ²u du against weight e^{-u}.
            let radial_factor = self.sigma * self.sigma * u * w;
            let mut angular_acc = Complex64::new(0.0, 0.0);
            for j in 0..self.angular {
                let theta = dtheta * j as f64;
                angular_acc += f(r, theta);
            }
            acc += angular_acc * dtheta * radial_factor;
        }
        acc
    }
}

/// Gauss–Laguerre nodes and weights for `∫₀^∞ f(u) e^{-u} du` via the
/// Golub–Welsch symmetric tridiagonal eigenproblem (diagonal `2k+1`,
/// off-diagonal `k`; total mass 1).
fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::zeros(n, n);
    for k in 0..n {
        jacobi[(k, k)] = (2 * k + 1) as f64;
        if k + 1 < n {
            jacobi[(k, k + 1)] = (k + 1) as f64;
            jacobi[(k + 1, k)] = (k + 1) as f64;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(jacobi);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let nodes = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let weights = order
        .iter()
        .map(|&i| {
            let q0 = eig.eigenvectors[(0, i)];
            q0 * q0
        })
        .collect();
    (nodes, weights)
}

/// Quadrature evaluation of the bare monomial integral
/// `∫_ℂ z^N conj(z)^M e^{-|z|/σ} dA` on the given grid.
///
/// The integrand factors as `r^{N+M+1} e^{-r/σ}` radially times `e^{i(N-M)θ}`
/// angularly, so the rule is exact (up to rounding) whenever
/// `|N - M|` is below the angular node count and `N + M + 1 ≤ 2·radial - 1`.
pub fn monomial_inner_product_quadrature(
    n: usize,
    m: usize,
    grid: &QuadratureGrid,
) -> Result<Complex64, RkhsError> {
    check_order(n)?;
    check_order(m)?;
    let k = n as i32 - m as i32;
    Ok(grid.integrate(|r, theta| {
        let radial = r.powi((n + m) as i32);
        let phase = Complex64::new(0.0, f64::from(k) * theta).exp();
        radial * phase
    }))
}

/// Orthonormal basis element `e_N(z) = z^N / √(σ^{2N} (2N+1)!)` of the
/// normalized scalar space.
pub fn onb_eval(n: usize, sigma: f64, z: Complex64) -> Result<Complex64, RkhsError> {
    check_order(n)?;
    check_sigma(sigma)?;
    let norm = (sigma.powi(2 * n as i32) * factorial(2 * n + 1)).sqrt();
    Ok(z.powu(n as u32) / norm)
}

/// `ln(sinh(u)/u)`, stable against overflow for large `u`.
fn ln_sinh_ratio(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else if u < 700.0 {
        (u.sinh() / u).ln()
    } else {
        // sinh(u) = e^u (1 - e^{-2u}) / 2; the correction is below 1e-300 here.
        u - std::f64::consts::LN_2 - u.ln()
    }
}

/// Squared norm of the reproducing kernel at `z`:
/// `‖K_z‖² = sinh(‖z‖₂/σ)/(‖z‖₂/σ)`, with the limit value 1 at `z = 0`.
///
/// Always at least 1. Panics if `sigma <= 0`.
pub fn rk_norm_sq(z: &DVector<Complex64>, sigma: f64) -> f64 {
    assert!(sigma > 0.0, "sigma must be positive");
    let u = z.norm() / sigma;
    if u == 0.0 {
        1.0
    } else {
        u.sinh() / u
    }
}

/// Two-sided bound on [`rk_norm_sq`]:
/// `exp(½[(‖z‖/σ)coth(‖z‖/σ) − 1]) < ‖K_z‖² < exp(‖z‖²/(6σ²))`.
///
/// Both bounds collapse to 1 at `z = 0`, where the inequalities degenerate;
/// that point is rejected.
pub fn rk_norm_bounds(z: &DVector<Complex64>, sigma: f64) -> Result<(f64, f64), RkhsError> {
    check_sigma(sigma)?;
    let u = z.norm() / sigma;
    if u == 0.0 {
        return Err(RkhsError::ZeroPoint);
    }
    let lower = (0.5 * (u / u.tanh() - 1.0)).exp();
    let upper = (u * u / 6.0).exp();
    Ok((lower, upper))
}

/// Affine self-map `φ(z) = Az + B` of ℂⁿ, the structural form of symbols
/// whose composition operators are bounded on this space.
#[derive(Debug, Clone)]
pub struct AffineSymbol {
    a: DMatrix<Complex64>,
    b: DVector<Complex64>,
    op_norm: f64,
}

impl AffineSymbol {
    /// Build a symbol from a square `A` and matching `B`; records `‖A‖₂`.
    pub fn new(a: DMatrix<Complex64>, b: DVector<Complex64>) -> Result<Self, RkhsError> {
        if a.nrows() != a.ncols() {
            return Err(RkhsError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if b.len() != a.nrows() {
            return Err(RkhsError::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        let op_norm = complex_operator_norm(&a);
        Ok(AffineSymbol { a, b, op_norm })
    }

    /// `φ(z) = c·z` on ℂⁿ.
    pub fn scaling(n: usize, c: f64) -> Self {
        let a = DMatrix::from_diagonal_element(n, n, Complex64::new(c, 0.0));
        let b = DVector::zeros(n);
        AffineSymbol::new(a, b).expect("scaling symbol is always well-formed")
    }

    /// Build a symbol from real `A` and `B`.
    pub fn from_real(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self, RkhsError> {
        let ac = a.map(|v| Complex64::new(v, 0.0));
        let bc = b.map(|v| Complex64::new(v, 0.0));
        AffineSymbol::new(ac, bc)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Operator norm `‖A‖₂` (largest singular value), fixed at construction.
    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    /// Apply the map to a point.
    pub fn apply(&self, z: &DVector<Complex64>) -> Result<DVector<Complex64>, RkhsError> {
        if z.len() != self.dim() {
            return Err(RkhsError::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok(&self.a * z + &self.b)
    }
}

/// `‖A‖₂` of a complex matrix via the singular values of its real
/// representation `[[Re A, -Im A], [Im A, Re A]]`, which are those of `A`
/// with doubled multiplicity.
fn complex_operator_norm(a: &DMatrix<Complex64>) -> f64 {
    let r = crate::linalg::real_representation(a);
    nalgebra::SVD::new(r, false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s))
}

/// Compactness ratio `Π_z(φ; σ) = ‖K_{φ(z)}‖² / ‖K_z‖²`.
///
/// The adjoint of the composition operator sends `K_z` to `K_{φ(z)}`, so the
/// ratio is a pure kernel-norm quotient. Evaluated in log space when either
/// norm would overflow.
pub fn pi_ratio(z: &DVector<Complex64>, phi: &AffineSymbol, sigma: f64) -> Result<f64, RkhsError> {
    check_sigma(sigma)?;
    let w = phi.apply(z)?;
    let uw = w.norm() / sigma;
    let uz = z.norm() / sigma;
    if uw < 700.0 && uz < 700.0 {
        Ok(rk_norm_sq(&w, sigma) / rk_norm_sq(z, sigma))
    } else {
        Ok((ln_sinh_ratio(uw) - ln_sinh_ratio(uz)).exp())
    }
}

/// Sampled lower bound for `Π(φ; σ) = sup_z Π_z(φ; σ)`.
///
/// For each radius, `directions_per_radius` points are drawn on the complex
/// shell of that radius (isotropic Gaussian direction, seeded); the maximum
/// ratio over all samples is returned. Deterministic for a fixed seed.
///
/// Panics if `radii` is empty or `directions_per_radius` is zero.
pub fn pi_sup_estimate(
    phi: &AffineSymbol,
    sigma: f64,
    radii: &[f64],
    directions_per_radius: usize,
    seed: u64,
) -> Result<f64, RkhsError> {
    check_sigma(sigma)?;
    assert!(!radii.is_empty(), "radii must be non-empty");
    assert!(directions_per_radius > 0, "need at least one direction per radius");
    let n = phi.dim();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    for &radius in radii {
        for _ in 0..directions_per_radius {
            let mut dir = DVector::from_fn(n, |_, _| {
                let re: f64 = rng.sample(rand_distr::StandardNormal);
                let im: f64 = rng.sample(rand_distr::StandardNormal);
                Complex64::new(re, im)
            });
            let norm = dir.norm();
            if norm == 0.0 {
                dir[0] = Complex64::new(1.0, 0.0);
            } else {
                dir /= Complex64::new(norm, 0.0);
            }
            let z = dir * Complex64::new(radius, 0.0);
            best = best.max(pi_ratio(&z, phi, sigma)?);
        }
    }
    Ok(best)
}

/// Closability witness sequence evaluated at `z_N = (1/N)·e₁`.
///
/// Without a matrix the terms are `‖z_N‖₂ · K(z_N, -z_N) = σ·sin(‖z_N‖₂/σ)`;
/// with a square matrix `A` they are the image values `σ·sin(‖A z_N‖₂/σ)`.
/// Both tend to 0, and are strictly decreasing once `‖z_N‖₂/σ < π/2`.
///
/// Panics if `n_terms` is zero, `sigma <= 0`, or `A` is not square.
pub fn closability_sequence(n_terms: usize, sigma: f64, a: Option<&DMatrix<f64>>) -> Vec<f64> {
    assert!(n_terms >= 1, "need at least one term");
    assert!(sigma > 0.0, "sigma must be positive");
    let scale = match a {
        None => 1.0,
        Some(a) => {
            assert!(a.nrows() == a.ncols(), "A must be square");
            assert!(a.nrows() >= 1, "A must be non-empty");
            // ‖A z_N‖ = (1/N)·‖A e₁‖ = (1/N)·‖first column of A‖.
            a.column(0).norm()
        }
    };
    (1..=n_terms)
        .map(|n| sigma * (scale / (n as f64 * sigma)).sin())
        .collect()
}
