//! Kernel functions and Gram/interaction matrix assembly.
//!
//! Three kernel families are supported on real snapshot vectors:
//!
//! * the exponential power family `K(x, z) = exp(-‖x - z‖₂^γ / σ)`, which
//!   contains the Laplace kernel (`γ = 1`) and the Gaussian RBF (`γ = 2`);
//! * the inhomogeneous polynomial kernel `K(x, z) = (1 + ⟨x, z⟩ / d²)^α`;
//! * the analytic reproducing kernel `K(x, z) = s(⟨x, z⟩ / σ²)` where
//!   `s(t) = sinh(√t)/√t` (an entire function of `t`, even in `√t`).
//!
//! Gram matrices are assembled from the upper triangle and mirrored, so the
//! symmetry of the output is structural rather than a floating-point accident.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Errors from kernel evaluation and matrix assembly.
#[derive(Debug, Error)]
pub enum KernelError {
    #[error("vector length mismatch: left has {left} entries, right has {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("kernel parameter `{name}` must be positive, got {value}")]
    NonPositiveParam { name: &'static str, value: f64 },
    #[error("polynomial kernel degree must be at least 1")]
    ZeroDegree,
    #[error("snapshot matrix must have at least one row and one column")]
    EmptySnapshots,
    #[error("snapshot shape mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    ShapeMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
}

/// Description of a kernel function together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `exp(-‖x - z‖₂^gamma / sigma)`; `gamma = 1` is Laplace, `gamma = 2` is GRBF.
    ExpPower { gamma: f64, sigma: f64 },
    /// `(1 + ⟨x, z⟩ / d²)^alpha`.
    Polynomial { alpha: u32, d: f64 },
    /// `sinh(√t)/√t` evaluated at `t = ⟨x, z⟩ / sigma²`.
    LaplaceRk { sigma: f64 },
}

impl KernelSpec {
    /// Laplace kernel `exp(-‖x - z‖₂ / sigma)`.
    pub fn laplace(sigma: f64) -> Self {
        KernelSpec::ExpPower { gamma: 1.0, sigma }
    }

    /// Gaussian RBF kernel `exp(-‖x - z‖₂² / sigma)`.
    pub fn grbf(sigma: f64) -> Self {
        KernelSpec::ExpPower { gamma: 2.0, sigma }
    }

    /// Short identifier used in CLI flags and metadata files.
    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::ExpPower { gamma, .. } if *gamma == 1.0 => "laplace",
            KernelSpec::ExpPower { gamma, .. } if *gamma == 2.0 => "grbf",
            KernelSpec::ExpPower { .. } => "exp-power",
            KernelSpec::Polynomial { .. } => "poly",
            KernelSpec::LaplaceRk { .. } => "laplace-rk",
        }
    }

    /// Check the parameter invariants (`sigma > 0`, `gamma > 0`, `d > 0`, `alpha >= 1`).
    pub fn validate(&self) -> Result<(), KernelError> {
        match *self {
            KernelSpec::ExpPower { gamma, sigma } => {
                positive("gamma", gamma)?;
                positive("sigma", sigma)
            }
            KernelSpec::Polynomial { alpha, d } => {
                if alpha == 0 {
                    return Err(KernelError::ZeroDegree);
                }
                positive("d", d)
            }
            KernelSpec::LaplaceRk { sigma } => positive("sigma", sigma),
        }
    }

    /// Evaluate the kernel on a pair of real vectors.
    pub fn eval(&self, x: &[f64], z: &[f64]) -> Result<f64, KernelError> {
        match *self {
            KernelSpec::ExpPower { gamma, sigma } => eval_exp_power(x, z, gamma, sigma),
            KernelSpec::Polynomial { alpha, d } => eval_polynomial(x, z, alpha, d),
            KernelSpec::LaplaceRk { sigma } => {
                positive("sigma", sigma)?;
                check_len(x, z)?;
                Ok(eval_laplace_rk_real(dot(x, z) / (sigma * sigma)))
            }
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), KernelError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(KernelError::NonPositiveParam { name, value })
    }
}

fn check_len(x: &[f64], z: &[f64]) -> Result<(), KernelError> {
    if x.len() == z.len() {
        Ok(())
    } else {
        Err(KernelError::DimensionMismatch {
            left: x.len(),
            right: z.len(),
        })
    }
}

fn dot(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).map(|(a, b)| a * b).sum()
}

fn dist_sq(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Exponential power kernel `exp(-‖x - z‖₂^gamma / sigma)`.
///
/// Values lie in `(0, 1]`, with `1` attained exactly when `x == z`. The
/// squared distance is summed term-wise, so the result is bit-identical under
/// argument swap.
pub fn eval_exp_power(x: &[f64], z: &[f64], gamma: f64, sigma: f64) -> Result<f64, KernelError> {
    positive("gamma", gamma)?;
    positive("sigma", sigma)?;
    check_len(x, z)?;
    let d2 = dist_sq(x, z);
    // Avoid sqrt-then-square noise for the two named family members.
    let pow = if gamma == 2.0 {
        d2
    } else if gamma == 1.0 {
        d2.sqrt()
    } else {
        d2.sqrt().powf(gamma)
    };
    Ok((-pow / sigma).exp())
}

/// Polynomial kernel `(1 + ⟨x, z⟩ / d²)^alpha`.
pub fn eval_polynomial(x: &[f64], z: &[f64], alpha: u32, d: f64) -> Result<f64, KernelError> {
    if alpha == 0 {
        return Err(KernelError::ZeroDegree);
    }
    positive("d", d)?;
    check_len(x, z)?;
    Ok((1.0 + dot(x, z) / (d * d)).powi(alpha as i32))
}

/// Below this magnitude `sinh(√t)/√t` is evaluated by its power series.
const SERIES_THRESHOLD: f64 = 1e-2;

/// The entire function `s(t) = sinh(√t)/√t = Σ_{N≥0} t^N / (2N + 1)!`.
///
/// `s` is even in `√t`, so the value does not depend on the square-root
/// branch. Near `t = 0` the closed form loses digits to cancellation and the
/// removable singularity, so the power series is used for `|t| < 1e-2`; the
/// series terms decay faster than `(|t|/6)^N` there, and eight terms already
/// reach full double precision.
pub fn eval_laplace_rk(t: Complex64) -> Complex64 {
    if t.norm() < SERIES_THRESHOLD {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..12u32 {
            let k = 2.0 * f64::from(n);
            term *= t / ((k + 2.0) * (k + 3.0));
            acc += term;
            if term.norm() < 1e-20 {
                break;
            }
        }
        acc
    } else {
        let w = t.sqrt();
        w.sinh() / w
    }
}

/// [`eval_laplace_rk`] restricted to the real axis.
///
/// For `t >= 0` this is `sinh(√t)/√t`; for `t < 0` it is `sin(√-t)/√-t`.
/// Evaluating in real arithmetic keeps Gram matrices free of the spurious
/// imaginary dust a complex square root of a negative real would introduce.
pub fn eval_laplace_rk_real(t: f64) -> f64 {
    if t.abs() < SERIES_THRESHOLD {
        let mut acc = 1.0;
        let mut term = 1.0;
        for n in 0..12u32 {
            let k = 2.0 * f64::from(n);
            term *= t / ((k + 2.0) * (k + 3.0));
            acc += term;
            if term.abs() < 1e-20 {
                break;
            }
        }
        acc
    } else if t >= 0.0 {
        let w = t.sqrt();
        w.sinh() / w
    } else {
        let w = (-t).sqrt();
        w.sin() / w
    }
}

/// Borrow column `j` of a column-major matrix as a slice.
pub(crate) fn column_slice(m: &DMatrix<f64>, j: usize) -> &[f64] {
    let n = m.nrows();
    &m.as_slice()[j * n..(j + 1) * n]
}

/// Gram matrix `G[i][j] = K(x_i, x_j)` over the columns of `x`.
///
/// Only the upper triangle is evaluated; the mirror guarantees exact symmetry.
pub fn gram(x: &DMatrix<f64>, k: &KernelSpec) -> Result<DMatrix<f64>, KernelError> {
    k.validate()?;
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(KernelError::EmptySnapshots);
    }
    let m = x.ncols();
    let mut g = DMatrix::zeros(m, m);
    for j in 0..m {
        for i in 0..=j {
            let v = k.eval(column_slice(x, i), column_slice(x, j))?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Interaction matrix `A[i][j] = K(y_i, x_j)`; not symmetric in general.
pub fn interaction(
    y: &DMatrix<f64>,
    x: &DMatrix<f64>,
    k: &KernelSpec,
) -> Result<DMatrix<f64>, KernelError> {
    k.validate()?;
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(KernelError::EmptySnapshots);
    }
    if y.shape() != x.shape() {
        return Err(KernelError::ShapeMismatch {
            left_rows: y.nrows(),
            left_cols: y.ncols(),
            right_rows: x.nrows(),
            right_cols: x.ncols(),
        });
    }
    let m = x.ncols();
    let mut a = DMatrix::zeros(m, m);
    for j in 0..m {
        for i in 0..m {
            a[(i, j)] = k.eval(column_slice(y, i), column_slice(x, j))?;
        }
    }
    Ok(a)
}
