//! Shared plumbing for the compute subcommands: the two-level error type
//! that maps onto exit codes, snapshot loading by extension, kernel
//! resolution (including the bandwidth heuristic), and the
//! truncate-pad-decompose pipeline used by both `dmd` and `compare`.

use std::path::Path;

use nalgebra::DVector;

use kedmd::augment::{build_pairs, pad_snapshots};
use kedmd::data_io::load_snapshots;
use kedmd::edmd::{kernel_edmd, median_heuristic_sigma, EdmdResult};
use kedmd::{AugmentationPlan, KernelSpec, ScaleMode, SnapshotFormat, SnapshotMatrix};

/// A command failure, split by exit code: usage errors (malformed
/// invocation, exit 2) versus run errors (loading or computation failed,
/// exit 1).
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Run(String),
}

/// Convenience constructor for run errors with context.
pub fn run_err(context: &str, err: impl std::fmt::Display) -> AppError {
    AppError::Run(format!("{context}: {err}"))
}

/// Load a snapshot file, choosing the format by extension (`.csv` is
/// text, everything else the binary format).
pub fn load_by_extension(path: &Path) -> Result<SnapshotMatrix, AppError> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => SnapshotFormat::Csv,
        _ => SnapshotFormat::Binary,
    };
    load_snapshots(path, format).map_err(|e| run_err(&format!("loading {}", path.display()), e))
}

/// Parse a `--pad-mode` value.
pub fn parse_pad_mode(raw: &str) -> Result<ScaleMode, AppError> {
    match raw {
        "unit" => Ok(ScaleMode::Unit),
        "data_std" => Ok(ScaleMode::DataStd),
        other => Err(AppError::Usage(format!(
            "pad-mode must be `unit` or `data_std`, got `{other}`"
        ))),
    }
}

/// Kernel family selected on the command line, before the bandwidth is
/// known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Laplace,
    Grbf,
    Poly,
    LaplaceRk,
}

impl KernelChoice {
    pub fn parse(raw: &str) -> Result<Self, AppError> {
        match raw {
            "laplace" => Ok(KernelChoice::Laplace),
            "grbf" => Ok(KernelChoice::Grbf),
            "poly" => Ok(KernelChoice::Poly),
            "laplace-rk" => Ok(KernelChoice::LaplaceRk),
            other => Err(AppError::Usage(format!(
                "kernel must be one of laplace, grbf, poly, laplace-rk; got `{other}`"
            ))),
        }
    }
}

/// Where a resolved bandwidth came from, for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaSource {
    Explicit(f64),
    /// Median pairwise distance of the genuine columns; the kernel's
    /// distance exponent is applied on top for exponential-power kernels.
    Heuristic(f64),
}

/// Resolve the median-heuristic bandwidth on `data` unless an explicit
/// sigma was supplied.
pub fn resolve_sigma(
    explicit: Option<f64>,
    data: &SnapshotMatrix,
    seed: u64,
) -> Result<SigmaSource, AppError> {
    match explicit {
        Some(s) => Ok(SigmaSource::Explicit(s)),
        None => {
            let mu = median_heuristic_sigma(data, seed)
                .map_err(|e| run_err("bandwidth heuristic", e))?;
            Ok(SigmaSource::Heuristic(mu))
        }
    }
}

/// Build a concrete kernel from a family choice and a resolved bandwidth.
///
/// An explicit sigma is used verbatim. The heuristic median distance `μ`
/// enters exponential-power kernels as `μ^γ`, so the exponent term
/// `‖x−z‖^γ/σ` is O(1) at the median distance regardless of `γ`; the
/// analytic kernel uses `μ` directly. Polynomial kernels take no bandwidth.
pub fn build_kernel(
    choice: KernelChoice,
    sigma: Option<&SigmaSource>,
    gamma: Option<f64>,
    alpha: u32,
    d: f64,
) -> Result<KernelSpec, AppError> {
    let spec = match choice {
        KernelChoice::Laplace | KernelChoice::Grbf => {
            let gamma = gamma.unwrap_or(match choice {
                KernelChoice::Laplace => 1.0,
                _ => 2.0,
            });
            let sigma = match sigma {
                Some(SigmaSource::Explicit(s)) => *s,
                Some(SigmaSource::Heuristic(mu)) => mu.powf(gamma),
                None => return Err(AppError::Usage("kernel needs a bandwidth".into())),
            };
            KernelSpec::ExpPower { gamma, sigma }
        }
        KernelChoice::Poly => KernelSpec::Polynomial { alpha, d },
        KernelChoice::LaplaceRk => {
            let sigma = match sigma {
                Some(SigmaSource::Explicit(s)) => *s,
                Some(SigmaSource::Heuristic(mu)) => *mu,
                None => return Err(AppError::Usage("kernel needs a bandwidth".into())),
            };
            KernelSpec::LaplaceRk { sigma }
        }
    };
    spec.validate()
        .map_err(|e| AppError::Usage(format!("kernel parameters: {e}")))?;
    Ok(spec)
}

/// One decomposition run: keep the first `m_true` columns of `data`, pad
/// them with seeded synthetic columns up to `m_target`, build one-step
/// pairs, and run the kernelized decomposition.
pub fn decompose(
    data: &SnapshotMatrix,
    m_true: usize,
    m_target: usize,
    kernel: &KernelSpec,
    pad_mode: ScaleMode,
    seed: u64,
    rtol: f64,
) -> Result<EdmdResult, AppError> {
    if m_true > data.ncols() {
        return Err(AppError::Run(format!(
            "true-count {m_true} exceeds the {} available columns",
            data.ncols()
        )));
    }
    let genuine = data.columns(0, m_true).into_owned();
    let plan = AugmentationPlan::new(
        m_target,
        m_true,
        DVector::zeros(data.nrows()),
        pad_mode,
        seed,
    )
    .map_err(|e| run_err("padding plan", e))?;
    let padded = pad_snapshots(&genuine, &plan).map_err(|e| run_err("padding", e))?;
    let pairs = build_pairs(&padded).map_err(|e| run_err("pairing", e))?;
    kernel_edmd(&pairs, kernel, rtol).map_err(|e| run_err("decomposition", e))
}
