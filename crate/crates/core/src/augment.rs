//! Snapshot padding for limited data acquisition.
//!
//! When only `m₀` genuine snapshots of a desired `m`-column sequence are
//! available, the remaining `m − m₀` columns are filled with seeded Gaussian
//! random vectors. Synthetic columns are appended after the genuine ones, so
//! the genuine trajectory stays contiguous; pairing then runs over the whole
//! padded sequence, crossing the genuine/synthetic boundary.
//!
//! Draws come from a named, seeded generator ([`GENERATOR_ID`]) strictly
//! sequentially — column-major over the synthetic block — so the padded
//! sequence is bitwise reproducible regardless of thread count.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::edmd::SnapshotPairs;

/// Identifier of the random generator algorithm used for padding, recorded
/// in run metadata so results are reproducible across implementations up to
/// generator choice.
pub const GENERATOR_ID: &str = "chacha12";

/// Errors from padding and pairing.
#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("need 0 < m_true <= m_target, got m_true = {m_true}, m_target = {m_target}")]
    InvalidCounts { m_true: usize, m_target: usize },
    #[error("true_data has {got} columns but the plan declares m_true = {expected}")]
    ColumnCountMismatch { expected: usize, got: usize },
    #[error("mean vector has length {got} but the data has {expected} rows")]
    MeanDimensionMismatch { expected: usize, got: usize },
    #[error("true_data must have at least one row")]
    EmptyData,
    #[error("pairing needs at least 2 columns, got {got}")]
    TooFewColumns { got: usize },
}

/// Scale of the synthetic entries' standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    /// Per-entry standard deviation 1: i.i.d. standard normal draws
    /// (plus the plan's mean).
    Unit,
    /// Per-entry standard deviation equal to the global (population)
    /// standard deviation of the genuine data's entries.
    DataStd,
}

/// Recipe for padding `m_true` genuine snapshots out to `m_target` columns.
#[derive(Debug, Clone)]
pub struct AugmentationPlan {
    pub m_target: usize,
    pub m_true: usize,
    pub mean: DVector<f64>,
    pub scale_mode: ScaleMode,
    pub seed: u64,
}

impl AugmentationPlan {
    /// Plan with the given counts; errors unless `0 < m_true ≤ m_target`.
    pub fn new(
        m_target: usize,
        m_true: usize,
        mean: DVector<f64>,
        scale_mode: ScaleMode,
        seed: u64,
    ) -> Result<Self, AugmentError> {
        if m_true == 0 || m_true > m_target {
            return Err(AugmentError::InvalidCounts { m_true, m_target });
        }
        Ok(AugmentationPlan {
            m_target,
            m_true,
            mean,
            scale_mode,
            seed,
        })
    }

    /// Number of synthetic columns the plan will generate.
    pub fn synthetic_count(&self) -> usize {
        self.m_target - self.m_true
    }
}

/// A padded snapshot sequence; `mask[j]` is true iff column `j` is genuine.
#[derive(Debug, Clone)]
pub struct AugmentedSequence {
    pub data: DMatrix<f64>,
    pub mask: Vec<bool>,
}

/// Population standard deviation over all entries of a matrix.
fn global_std(data: &DMatrix<f64>) -> f64 {
    let count = data.len() as f64;
    let mean = data.iter().sum::<f64>() / count;
    let var = data.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / count;
    var.sqrt()
}

/// Pad `true_data` (n × m_true) to `plan.m_target` columns.
///
/// The genuine columns are copied verbatim (bit-identical); each synthetic
/// entry is `mean[i] + scale · g` with `g` a standard normal draw, generated
/// sequentially column by column from the plan's seed. `scale` is 1 in unit
/// mode or the global standard deviation of `true_data` in data-std mode
/// (a constant input therefore pads with exact copies of the mean).
pub fn pad_snapshots(
    true_data: &DMatrix<f64>,
    plan: &AugmentationPlan,
) -> Result<AugmentedSequence, AugmentError> {
    if true_data.nrows() == 0 {
        return Err(AugmentError::EmptyData);
    }
    if true_data.ncols() != plan.m_true {
        return Err(AugmentError::ColumnCountMismatch {
            expected: plan.m_true,
            got: true_data.ncols(),
        });
    }
    if plan.mean.len() != true_data.nrows() {
        return Err(AugmentError::MeanDimensionMismatch {
            expected: true_data.nrows(),
            got: plan.mean.len(),
        });
    }
    let n = true_data.nrows();
    let scale = match plan.scale_mode {
        ScaleMode::Unit => 1.0,
        ScaleMode::DataStd => global_std(true_data),
    };
    let mut data = DMatrix::zeros(n, plan.m_target);
    data.columns_mut(0, plan.m_true).copy_from(true_data);
    let mut rng = ChaCha12Rng::seed_from_u64(plan.seed);
    for j in plan.m_true..plan.m_target {
        for i in 0..n {
            let g: f64 = rand::Rng::sample(&mut rng, rand_distr::StandardNormal);
            data[(i, j)] = plan.mean[i] + scale * g;
        }
    }
    let mask = (0..plan.m_target).map(|j| j < plan.m_true).collect();
    Ok(AugmentedSequence { data, mask })
}

/// Split a padded sequence into one-step pairs: `X` = columns `1..m−1`,
/// `Y` = columns `2..m` (so `y_k = x_{k+1}`), both n × (m−1).
pub fn build_pairs(seq: &AugmentedSequence) -> Result<SnapshotPairs, AugmentError> {
    let m = seq.data.ncols();
    if m < 2 {
        return Err(AugmentError::TooFewColumns { got: m });
    }
    Ok(SnapshotPairs {
        x: seq.data.columns(0, m - 1).into_owned(),
        y: seq.data.columns(1, m - 1).into_owned(),
    })
}
