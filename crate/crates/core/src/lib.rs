//! Kernel-based spectral analysis of dynamical systems from snapshot data.
//!
//! The crate estimates Koopman eigenvalues, eigenfunctions, and modes from
//! a matrix of state snapshots, either through an explicit feature
//! dictionary or entirely through kernel evaluations, and provides the
//! supporting pieces: positive-definite kernels (including one whose
//! reproducing space is analytically tractable), closed-form and
//! quadrature checks for that space, deterministic spectral linear
//! algebra, seeded data augmentation for short snapshot records, and
//! snapshot/result serialization.
//!
//! The main entry points are [`edmd::kernel_edmd`] and
//! [`edmd::edmd_feature`]; everything they return is reproducible bit for
//! bit for a fixed input and seed.

pub mod augment;
pub mod data_io;
pub mod edmd;
pub mod kernels;
pub mod linalg;
pub mod rkhs;

pub use augment::{AugmentationPlan, AugmentedSequence, ScaleMode};
pub use data_io::{FieldLayout, OscComponent, RunMeta, SnapshotFormat, SnapshotMatrix};
pub use edmd::{EdmdResult, FeatureDictionary, ModeMatch, ModelKind, SnapshotPairs};
pub use kernels::KernelSpec;
pub use linalg::{EigOrdering, EigResult, SvdResult, DEFAULT_RTOL};
pub use rkhs::{AffineSymbol, QuadratureGrid};
