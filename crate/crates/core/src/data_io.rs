//! Snapshot ingestion, serialization, synthetic data generation, and
//! result export.
//!
//! Two snapshot formats are supported:
//!
//! * **binary** — magic `"KDMD"`, version 1 as little-endian `u32`, then
//!   rows and cols as little-endian `u64`, then rows·cols IEEE-754 doubles
//!   (little-endian) in column-major order; bitwise lossless round-trips;
//! * **CSV** — one state row per line, comma-separated across time (so each
//!   column is one snapshot); a non-numeric first line is treated as a
//!   header and skipped.
//!
//! Result export writes an eigenvalue table, real/imaginary mode matrices,
//! optional per-mode grayscale heatmaps (binary PGM, P5), and a flat
//! `key=value` metadata file recording everything needed to reproduce the
//! run. Synthetic inputs come from a linear-system iterator and a seeded
//! oscillatory-field generator whose noiseless Koopman eigenvalues are
//! known in closed form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::augment::GENERATOR_ID;
use crate::edmd::EdmdResult;
use crate::kernels::KernelSpec;

/// Snapshot data: n state rows × m time columns, all entries finite.
pub type SnapshotMatrix = DMatrix<f64>;

const MAGIC: &[u8; 4] = b"KDMD";
const VERSION: u32 = 1;

/// Errors from loading, saving, and generating snapshot data.
#[derive(Debug, Error)]
pub enum DataIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes {found:?}; not a snapshot file")]
    BadMagic { found: String },
    #[error("unsupported format version {found} (expected {VERSION})")]
    BadVersion { found: u32 },
    #[error("file ends before the declared payload is complete")]
    Truncated,
    #[error("file continues past the declared payload")]
    TrailingData,
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("CSV line {line} has {got} fields, expected {expected}")]
    RaggedCsv {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("CSV line {line} contains a non-numeric field")]
    CsvParse { line: usize },
    #[error("no snapshot data present")]
    EmptyInput,
    #[error("layout {height}x{width} does not match the {rows} state rows")]
    LayoutMismatch {
        rows: usize,
        height: usize,
        width: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("oscillator field needs at least one component")]
    NoComponents,
    #[error("{what} must be at least 1")]
    InvalidCount { what: &'static str },
}

/// On-disk snapshot encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    Binary,
    Csv,
}

/// 2-D interpretation of the state vector: index `r·width + c` is the pixel
/// at row r, column c (row-major).
#[derive(Debug, Clone, Copy)]
pub struct FieldLayout {
    pub height: usize,
    pub width: usize,
}

impl FieldLayout {
    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_finite(m: &SnapshotMatrix) -> Result<(), DataIoError> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(DataIoError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Load a snapshot matrix in the given format.
pub fn load_snapshots(path: &Path, format: SnapshotFormat) -> Result<SnapshotMatrix, DataIoError> {
    match format {
        SnapshotFormat::Binary => load_binary(path),
        SnapshotFormat::Csv => load_csv(path),
    }
}

fn load_binary(path: &Path) -> Result<SnapshotMatrix, DataIoError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 4 {
        return Err(DataIoError::Truncated);
    }
    if &bytes[0..4] != MAGIC {
        return Err(DataIoError::BadMagic {
            found: String::from_utf8_lossy(&bytes[0..4]).into_owned(),
        });
    }
    if bytes.len() < 24 {
        return Err(DataIoError::Truncated);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4-byte slice"));
    if version != VERSION {
        return Err(DataIoError::BadVersion { found: version });
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().expect("8-byte slice"));
    let cols = u64::from_le_bytes(bytes[16..24].try_into().expect("8-byte slice"));
    if rows == 0 || cols == 0 {
        return Err(DataIoError::EmptyInput);
    }
    let rows: usize = rows.try_into().map_err(|_| DataIoError::Truncated)?;
    let cols: usize = cols.try_into().map_err(|_| DataIoError::Truncated)?;
    let count = rows.checked_mul(cols).ok_or(DataIoError::Truncated)?;
    let need = 24 + count.checked_mul(8).ok_or(DataIoError::Truncated)?;
    if bytes.len() < need {
        return Err(DataIoError::Truncated);
    }
    if bytes.len() > need {
        return Err(DataIoError::TrailingData);
    }
    let data: Vec<f64> = bytes[24..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let m = DMatrix::from_vec(rows, cols, data);
    check_finite(&m)?;
    Ok(m)
}

fn load_csv(path: &Path) -> Result<SnapshotMatrix, DataIoError> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut expected: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line
            .split(',')
            .map(|field| field.trim().parse::<f64>())
            .collect();
        match parsed {
            Err(_) if idx == 0 => continue, // optional header line
            Err(_) => return Err(DataIoError::CsvParse { line: idx + 1 }),
            Ok(values) => {
                match expected {
                    Some(e) if values.len() != e => {
                        return Err(DataIoError::RaggedCsv {
                            line: idx + 1,
                            expected: e,
                            got: values.len(),
                        });
                    }
                    None => expected = Some(values.len()),
                    _ => {}
                }
                rows.push(values);
            }
        }
    }
    let n = rows.len();
    let m = expected.unwrap_or(0);
    if n == 0 || m == 0 {
        return Err(DataIoError::EmptyInput);
    }
    let matrix = DMatrix::from_fn(n, m, |i, j| rows[i][j]);
    check_finite(&matrix)?;
    Ok(matrix)
}

/// Write a snapshot matrix in the binary format (bitwise lossless).
pub fn save_snapshots(path: &Path, m: &SnapshotMatrix) -> Result<(), DataIoError> {
    if m.is_empty() {
        return Err(DataIoError::EmptyInput);
    }
    check_finite(m)?;
    let mut bytes = Vec::with_capacity(24 + m.len() * 8);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    bytes.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for v in m.as_slice() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Write a real matrix as CSV, one state row per line (the load format).
///
/// Values are printed with the shortest representation that parses back to
/// the identical double, so a reload is exact.
pub fn save_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<(), DataIoError> {
    let mut text = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                text.push(',');
            }
            write!(text, "{}", m[(i, j)]).expect("writing to String cannot fail");
        }
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// Everything a run needs recorded to be reproduced.
#[derive(Debug, Clone)]
pub struct RunMeta {
    pub kernel: KernelSpec,
    pub seed: u64,
    pub rtol: f64,
    pub m_true: usize,
    pub m_target: usize,
}

/// Write the full result file set into `out_dir` (created if absent):
///
/// * `eigenvalues.csv` — header `index,re,im,magnitude`, one line per
///   eigenvalue in result order, index 1-based;
/// * `modes_re.csv`, `modes_im.csv` — n × r mode components;
/// * `mode_<k>_re.pgm` (when a layout is given) — each mode's real part as
///   an 8-bit grayscale image, min-max scaled, `k` 1-based;
/// * `run_meta.txt` — flat `key=value` metadata.
pub fn save_result(
    result: &EdmdResult,
    layout: Option<&FieldLayout>,
    out_dir: &Path,
    meta: &RunMeta,
) -> Result<(), DataIoError> {
    if let Some(l) = layout {
        if l.len() != result.modes.nrows() {
            return Err(DataIoError::LayoutMismatch {
                rows: result.modes.nrows(),
                height: l.height,
                width: l.width,
            });
        }
    }
    fs::create_dir_all(out_dir)?;

    let mut eigs = String::from("index,re,im,magnitude\n");
    for (i, l) in result.eigenvalues.iter().enumerate() {
        writeln!(eigs, "{},{},{},{}", i + 1, l.re, l.im, l.norm())
            .expect("writing to String cannot fail");
    }
    fs::write(out_dir.join("eigenvalues.csv"), eigs)?;

    save_matrix_csv(&out_dir.join("modes_re.csv"), &result.modes.map(|c| c.re))?;
    save_matrix_csv(&out_dir.join("modes_im.csv"), &result.modes.map(|c| c.im))?;

    if let Some(l) = layout {
        for k in 0..result.modes.ncols() {
            let values: Vec<f64> = result.modes.column(k).iter().map(|c| c.re).collect();
            let pgm = render_pgm(&values, l);
            fs::write(out_dir.join(format!("mode_{}_re.pgm", k + 1)), pgm)?;
        }
    }

    let mut text = String::new();
    text.push_str(&format!("kernel={}\n", meta.kernel.name()));
    match meta.kernel {
        KernelSpec::ExpPower { gamma, sigma } => {
            text.push_str(&format!("gamma={gamma}\nsigma={sigma}\n"));
        }
        KernelSpec::Polynomial { alpha, d } => {
            text.push_str(&format!("alpha={alpha}\nd={d}\n"));
        }
        KernelSpec::LaplaceRk { sigma } => {
            text.push_str(&format!("sigma={sigma}\n"));
        }
    }
    text.push_str(&format!(
        "seed={}\nrtol={:e}\nm_true={}\nm_target={}\nsynthetic_cols={}\nrank={}\ngenerator={}\n",
        meta.seed,
        meta.rtol,
        meta.m_true,
        meta.m_target,
        meta.m_target - meta.m_true,
        result.rank,
        GENERATOR_ID,
    ));
    fs::write(out_dir.join("run_meta.txt"), text)?;
    Ok(())
}

/// Render a state vector as a binary PGM (P5, maxval 255), min-max scaled;
/// a constant vector maps every pixel to 128.
fn render_pgm(values: &[f64], layout: &FieldLayout) -> Vec<u8> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = format!("P5\n{} {}\n255\n", layout.width, layout.height).into_bytes();
    for r in 0..layout.height {
        for c in 0..layout.width {
            let v = values[r * layout.width + c];
            let pixel = if hi == lo {
                128
            } else {
                ((v - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0) as u8
            };
            out.push(pixel);
        }
    }
    out
}

/// Iterate a linear system: column k (0-based) is `A^k·x0`, computed by
/// repeated multiplication.
pub fn gen_linear_system(
    a: &DMatrix<f64>,
    x0: &DVector<f64>,
    m: usize,
) -> Result<SnapshotMatrix, DataIoError> {
    if m == 0 {
        return Err(DataIoError::InvalidCount { what: "snapshot count" });
    }
    if a.nrows() != a.ncols() || a.nrows() != x0.len() {
        return Err(DataIoError::DimensionMismatch {
            expected: a.nrows(),
            got: x0.len(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) || x0.iter().any(|v| !v.is_finite()) {
        return Err(DataIoError::NonFinite { row: 0, col: 0 });
    }
    let n = x0.len();
    let mut out = DMatrix::zeros(n, m);
    let mut state = x0.clone();
    for k in 0..m {
        out.set_column(k, &state);
        if k + 1 < m {
            state = a * state;
        }
    }
    check_finite(&out)?;
    Ok(out)
}

/// One oscillatory component of the synthetic field: a fixed spatial
/// profile pair selected by `profile`, rotating at `omega` per unit time
/// and decaying by `rho` per step, scaled by `amplitude`.
#[derive(Debug, Clone, Copy)]
pub struct OscComponent {
    pub profile: u32,
    pub omega: f64,
    pub rho: f64,
    pub amplitude: f64,
}

/// Deterministic spatial profile pair for a component id, evaluated at
/// pixel centers. Even ids 2q are traveling sinusoids
/// (cos/sin((q+1)πx) · sin((q+1)πy)); odd ids 2q+1 are two Gaussian bumps
/// of width 0.12 + 0.02q centered at x = 0.35 and x = 0.65.
fn profile_pair(id: u32, layout: &FieldLayout) -> (Vec<f64>, Vec<f64>) {
    let n = layout.len();
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for i in 0..n {
        let r = i / layout.width;
        let c = i % layout.width;
        let x = (c as f64 + 0.5) / layout.width as f64;
        let y = (r as f64 + 0.5) / layout.height as f64;
        if id % 2 == 0 {
            let k = (id / 2 + 1) as f64 * std::f64::consts::PI;
            re[i] = (k * x).cos() * (k * y).sin();
            im[i] = (k * x).sin() * (k * y).sin();
        } else {
            let q = (id - 1) / 2;
            let w = 0.12 + 0.02 * q as f64;
            let bump = |cx: f64, cy: f64| {
                let dx = x - cx;
                let dy = y - cy;
                (-(dx * dx + dy * dy) / (2.0 * w * w)).exp()
            };
            re[i] = bump(0.35, 0.5);
            im[i] = bump(0.65, 0.5);
        }
    }
    (re, im)
}

/// Synthetic oscillatory field: snapshot j is
/// `Σ_k a_k·ρ_k^j·[cos(ω_k·dt·j)·P_k_re − sin(ω_k·dt·j)·P_k_im]`
/// plus seeded Gaussian pixel noise. Each snapshot is the real part of a
/// complex geometric mode, so the noiseless field's exact Koopman
/// eigenvalues are `ρ_k·e^{±i·ω_k·dt}` and each component spans at most two
/// state-space dimensions.
pub fn gen_oscillator_field(
    layout: &FieldLayout,
    m: usize,
    dt: f64,
    components: &[OscComponent],
    noise_std: f64,
    seed: u64,
) -> Result<SnapshotMatrix, DataIoError> {
    if components.is_empty() {
        return Err(DataIoError::NoComponents);
    }
    if layout.is_empty() {
        return Err(DataIoError::InvalidCount { what: "layout size" });
    }
    if m == 0 {
        return Err(DataIoError::InvalidCount { what: "snapshot count" });
    }
    let n = layout.len();
    let profiles: Vec<(Vec<f64>, Vec<f64>)> = components
        .iter()
        .map(|comp| profile_pair(comp.profile, layout))
        .collect();
    let mut out = DMatrix::zeros(n, m);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for j in 0..m {
        for (comp, (p_re, p_im)) in components.iter().zip(&profiles) {
            let decay = comp.amplitude * comp.rho.powi(j as i32);
            let phase = comp.omega * dt * j as f64;
            let (s, c) = phase.sin_cos();
            for i in 0..n {
                out[(i, j)] += decay * (c * p_re[i] - s * p_im[i]);
            }
        }
        if noise_std > 0.0 {
            for i in 0..n {
                let g: f64 = rng.sample(rand_distr::StandardNormal);
                out[(i, j)] += noise_std * g;
            }
        }
    }
    check_finite(&out)?;
    Ok(out)
}
