//! `kedmd validate` — the built-in numerical check registry.
//!
//! Each check re-verifies one of the library's documented invariants at
//! its stated tolerance: kernel symmetry/positivity, the analytic-space
//! identities (closed forms vs quadrature, basis orthonormality, the norm
//! sandwich, point-evaluation and decay bounds), linear-algebra contracts,
//! padding statistics, decomposition equivalences, file round-trips, and
//! end-to-end binary determinism.
//!
//! A `--seed` reseeds the randomized checks (default 42; the frozen
//! regression constants were recorded at that seed). The norm-sandwich
//! check always runs on its pinned point set, because its strictness
//! margins are properties of that specific sample. Exit code is 0 iff
//! every selected check passes; each failure is reported by name.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use kedmd::augment::{pad_snapshots, AugmentationPlan, ScaleMode};
use kedmd::data_io::{
    gen_linear_system, gen_oscillator_field, load_snapshots, save_matrix_csv, save_result,
    save_snapshots,
};
use kedmd::edmd::{
    edmd_feature, kernel_edmd, kernel_edmd_from_grams, EdmdResult, FeatureDictionary, ModelKind,
    SnapshotPairs,
};
use kedmd::kernels::{self, KernelSpec};
use kedmd::linalg::{eig_general, eig_symmetric, pseudo_inverse, svd, DEFAULT_RTOL};
use kedmd::rkhs::{
    closability_sequence, monomial_inner_product, monomial_inner_product_quadrature, onb_eval,
    pi_ratio, rk_norm_bounds, rk_norm_sq, AffineSymbol, QuadratureGrid,
};
use kedmd::{FieldLayout, OscComponent, RunMeta, SnapshotFormat};

use crate::config::{pick, pick_opt, Config};
use crate::pipeline::AppError;
use crate::ValidateArgs;

/// Fail the current check with a formatted message unless `cond` holds.
macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !($cond) {
            return Err(format!($($fmt)+));
        }
    };
}

/// One named check.
struct Check {
    name: &'static str,
    run: fn(u64) -> Result<(), String>,
}

const CHECKS: &[Check] = &[
    Check { name: "kernels.symmetry", run: kernels_symmetry },
    Check { name: "kernels.bounded", run: kernels_bounded },
    Check { name: "kernels.psd", run: kernels_psd },
    Check { name: "kernels.series", run: kernels_series },
    Check { name: "kernels.mercer", run: kernels_mercer },
    Check { name: "rkhs.quadrature", run: rkhs_quadrature },
    Check { name: "rkhs.orthonormality", run: rkhs_orthonormality },
    Check { name: "rkhs.bounds", run: rkhs_bounds },
    Check { name: "rkhs.point_eval", run: rkhs_point_eval },
    Check { name: "rkhs.weak_convergence", run: rkhs_weak_convergence },
    Check { name: "rkhs.pi_decay", run: rkhs_pi_decay },
    Check { name: "rkhs.closability", run: rkhs_closability },
    Check { name: "linalg.moore_penrose", run: linalg_moore_penrose },
    Check { name: "linalg.determinism", run: linalg_determinism },
    Check { name: "augment.determinism", run: augment_determinism },
    Check { name: "augment.stats", run: augment_stats },
    Check { name: "augment.verbatim", run: augment_verbatim },
    Check { name: "edmd.equivalence", run: edmd_equivalence },
    Check { name: "edmd.exact_dmd", run: edmd_exact_dmd },
    Check { name: "edmd.reconstruction", run: edmd_reconstruction },
    Check { name: "edmd.determinism", run: edmd_determinism },
    Check { name: "io.roundtrip", run: io_roundtrip },
    Check { name: "io.pgm", run: io_pgm },
    Check { name: "io.generators", run: io_generators },
    Check { name: "cli.determinism", run: cli_determinism },
];

pub fn run(args: ValidateArgs) -> Result<ExitCode, AppError> {
    let cfg = Config::load(args.config.as_deref())?;
    let only = pick_opt(args.only, cfg.parsed("only"))?;
    let seed = pick(args.seed, cfg.parsed("seed"), 42)?;
    let selected: Vec<&Check> = CHECKS
        .iter()
        .filter(|c| only.as_deref().map_or(true, |f| c.name.contains(f)))
        .collect();
    if selected.is_empty() {
        return Err(AppError::Usage(format!(
            "no check matches --only `{}`",
            only.unwrap_or_default()
        )));
    }
    let mut failed = 0usize;
    for check in &selected {
        match std::panic::catch_unwind(|| (check.run)(seed)) {
            Ok(Ok(())) => println!("PASS {}", check.name),
            Ok(Err(msg)) => {
                failed += 1;
                println!("FAIL {}: {msg}", check.name);
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {}: check panicked", check.name);
            }
        }
    }
    println!(
        "{} checks: {} passed, {} failed",
        selected.len(),
        selected.len() - failed,
        failed
    );
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn rand_matrix(rng: &mut ChaCha12Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(lo..hi))
}

fn rand_vec(rng: &mut ChaCha12Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(lo..hi)).collect()
}

/// The kernel families exercised by the generic kernel checks.
fn kernel_zoo() -> Vec<KernelSpec> {
    vec![
        KernelSpec::laplace(1.0),
        KernelSpec::grbf(0.7),
        KernelSpec::ExpPower { gamma: 1.5, sigma: 0.8 },
        KernelSpec::Polynomial { alpha: 2, d: 1.2 },
        KernelSpec::LaplaceRk { sigma: 1.0 },
    ]
}

/// Every `want` value must appear among `got` (greedy nearest match, each
/// candidate used once) within `tol·max(1, |want|)`.
fn require_contains(
    got: &[Complex64],
    want: &[Complex64],
    tol: f64,
    what: &str,
) -> Result<(), String> {
    let mut used = vec![false; got.len()];
    for w in want {
        let mut best: Option<(usize, f64)> = None;
        for (i, g) in got.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = (g - w).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        let Some((i, d)) = best else {
            return Err(format!("{what}: no candidate left for {w}"));
        };
        ensure!(
            d <= tol * w.norm().max(1.0),
            "{what}: {w} unmatched, nearest {} at distance {d:.3e}",
            got[i]
        );
        used[i] = true;
    }
    Ok(())
}

fn require_multiset_match(
    a: &[Complex64],
    b: &[Complex64],
    tol: f64,
    what: &str,
) -> Result<(), String> {
    ensure!(
        a.len() == b.len(),
        "{what}: multiset sizes differ, {} vs {}",
        a.len(),
        b.len()
    );
    require_contains(b, a, tol, what)
}

/// k(x, z) = k(z, x) for every kernel family, to 1e−15 relative.
fn kernels_symmetry(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for kernel in kernel_zoo() {
        for dim in 1..=3usize {
            for _ in 0..10 {
                let x = rand_vec(&mut rng, dim, -2.0, 2.0);
                let z = rand_vec(&mut rng, dim, -2.0, 2.0);
                let kxz = kernel.eval(&x, &z).map_err(|e| e.to_string())?;
                let kzx = kernel.eval(&z, &x).map_err(|e| e.to_string())?;
                ensure!(
                    (kxz - kzx).abs() <= 1e-15 * kxz.abs().max(1.0),
                    "{} asymmetric: {kxz} vs {kzx}",
                    kernel.name()
                );
            }
        }
    }
    Ok(())
}

/// Exponential-power kernels lie in (0, 1] with equality exactly at x = z.
fn kernels_bounded(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for &gamma in &[1.0, 1.5, 2.0] {
        for _ in 0..100 {
            let dim = rng.gen_range(1..=3);
            let x = rand_vec(&mut rng, dim, -3.0, 3.0);
            let z = rand_vec(&mut rng, dim, -3.0, 3.0);
            let k = kernels::eval_exp_power(&x, &z, gamma, 0.9).map_err(|e| e.to_string())?;
            ensure!(k > 0.0 && k <= 1.0, "gamma={gamma}: k={k} outside (0, 1]");
            let kxx = kernels::eval_exp_power(&x, &x, gamma, 0.9).map_err(|e| e.to_string())?;
            ensure!(kxx == 1.0, "gamma={gamma}: k(x, x) = {kxx} != 1");
        }
    }
    Ok(())
}

/// Gram matrices are exactly symmetric and positive semidefinite up to
/// round-off (smallest eigenvalue ≥ −1e−10 · largest magnitude).
fn kernels_psd(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for kernel in kernel_zoo() {
        let x = rand_matrix(&mut rng, 3, 8, -1.5, 1.5);
        let g = kernels::gram(&x, &kernel).map_err(|e| e.to_string())?;
        for i in 0..8 {
            for j in 0..8 {
                ensure!(
                    g[(i, j)].to_bits() == g[(j, i)].to_bits(),
                    "{}: gram not bitwise symmetric at ({i}, {j})",
                    kernel.name()
                );
            }
        }
        let (evals, _) = eig_symmetric(&g).map_err(|e| e.to_string())?;
        let max = evals.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let min = evals.iter().copied().fold(f64::INFINITY, f64::min);
        ensure!(
            min >= -1e-10 * max.max(1.0),
            "{}: smallest gram eigenvalue {min:e} too negative (largest {max:e})",
            kernel.name()
        );
    }
    Ok(())
}

/// Closed-form analytic kernel vs its 40-term power series, 1e−12 relative
/// over 1000 seeded arguments |t| ≤ 10.
fn kernels_series(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let t = rng.gen_range(-10.0..10.0);
        let closed = kernels::eval_laplace_rk_real(t);
        let mut term = 1.0f64;
        let mut series = 1.0f64;
        for k in 1..40u32 {
            let k = f64::from(k);
            term *= t / ((2.0 * k) * (2.0 * k + 1.0));
            series += term;
        }
        ensure!(
            (closed - series).abs() <= 1e-12 * closed.abs().max(1.0),
            "t={t}: closed {closed} vs series {series}"
        );
    }
    Ok(())
}

/// The analytic kernel equals its basis expansion
/// Σ_N e_N(z)·conj(e_N(w)) for |z|, |w| ≤ 3σ, to 1e−10.
fn kernels_mercer(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..30 {
        let sigma = rng.gen_range(0.5..2.0);
        let z = Complex64::from_polar(3.0 * sigma * rng.gen_range(0.0..1.0), rng.gen_range(0.0..TAU));
        let w = Complex64::from_polar(3.0 * sigma * rng.gen_range(0.0..1.0), rng.gen_range(0.0..TAU));
        let direct = kernels::eval_laplace_rk(z * w.conj() / (sigma * sigma));
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 0..=20 {
            sum += onb_eval(n, sigma, z).map_err(|e| e.to_string())?
                * onb_eval(n, sigma, w).map_err(|e| e.to_string())?.conj();
        }
        ensure!(
            (direct - sum).norm() <= 1e-10 * direct.norm().max(1.0),
            "z={z}, w={w}, sigma={sigma}: kernel {direct} vs expansion {sum}"
        );
    }
    Ok(())
}

/// Closed-form monomial inner products vs the quadrature oracle for
/// N, M ≤ 6 and σ ∈ {0.5, 1, 2}, to 1e−8 of the radial integral's scale.
fn rkhs_quadrature(_seed: u64) -> Result<(), String> {
    for &sigma in &[0.5, 1.0, 2.0] {
        let grid = QuadratureGrid::new(24, 32, sigma).map_err(|e| e.to_string())?;
        for n in 0..=6usize {
            for m in 0..=6usize {
                let closed = monomial_inner_product(n, m, sigma).map_err(|e| e.to_string())?;
                let quad =
                    monomial_inner_product_quadrature(n, m, &grid).map_err(|e| e.to_string())?;
                let scale = TAU
                    * sigma.powi((n + m + 2) as i32)
                    * (1..=n + m + 1).product::<usize>() as f64;
                ensure!(
                    (quad.re - closed).abs() <= 1e-8 * scale,
                    "N={n} M={m} sigma={sigma}: closed {closed}, quadrature {quad}"
                );
                ensure!(quad.im.abs() <= 1e-10 * scale, "N={n} M={m}: imaginary leak {quad}");
            }
        }
    }
    Ok(())
}

/// The normalized monomials integrate to δ_{NM} under the weight, to 1e−8.
fn rkhs_orthonormality(_seed: u64) -> Result<(), String> {
    for &sigma in &[0.5, 1.0, 2.0] {
        let grid = QuadratureGrid::new(24, 32, sigma).map_err(|e| e.to_string())?;
        let mass = TAU * sigma * sigma;
        for n in 0..=6usize {
            for m in 0..=6usize {
                let mut err: Option<String> = None;
                let ip = grid.integrate(|r, theta| {
                    let z = Complex64::from_polar(r, theta);
                    match (onb_eval(n, sigma, z), onb_eval(m, sigma, z)) {
                        (Ok(a), Ok(b)) => a * b.conj(),
                        (Err(e), _) | (_, Err(e)) => {
                            err = Some(e.to_string());
                            Complex64::new(0.0, 0.0)
                        }
                    }
                }) / mass;
                if let Some(e) = err {
                    return Err(e);
                }
                let expected = if n == m { 1.0 } else { 0.0 };
                ensure!(
                    (ip.re - expected).abs() <= 1e-8 && ip.im.abs() <= 1e-8,
                    "e_{n}·e_{m} sigma={sigma}: got {ip}"
                );
            }
        }
    }
    Ok(())
}

/// The kernel-norm sandwich is strict with > 1e−12 relative margins on the
/// pinned sample (1000 points, 1e−3 ≤ ‖z‖/σ ≤ 10), and the three values
/// at ‖z‖ = σ match their frozen four-decimal constants.
///
/// Always runs on the pinned point set: the strictness margins are
/// properties of this sample, so reseeding would turn a regression
/// constant into a coin flip.
fn rkhs_bounds(_seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    for i in 0..1000 {
        let u = rng.gen_range(1e-3..10.0);
        let theta = rng.gen_range(0.0..TAU);
        let z = DVector::from_vec(vec![Complex64::from_polar(u, theta)]);
        let norm = rk_norm_sq(&z, 1.0);
        let (lo, hi) = rk_norm_bounds(&z, 1.0).map_err(|e| e.to_string())?;
        ensure!(
            (norm - lo) / norm > 1e-12,
            "sample {i}: lower margin too thin at u={u} (lo={lo}, norm={norm})"
        );
        ensure!(
            (hi - norm) / norm > 1e-12,
            "sample {i}: upper margin too thin at u={u} (norm={norm}, hi={hi})"
        );
    }
    let z = DVector::from_vec(vec![Complex64::new(1.0, 0.0)]);
    let norm = rk_norm_sq(&z, 1.0);
    let (lo, hi) = rk_norm_bounds(&z, 1.0).map_err(|e| e.to_string())?;
    for (value, frozen, label) in [(lo, 1.1694, "lower"), (norm, 1.1752, "norm"), (hi, 1.1814, "upper")] {
        ensure!(
            (value - frozen).abs() <= 5e-5,
            "{label} value at unit radius drifted: {value} vs frozen {frozen}"
        );
    }
    ensure!(lo < norm && norm < hi, "ordering violated at unit radius: {lo}, {norm}, {hi}");
    Ok(())
}

/// |f(z)| ≤ ‖f‖·‖K_z‖ for random finite basis expansions f.
fn rkhs_point_eval(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..300 {
        let sigma = rng.gen_range(0.5..2.0);
        let coeffs: Vec<Complex64> = (0..7)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f_norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let z = Complex64::from_polar(rng.gen_range(0.0..5.0) * sigma, rng.gen_range(0.0..TAU));
        let mut f_z = Complex64::new(0.0, 0.0);
        for (n, c) in coeffs.iter().enumerate() {
            f_z += c * onb_eval(n, sigma, z).map_err(|e| e.to_string())?;
        }
        let bound = rk_norm_sq(&DVector::from_vec(vec![z]), sigma).sqrt() * f_norm;
        ensure!(
            f_z.norm() <= bound * (1.0 + 1e-12),
            "|f(z)| = {} exceeds bound {bound} at z={z}, sigma={sigma}",
            f_z.norm()
        );
    }
    Ok(())
}

/// Normalized kernel sections lose all correlation with any fixed point
/// along a ray: value at 50σ below 1e−6 of the value at σ.
fn rkhs_weak_convergence(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let sigma = rng.gen_range(0.5..2.0);
        let angle = rng.gen_range(0.0..TAU);
        let dir = [angle.cos(), angle.sin()];
        let t = rng.gen_range(0.0..sigma);
        let value = |u: f64| {
            let z = DVector::from_vec(vec![
                Complex64::new(u * sigma * dir[0], 0.0),
                Complex64::new(u * sigma * dir[1], 0.0),
            ]);
            let inner = u * sigma * t / (sigma * sigma);
            kernels::eval_laplace_rk(Complex64::new(inner, 0.0)).norm()
                / rk_norm_sq(&z, sigma).sqrt()
        };
        ensure!(
            value(50.0) < 1e-6 * value(1.0),
            "no decay: value(50σ)={}, value(σ)={}",
            value(50.0),
            value(1.0)
        );
    }
    Ok(())
}

/// The compactness ratio decays along rays for contractive affine symbols,
/// and the pure-scaling spot value at 20σ matches its closed form
/// 2·sinh(10)/sinh(20) to 1e−10 relative, falling below 1e−6 by 50σ.
fn rkhs_pi_decay(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let sigma = 1.0;
    for &c in &[0.3, 0.5, 0.9] {
        let n = 2;
        let raw: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut b = DVector::from_fn(n, |i, _| Complex64::new(raw[2 * i], raw[2 * i + 1]));
        let b_norm = b.norm();
        if b_norm > sigma {
            b *= Complex64::new(sigma / b_norm * 0.9, 0.0);
        }
        let a = DMatrix::from_diagonal_element(n, n, Complex64::new(c, 0.0));
        let phi = AffineSymbol::new(a, b).map_err(|e| e.to_string())?;
        let angle = rng.gen_range(0.0..TAU);
        let dir = [angle.cos(), angle.sin()];
        let u_max = 50.0 / (1.0 - c);
        let mut samples = Vec::with_capacity(200);
        for k in 0..200 {
            let u = u_max * (k as f64 + 1.0) / 200.0;
            let z = DVector::from_vec(vec![
                Complex64::new(u * sigma * dir[0], 0.0),
                Complex64::new(u * sigma * dir[1], 0.0),
            ]);
            samples.push(pi_ratio(&z, &phi, sigma).map_err(|e| e.to_string())?);
        }
        for k in 100..199 {
            ensure!(
                samples[k + 1] < samples[k],
                "c={c}: ratio not decreasing at sample {k}: {} -> {}",
                samples[k],
                samples[k + 1]
            );
        }
        ensure!(samples[199] < 1e-6, "c={c}: final ratio {} not below 1e-6", samples[199]);
    }
    let phi = AffineSymbol::scaling(2, 0.5);
    let z20 = DVector::from_vec(vec![Complex64::new(20.0, 0.0), Complex64::new(0.0, 0.0)]);
    let got = pi_ratio(&z20, &phi, 1.0).map_err(|e| e.to_string())?;
    let expected = 2.0 * 10.0f64.sinh() / 20.0f64.sinh();
    ensure!(
        (got - expected).abs() <= 1e-10 * expected,
        "scaling ratio at 20σ: {got} vs closed form {expected}"
    );
    let z50 = DVector::from_vec(vec![Complex64::new(50.0, 0.0), Complex64::new(0.0, 0.0)]);
    let far = pi_ratio(&z50, &phi, 1.0).map_err(|e| e.to_string())?;
    ensure!(far < 1e-6, "scaling ratio at 50σ is {far}, expected < 1e-6");
    Ok(())
}

/// The closability witness sequences and their images under the
/// half-scaling map decrease strictly and vanish: final/first < 1e−2 at
/// 1000 terms.
fn rkhs_closability(_seed: u64) -> Result<(), String> {
    for &sigma in &[0.5, 1.0, 2.0] {
        let a = DMatrix::from_diagonal_element(2, 2, 0.5);
        for (label, seq) in [
            ("base", closability_sequence(1000, sigma, None)),
            ("image", closability_sequence(1000, sigma, Some(&a))),
        ] {
            ensure!(seq.iter().all(|&v| v > 0.0), "sigma={sigma} {label}: non-positive term");
            let start = (2.0 / (PI * sigma)).ceil() as usize + 1;
            for n in start..1000 {
                ensure!(
                    seq[n] < seq[n - 1],
                    "sigma={sigma} {label}: not strictly decreasing at term {}",
                    n + 1
                );
            }
            ensure!(
                seq[999] < seq[0] * 1e-2,
                "sigma={sigma} {label}: final/first = {:e} not below 1e-2",
                seq[999] / seq[0]
            );
        }
    }
    Ok(())
}

/// The four Moore–Penrose identities hold for the pseudo-inverse of a
/// kernel Gram matrix, to 1e−8 of the matrix scale.
fn linalg_moore_penrose(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let x = rand_matrix(&mut rng, 3, 10, -2.0, 2.0);
    let g = kernels::gram(&x, &KernelSpec::laplace(1.0)).map_err(|e| e.to_string())?;
    let p = pseudo_inverse(&g, DEFAULT_RTOL).map_err(|e| e.to_string())?;
    let amax = |m: &DMatrix<f64>| m.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let g_scale = amax(&g).max(1e-300);
    let p_scale = amax(&p).max(1e-300);
    ensure!(
        amax(&(&g * &p * &g - &g)) <= 1e-8 * g_scale,
        "G·G⁺·G deviates from G"
    );
    ensure!(
        amax(&(&p * &g * &p - &p)) <= 1e-8 * p_scale,
        "G⁺·G·G⁺ deviates from G⁺"
    );
    let gp = &g * &p;
    let pg = &p * &g;
    ensure!(
        amax(&(&gp - &gp.transpose())) <= 1e-8 * amax(&gp).max(1e-300),
        "G·G⁺ not symmetric"
    );
    ensure!(
        amax(&(&pg - &pg.transpose())) <= 1e-8 * amax(&pg).max(1e-300),
        "G⁺·G not symmetric"
    );
    Ok(())
}

/// The spectral factorizations are bitwise deterministic across repeated
/// calls on the same input.
fn linalg_determinism(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let m = rand_matrix(&mut rng, 12, 12, -1.0, 1.0);
    let e1 = eig_general(&m).map_err(|e| e.to_string())?;
    let e2 = eig_general(&m).map_err(|e| e.to_string())?;
    for i in 0..12 {
        ensure!(
            e1.values[i].re.to_bits() == e2.values[i].re.to_bits()
                && e1.values[i].im.to_bits() == e2.values[i].im.to_bits(),
            "eigenvalue {i} differs between runs"
        );
    }
    ensure!(
        e1.vectors
            .iter()
            .zip(e2.vectors.iter())
            .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()),
        "eigenvectors differ between runs"
    );
    let s1 = svd(&m).map_err(|e| e.to_string())?;
    let s2 = svd(&m).map_err(|e| e.to_string())?;
    ensure!(
        s1.s.iter().zip(s2.s.iter()).all(|(a, b)| a.to_bits() == b.to_bits()),
        "singular values differ between runs"
    );
    let g = m.transpose() * &m;
    let (v1, _) = eig_symmetric(&g).map_err(|e| e.to_string())?;
    let (v2, _) = eig_symmetric(&g).map_err(|e| e.to_string())?;
    ensure!(
        v1.iter().zip(v2.iter()).all(|(a, b)| a.to_bits() == b.to_bits()),
        "symmetric eigenvalues differ between runs"
    );
    Ok(())
}

/// Padding is bitwise reproducible for a fixed seed and changes with it.
fn augment_determinism(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let data = rand_matrix(&mut rng, 40, 5, -1.0, 1.0);
    let plan = |s: u64| {
        AugmentationPlan::new(20, 5, DVector::zeros(40), ScaleMode::Unit, s)
            .expect("5 of 20 columns is a valid plan")
    };
    let a = pad_snapshots(&data, &plan(seed)).map_err(|e| e.to_string())?;
    let b = pad_snapshots(&data, &plan(seed)).map_err(|e| e.to_string())?;
    ensure!(
        a.data.iter().zip(b.data.iter()).all(|(x, y)| x.to_bits() == y.to_bits()),
        "same seed produced different padding"
    );
    let c = pad_snapshots(&data, &plan(seed.wrapping_add(1))).map_err(|e| e.to_string())?;
    ensure!(
        a.data.iter().zip(c.data.iter()).any(|(x, y)| x.to_bits() != y.to_bits()),
        "different seeds produced identical padding"
    );
    Ok(())
}

/// Synthetic entries follow the padding model: mean 0 / std 1 in unit
/// mode, and the data's global std in data-std mode.
fn augment_stats(seed: u64) -> Result<(), String> {
    let n = 2000;
    let data = DMatrix::from_fn(n, 3, |i, j| (i as f64 * 0.01).sin() + j as f64);
    let plan = AugmentationPlan::new(60, 3, DVector::zeros(n), ScaleMode::Unit, seed)
        .map_err(|e| e.to_string())?;
    let out = pad_snapshots(&data, &plan).map_err(|e| e.to_string())?;
    let synth: Vec<f64> = (3..60)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .map(|(i, j)| out.data[(i, j)])
        .collect();
    let count = synth.len() as f64;
    let mean = synth.iter().sum::<f64>() / count;
    let std = (synth.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count).sqrt();
    ensure!(mean.abs() < 0.02, "unit-mode synthetic mean {mean}");
    ensure!((std - 1.0).abs() < 0.02, "unit-mode synthetic std {std}");

    let n = 400;
    let data = DMatrix::from_fn(n, 4, |i, j| if (i + j) % 2 == 0 { 3.0 } else { -3.0 });
    let plan = AugmentationPlan::new(104, 4, DVector::zeros(n), ScaleMode::DataStd, seed)
        .map_err(|e| e.to_string())?;
    let out = pad_snapshots(&data, &plan).map_err(|e| e.to_string())?;
    let synth: Vec<f64> = (4..104)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .map(|(i, j)| out.data[(i, j)])
        .collect();
    let count = synth.len() as f64;
    let mean = synth.iter().sum::<f64>() / count;
    let std = (synth.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count).sqrt();
    ensure!(
        (std - 3.0).abs() < 0.1,
        "data-std synthetic std {std}, expected about 3"
    );
    Ok(())
}

/// Genuine columns survive padding bit for bit, and the mask marks exactly
/// the genuine prefix.
fn augment_verbatim(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let data = rand_matrix(&mut rng, 15, 6, -5.0, 5.0);
    let plan = AugmentationPlan::new(14, 6, DVector::zeros(15), ScaleMode::DataStd, seed)
        .map_err(|e| e.to_string())?;
    let out = pad_snapshots(&data, &plan).map_err(|e| e.to_string())?;
    for j in 0..6 {
        for i in 0..15 {
            ensure!(
                out.data[(i, j)].to_bits() == data[(i, j)].to_bits(),
                "genuine entry ({i}, {j}) altered by padding"
            );
        }
    }
    let expected_mask: Vec<bool> = (0..14).map(|j| j < 6).collect();
    ensure!(out.mask == expected_mask, "mask does not mark the genuine prefix");
    Ok(())
}

/// The explicit-dictionary route and the kernelized route produce the same
/// nonzero spectrum (1e−8 as multisets) when fed the same feature geometry.
fn edmd_equivalence(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let shapes = [(1usize, 1u32), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1)];
    for instance in 0..20 {
        let (n, degree) = shapes[instance % shapes.len()];
        let dict = FeatureDictionary::monomials(n, degree).map_err(|e| e.to_string())?;
        let n_k = dict.len();
        let m = rng.gen_range(n_k + 2..=12);
        let x = rand_matrix(&mut rng, n, m, -2.0, 2.0);
        let y = rand_matrix(&mut rng, n, m, -2.0, 2.0);
        let pairs = SnapshotPairs::new(x.clone(), y.clone()).map_err(|e| e.to_string())?;

        let feature = edmd_feature(&pairs, &dict, DEFAULT_RTOL).map_err(|e| e.to_string())?;
        let psi_x = dict.psi_matrix(&x).map_err(|e| e.to_string())?;
        let psi_y = dict.psi_matrix(&y).map_err(|e| e.to_string())?;
        let g = &psi_x * psi_x.transpose();
        let a = &psi_y * psi_x.transpose();
        let kernel = kernel_edmd_from_grams(&g, &a, &x, DEFAULT_RTOL).map_err(|e| e.to_string())?;

        let scale = feature
            .eigenvalues
            .iter()
            .map(|l| l.norm())
            .fold(1.0f64, f64::max);
        let nonzero = |vals: &DVector<Complex64>| -> Vec<Complex64> {
            vals.iter().filter(|l| l.norm() > 1e-8 * scale).copied().collect()
        };
        require_multiset_match(
            &nonzero(&feature.eigenvalues),
            &nonzero(&kernel.eigenvalues),
            1e-8,
            &format!("instance {instance} (state dim {n}, degree {degree}, m={m})"),
        )?;
    }
    Ok(())
}

/// On linear systems, the degree-1 polynomial kernel recovers
/// {1} ∪ spec(A) to 1e−8.
fn edmd_exact_dmd(_seed: u64) -> Result<(), String> {
    let kernel = KernelSpec::Polynomial { alpha: 1, d: 1.0 };
    let run = |a: DMatrix<f64>, x0: DVector<f64>, want: Vec<Complex64>, what: &str| {
        let traj = gen_linear_system(&a, &x0, 20).map_err(|e| e.to_string())?;
        let pairs = SnapshotPairs::new(
            traj.columns(0, 19).into_owned(),
            traj.columns(1, 19).into_owned(),
        )
        .map_err(|e| e.to_string())?;
        let result = kernel_edmd(&pairs, &kernel, DEFAULT_RTOL).map_err(|e| e.to_string())?;
        let got: Vec<Complex64> = result.eigenvalues.iter().copied().collect();
        require_contains(&got, &want, 1e-8, what)
    };
    run(
        DMatrix::from_diagonal(&DVector::from_vec(vec![0.9, 0.5])),
        DVector::from_vec(vec![1.0, 1.0]),
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.9, 0.0),
            Complex64::new(0.5, 0.0),
        ],
        "diagonal system",
    )?;
    let (s, c) = (PI / 8.0).sin_cos();
    run(
        DMatrix::from_row_slice(2, 2, &[0.95 * c, -0.95 * s, 0.95 * s, 0.95 * c]),
        DVector::from_vec(vec![1.0, 0.0]),
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.95 * c, 0.95 * s),
            Complex64::new(0.95 * c, -0.95 * s),
        ],
        "damped rotation",
    )
}

/// The recovered modes minimize the snapshot reconstruction residual:
/// every random perturbation of the mode matrix does at least as badly.
fn edmd_reconstruction(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut a = rand_matrix(&mut rng, 3, 3, -1.0, 1.0);
    let rho = a
        .complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0f64, f64::max);
    if rho > 1e-6 {
        a *= 0.95 / rho;
    }
    let x0 = DVector::from_fn(3, |_, _| rng.gen_range(0.5..1.5));
    let traj = gen_linear_system(&a, &x0, 15).map_err(|e| e.to_string())?;
    let pairs = SnapshotPairs::new(
        traj.columns(0, 14).into_owned(),
        traj.columns(1, 14).into_owned(),
    )
    .map_err(|e| e.to_string())?;
    let result = kernel_edmd(&pairs, &KernelSpec::laplace(2.0), DEFAULT_RTOL)
        .map_err(|e| e.to_string())?;

    let x_t = pairs.x.transpose().map(|v| Complex64::new(v, 0.0));
    let xi = result.modes.transpose();
    let base = (&x_t - &result.phi_data * &xi).norm();
    let scale = x_t.norm();
    for trial in 0..40 {
        let mut dir = DMatrix::from_fn(xi.nrows(), xi.ncols(), |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let norm = dir.norm();
        dir /= Complex64::new(norm, 0.0);
        let perturbed =
            (&x_t - &result.phi_data * (&xi + dir * Complex64::new(1e-3, 0.0))).norm();
        ensure!(
            perturbed >= base - 1e-12 * scale,
            "trial {trial}: perturbation decreased the residual {base} -> {perturbed}"
        );
    }
    Ok(())
}

/// The full kernelized decomposition is bitwise deterministic.
fn edmd_determinism(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let x = rand_matrix(&mut rng, 4, 12, -1.0, 1.0);
    let y = rand_matrix(&mut rng, 4, 12, -1.0, 1.0);
    let pairs = SnapshotPairs::new(x, y).map_err(|e| e.to_string())?;
    let kernel = KernelSpec::laplace(1.0);
    let a = kernel_edmd(&pairs, &kernel, DEFAULT_RTOL).map_err(|e| e.to_string())?;
    let b = kernel_edmd(&pairs, &kernel, DEFAULT_RTOL).map_err(|e| e.to_string())?;
    ensure!(a.rank == b.rank, "ranks differ between runs");
    ensure!(
        a.eigenvalues.iter().zip(b.eigenvalues.iter()).all(|(p, q)| {
            p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits()
        }),
        "eigenvalues differ between runs"
    );
    ensure!(
        a.modes.iter().zip(b.modes.iter()).all(|(p, q)| {
            p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits()
        }),
        "modes differ between runs"
    );
    Ok(())
}

/// Binary and CSV snapshot files round-trip bit for bit.
fn io_roundtrip(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut data = rand_matrix(&mut rng, 7, 5, -1e3, 1e3);
    data[(0, 0)] = -0.0;
    data[(1, 0)] = 1e-300;
    data[(2, 0)] = -1e300;
    data[(3, 0)] = f64::MIN_POSITIVE;

    let bin = dir.path().join("snapshots.bin");
    save_snapshots(&bin, &data).map_err(|e| e.to_string())?;
    let back = load_snapshots(&bin, SnapshotFormat::Binary).map_err(|e| e.to_string())?;
    ensure!(back.shape() == data.shape(), "binary round-trip changed the shape");
    ensure!(
        back.iter().zip(data.iter()).all(|(a, b)| a.to_bits() == b.to_bits()),
        "binary round-trip changed a value"
    );

    let csv = dir.path().join("snapshots.csv");
    save_matrix_csv(&csv, &data).map_err(|e| e.to_string())?;
    let back = load_snapshots(&csv, SnapshotFormat::Csv).map_err(|e| e.to_string())?;
    ensure!(back.shape() == data.shape(), "CSV round-trip changed the shape");
    ensure!(
        back.iter().zip(data.iter()).all(|(a, b)| a.to_bits() == b.to_bits()),
        "CSV round-trip changed a value"
    );
    Ok(())
}

/// Result images are valid min-max-scaled binary PGMs, and the eigenvalue
/// CSV uses the exact documented layout.
fn io_pgm(_seed: u64) -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let modes = DMatrix::from_fn(4, 2, |i, j| {
        if j == 0 {
            Complex64::new(i as f64, 0.5)
        } else {
            Complex64::new(2.5, -1.0)
        }
    });
    let result = EdmdResult {
        eigenvalues: DVector::from_vec(vec![
            Complex64::new(0.9, 0.0),
            Complex64::new(0.5, 0.0),
        ]),
        eigvecs_hat: DMatrix::from_diagonal_element(2, 2, Complex64::new(1.0, 0.0)),
        phi_data: DMatrix::zeros(3, 2),
        modes,
        singular_values: DVector::from_vec(vec![1.0, 0.5]),
        rank: 2,
        kernel: ModelKind::Precomputed,
    };
    let meta = RunMeta {
        kernel: KernelSpec::laplace(1.0),
        seed: 0,
        rtol: DEFAULT_RTOL,
        m_true: 3,
        m_target: 3,
    };
    let layout = FieldLayout { height: 2, width: 2 };
    save_result(&result, Some(&layout), dir.path(), &meta).map_err(|e| e.to_string())?;

    let eigs = std::fs::read_to_string(dir.path().join("eigenvalues.csv"))
        .map_err(|e| e.to_string())?;
    ensure!(
        eigs == "index,re,im,magnitude\n1,0.9,0,0.9\n2,0.5,0,0.5\n",
        "eigenvalue CSV layout drifted: {eigs:?}"
    );
    let ramp = std::fs::read(dir.path().join("mode_1_re.pgm")).map_err(|e| e.to_string())?;
    ensure!(
        ramp == [b"P5\n2 2\n255\n".as_slice(), &[0u8, 85, 170, 255]].concat(),
        "ramp mode did not min-max scale to [0, 85, 170, 255]"
    );
    let flat = std::fs::read(dir.path().join("mode_2_re.pgm")).map_err(|e| e.to_string())?;
    ensure!(
        flat == [b"P5\n2 2\n255\n".as_slice(), &[128u8, 128, 128, 128]].concat(),
        "constant mode did not map to mid-gray"
    );
    Ok(())
}

/// The data generators are pure functions of their seed, and the linear
/// generator reproduces the exact geometric sequence.
fn io_generators(seed: u64) -> Result<(), String> {
    let a = DMatrix::from_element(1, 1, 0.9);
    let x0 = DVector::from_element(1, 1.0);
    let traj = gen_linear_system(&a, &x0, 10).map_err(|e| e.to_string())?;
    let mut expected = 1.0f64;
    for k in 0..10 {
        ensure!(
            traj[(0, k)].to_bits() == expected.to_bits(),
            "linear trajectory differs from repeated multiplication at column {k}"
        );
        expected *= 0.9;
    }

    let layout = FieldLayout { height: 6, width: 7 };
    let components = [OscComponent {
        profile: 0,
        omega: PI / 8.0,
        rho: 0.99,
        amplitude: 1.0,
    }];
    let a = gen_oscillator_field(&layout, 8, 1.0, &components, 0.05, seed)
        .map_err(|e| e.to_string())?;
    let b = gen_oscillator_field(&layout, 8, 1.0, &components, 0.05, seed)
        .map_err(|e| e.to_string())?;
    ensure!(
        a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()),
        "same seed produced different oscillator fields"
    );
    let c = gen_oscillator_field(&layout, 8, 1.0, &components, 0.05, seed.wrapping_add(1))
        .map_err(|e| e.to_string())?;
    ensure!(
        a.iter().zip(c.iter()).any(|(x, y)| x.to_bits() != y.to_bits()),
        "different seeds produced identical oscillator fields"
    );
    Ok(())
}

/// End-to-end binary determinism: generating data and decomposing it twice
/// with identical flags yields byte-identical result files.
fn cli_determinism(seed: u64) -> Result<(), String> {
    let exe = std::env::current_exe().map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gen_dir = dir.path().join("data");
    let seed_arg = seed.to_string();
    let status = std::process::Command::new(&exe)
        .args([
            "gen",
            "--system",
            "oscillator",
            "--height",
            "8",
            "--width",
            "9",
            "--m",
            "14",
            "--noise",
            "0.01",
            "--seed",
            &seed_arg,
            "--out-dir",
        ])
        .arg(&gen_dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(status.status.success(), "gen subprocess failed");

    let input = gen_dir.join("snapshots.bin");
    let run = |out: &std::path::Path| -> Result<(), String> {
        let status = std::process::Command::new(&exe)
            .args([
                "dmd",
                "--kernel",
                "laplace",
                "--true-count",
                "7",
                "--m-target",
                "14",
                "--seed",
                "3",
                "--top-k",
                "3",
                "--height",
                "8",
                "--width",
                "9",
                "--input",
            ])
            .arg(&input)
            .arg("--out-dir")
            .arg(out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(status.status.success(), "dmd subprocess failed");
        Ok(())
    };
    let run1 = dir.path().join("run1");
    let run2 = dir.path().join("run2");
    run(&run1)?;
    run(&run2)?;
    for file in [
        "eigenvalues.csv",
        "modes_re.csv",
        "modes_im.csv",
        "mode_1_re.pgm",
        "run_meta.txt",
    ] {
        let a = std::fs::read(run1.join(file)).map_err(|e| format!("{file}: {e}"))?;
        let b = std::fs::read(run2.join(file)).map_err(|e| format!("{file}: {e}"))?;
        ensure!(a == b, "{file} differs between identical runs");
    }
    Ok(())
}
