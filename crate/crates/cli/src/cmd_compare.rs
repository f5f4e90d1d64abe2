//! `kedmd compare` — mode fidelity of padded runs against a full-data
//! baseline.
//!
//! For each genuine-column count `m₀` in `--m0` (default `3,7,20,55`,
//! always followed by the full column count) the input is truncated to its
//! first `m₀` columns, padded back to full width, and decomposed with both
//! the Laplace and the GRBF kernel. The top `--top-k` modes of every run
//! are matched against the full-data Laplace baseline by eigenvalue
//! proximity, and the absolute mode cosines go into
//! `<out-dir>/compare.csv` as `m0,kernel,mode_index,magnitude,similarity`
//! rows (`mode_index` is the 1-based baseline mode, `magnitude` the
//! matched run eigenvalue's modulus).
//!
//! The bandwidth is resolved once on the full data — explicit `--sigma`
//! verbatim, otherwise the median pairwise distance (entering the GRBF
//! exponent squared) — so every run sees the same kernel and similarity
//! differences come from the truncation alone.

use std::path::PathBuf;

use nalgebra::DVector;

use kedmd::edmd::mode_similarity;
use kedmd::linalg::DEFAULT_RTOL;

use crate::config::{pick, pick_opt, Config};
use crate::pipeline::{
    build_kernel, decompose, load_by_extension, parse_pad_mode, resolve_sigma, run_err, AppError,
    KernelChoice, SigmaSource,
};
use crate::CompareArgs;

/// Parse the comma-separated `--m0` list of genuine-column counts.
fn parse_m0_list(raw: &str) -> Result<Vec<usize>, AppError> {
    raw.split(',')
        .map(|part| {
            let part = part.trim();
            let value: usize = part
                .parse()
                .map_err(|_| AppError::Usage(format!("m0 entry `{part}` is not a count")))?;
            if value == 0 {
                return Err(AppError::Usage("m0 entries must be at least 1".into()));
            }
            Ok(value)
        })
        .collect()
}

pub fn run(args: CompareArgs) -> Result<(), AppError> {
    let cfg = Config::load(args.config.as_deref())?;
    let input = pick_opt(args.input, Ok(cfg.path("input")))?
        .ok_or_else(|| AppError::Usage("--input is required".into()))?;
    let seed = pick(args.seed, cfg.parsed("seed"), 0)?;
    let rtol = pick(args.rtol, cfg.parsed("rtol"), DEFAULT_RTOL)?;
    let top_k = pick(args.top_k, cfg.parsed("top-k"), 4)?;
    let pad_mode =
        parse_pad_mode(&pick(args.pad_mode, cfg.parsed("pad-mode"), "data_std".into())?)?;
    let out_dir = pick(args.out_dir, Ok(cfg.path("out-dir")), PathBuf::from("out"))?;
    let m0_raw = pick(args.m0, cfg.parsed("m0"), "3,7,20,55".to_string())?;
    let m0_list = parse_m0_list(&m0_raw)?;

    let data = load_by_extension(&input)?;
    let m_full = data.ncols();

    let sigma_explicit = pick_opt(args.sigma, cfg.parsed("sigma"))?;
    let sigma = resolve_sigma(sigma_explicit, &data, seed)?;
    if let SigmaSource::Heuristic(mu) = sigma {
        println!("bandwidth heuristic: median pairwise distance = {mu}");
    }
    let kernels = [
        ("laplace", build_kernel(KernelChoice::Laplace, Some(&sigma), None, 1, 1.0)?),
        ("grbf", build_kernel(KernelChoice::Grbf, Some(&sigma), None, 1, 1.0)?),
    ];

    // Truncated runs strictly below the full width, deduplicated and
    // ascending, with the full-data run always appended last.
    let mut runs: Vec<usize> = m0_list.into_iter().filter(|&v| v < m_full).collect();
    runs.sort_unstable();
    runs.dedup();
    runs.push(m_full);

    let baseline = decompose(&data, m_full, m_full, &kernels[0].1, pad_mode, seed, rtol)?;

    let mut csv = String::from("m0,kernel,mode_index,magnitude,similarity\n");
    println!(
        "{:>6}  {:>8}  {:>6}  {:>17}",
        "m0", "kernel", "modes", "mean similarity"
    );
    for (name, kernel) in &kernels {
        for &m0 in &runs {
            let result = decompose(&data, m0, m_full, kernel, pad_mode, seed, rtol)?;
            let k_eff = top_k.min(baseline.rank).min(result.rank);
            let take = |modes: &nalgebra::DMatrix<num_complex::Complex64>,
                        eigs: &DVector<num_complex::Complex64>| {
                (
                    modes.columns(0, k_eff).into_owned(),
                    DVector::from_iterator(k_eff, eigs.iter().take(k_eff).copied()),
                )
            };
            let (base_modes, base_eigs) = take(&baseline.modes, &baseline.eigenvalues);
            let (run_modes, run_eigs) = take(&result.modes, &result.eigenvalues);
            let matches = mode_similarity(&base_modes, &base_eigs, &run_modes, &run_eigs)
                .map_err(|e| run_err("mode matching", e))?;
            let mut total = 0.0;
            for mm in &matches {
                let magnitude = run_eigs[mm.index_b].norm();
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    m0,
                    name,
                    mm.index_a + 1,
                    magnitude,
                    mm.similarity
                ));
                total += mm.similarity;
            }
            let mean = if matches.is_empty() { 0.0 } else { total / matches.len() as f64 };
            println!("{m0:>6}  {name:>8}  {:>6}  {mean:>17.12}", matches.len());
        }
    }

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| run_err(&format!("creating {}", out_dir.display()), e))?;
    let report = out_dir.join("compare.csv");
    std::fs::write(&report, csv)
        .map_err(|e| run_err(&format!("writing {}", report.display()), e))?;
    println!("wrote {}", report.display());
    Ok(())
}
