//! `kedmd dmd` — one decomposition run.
//!
//! Loads a snapshot file, keeps the first `--true-count` genuine columns,
//! pads them to `--m-target` with seeded synthetic columns, runs the
//! kernelized decomposition, writes the result file set, and prints the
//! leading eigenvalues.

use std::path::PathBuf;

use kedmd::data_io::save_result;
use kedmd::{FieldLayout, RunMeta, DEFAULT_RTOL};

use crate::config::{pick, pick_opt, Config};
use crate::pipeline::{
    build_kernel, decompose, load_by_extension, parse_pad_mode, resolve_sigma, run_err, AppError,
    KernelChoice, SigmaSource,
};
use crate::DmdArgs;

/// Reject explicitly flagged parameters that do not apply to the chosen
/// kernel family (config-supplied values are defaults and are ignored
/// instead).
fn check_flag_applicability(args: &DmdArgs, choice: KernelChoice) -> Result<(), AppError> {
    match choice {
        KernelChoice::Laplace | KernelChoice::Grbf => {
            if args.alpha.is_some() || args.d.is_some() {
                return Err(AppError::Usage(
                    "--alpha and --d apply only to the polynomial kernel".into(),
                ));
            }
        }
        KernelChoice::Poly => {
            if args.gamma.is_some() || args.sigma.is_some() {
                return Err(AppError::Usage(
                    "--gamma and --sigma do not apply to the polynomial kernel".into(),
                ));
            }
        }
        KernelChoice::LaplaceRk => {
            if args.gamma.is_some() || args.alpha.is_some() || args.d.is_some() {
                return Err(AppError::Usage(
                    "--gamma, --alpha, and --d do not apply to the laplace-rk kernel".into(),
                ));
            }
        }
    }
    Ok(())
}

pub fn run(args: DmdArgs) -> Result<(), AppError> {
    let cfg = Config::load(args.config.as_deref())?;
    let kernel_name = pick(args.kernel.clone(), cfg.parsed("kernel"), "laplace".into())?;
    let choice = KernelChoice::parse(&kernel_name)?;
    check_flag_applicability(&args, choice)?;
    if let (Some(t), Some(target)) = (args.true_count, args.m_target) {
        if target < t {
            return Err(AppError::Usage(format!(
                "m-target {target} is smaller than true-count {t}"
            )));
        }
    }

    let input = pick_opt(args.input, Ok(cfg.path("input")))?
        .ok_or_else(|| AppError::Usage("--input is required".into()))?;
    let seed = pick(args.seed, cfg.parsed("seed"), 0)?;
    let rtol = pick(args.rtol, cfg.parsed("rtol"), DEFAULT_RTOL)?;
    let top_k = pick(args.top_k, cfg.parsed("top-k"), 4)?;
    let pad_mode = parse_pad_mode(&pick(args.pad_mode, cfg.parsed("pad-mode"), "data_std".into())?)?;
    let out_dir = pick(args.out_dir, Ok(cfg.path("out-dir")), PathBuf::from("out"))?;

    let height = pick_opt(args.height, cfg.parsed("height"))?;
    let width = pick_opt(args.width, cfg.parsed("width"))?;
    let layout = match (height, width) {
        (Some(height), Some(width)) => Some(FieldLayout { height, width }),
        (None, None) => None,
        _ => {
            return Err(AppError::Usage(
                "--height and --width must be given together".into(),
            ));
        }
    };

    let data = load_by_extension(&input)?;
    let m_true = pick(args.true_count, cfg.parsed("true-count"), data.ncols())?;
    if m_true == 0 {
        return Err(AppError::Usage("true-count must be at least 1".into()));
    }
    if m_true > data.ncols() {
        return Err(AppError::Run(format!(
            "true-count {m_true} exceeds the {} available columns",
            data.ncols()
        )));
    }
    let m_target = pick(args.m_target, cfg.parsed("m-target"), m_true)?;

    let kernel = match choice {
        KernelChoice::Poly => {
            let alpha = pick(args.alpha, cfg.parsed("alpha"), 1)?;
            let d = pick(args.d, cfg.parsed("d"), 1.0)?;
            build_kernel(choice, None, None, alpha, d)?
        }
        _ => {
            let explicit = pick_opt(args.sigma, cfg.parsed("sigma"))?;
            let genuine = data.columns(0, m_true).into_owned();
            let sigma = resolve_sigma(explicit, &genuine, seed)?;
            if let SigmaSource::Heuristic(mu) = sigma {
                println!("bandwidth heuristic: median pairwise distance = {mu}");
            }
            let gamma = pick_opt(args.gamma, cfg.parsed("gamma"))?;
            build_kernel(choice, Some(&sigma), gamma, 1, 1.0)?
        }
    };

    let result = decompose(&data, m_true, m_target, &kernel, pad_mode, seed, rtol)?;
    let meta = RunMeta {
        kernel: kernel.clone(),
        seed,
        rtol,
        m_true,
        m_target,
    };
    save_result(&result, layout.as_ref(), &out_dir, &meta)
        .map_err(|e| run_err(&format!("writing {}", out_dir.display()), e))?;

    println!(
        "decomposed {} x {} data (kernel={}, true columns {m_true}, padded to {m_target}, rank {})",
        data.nrows(),
        data.ncols(),
        kernel.name(),
        result.rank
    );
    let shown = top_k.min(result.rank);
    if shown > 0 {
        println!("top {shown} eigenvalues:");
        println!("{:>5}  {:>23}  {:>23}  {:>22}", "index", "re", "im", "magnitude");
        for i in 0..shown {
            let l = result.eigenvalues[i];
            println!("{:>5}  {:>+23.15e}  {:>+23.15e}  {:>22.15e}", i + 1, l.re, l.im, l.norm());
        }
    }
    println!("wrote {}", out_dir.display());
    Ok(())
}
