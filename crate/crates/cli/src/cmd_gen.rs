//! `kedmd gen` — write synthetic snapshot data.
//!
//! Two sources: `linear` iterates a user-given square matrix from an
//! initial state; `oscillator` renders a decaying two-component
//! oscillatory field on a pixel grid with seeded Gaussian pixel noise.
//! Output is always `<out-dir>/snapshots.bin` in the binary snapshot
//! format.

use std::f64::consts::PI;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};

use kedmd::data_io::{gen_linear_system, gen_oscillator_field, save_snapshots};
use kedmd::{FieldLayout, OscComponent};

use crate::config::{pick, Config};
use crate::pipeline::{run_err, AppError};
use crate::GenArgs;

/// Fixed composition of the oscillator surrogate: a slow bright mode and
/// a faster, weaker, quicker-decaying one.
fn oscillator_components() -> Vec<OscComponent> {
    vec![
        OscComponent {
            profile: 0,
            omega: PI / 8.0,
            rho: 0.99,
            amplitude: 1.0,
        },
        OscComponent {
            profile: 2,
            omega: PI / 3.0,
            rho: 0.95,
            amplitude: 0.7,
        },
    ]
}

fn parse_float_list(what: &str, raw: &str) -> Result<Vec<f64>, AppError> {
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|e| AppError::Usage(format!("{what}: cannot parse `{}`: {e}", part.trim())))
        })
        .collect()
}

pub fn run(args: GenArgs) -> Result<(), AppError> {
    let cfg = Config::load(args.config.as_deref())?;
    let system = pick(args.system, cfg.parsed("system"), "oscillator".into())?;
    let m = pick(args.m, cfg.parsed("m"), 60)?;
    let seed = pick(args.seed, cfg.parsed("seed"), 0)?;
    let out_dir = pick(args.out_dir, Ok(cfg.path("out-dir")), PathBuf::from("."))?;
    if m == 0 {
        return Err(AppError::Usage("m must be at least 1".into()));
    }

    let data = match system.as_str() {
        "linear" => {
            let a_raw = pick(args.a, cfg.parsed("a"), "0.9".into())?;
            let x0_raw = pick(args.x0, cfg.parsed("x0"), "1".into())?;
            let a_vals = parse_float_list("a", &a_raw)?;
            let x0_vals = parse_float_list("x0", &x0_raw)?;
            let n = x0_vals.len();
            if a_vals.len() != n * n {
                return Err(AppError::Usage(format!(
                    "a has {} entries but x0 has dimension {n}; need {n}x{n} = {}",
                    a_vals.len(),
                    n * n
                )));
            }
            let a = DMatrix::from_row_slice(n, n, &a_vals);
            let x0 = DVector::from_vec(x0_vals);
            gen_linear_system(&a, &x0, m).map_err(|e| run_err("linear system", e))?
        }
        "oscillator" => {
            let height = pick(args.height, cfg.parsed("height"), 40)?;
            let width = pick(args.width, cfg.parsed("width"), 50)?;
            let dt = pick(args.dt, cfg.parsed("dt"), 1.0)?;
            let noise = pick(args.noise, cfg.parsed("noise"), 0.01)?;
            if height == 0 || width == 0 {
                return Err(AppError::Usage("height and width must be at least 1".into()));
            }
            if !dt.is_finite() || !noise.is_finite() || noise < 0.0 {
                return Err(AppError::Usage(
                    "dt must be finite and noise must be finite and non-negative".into(),
                ));
            }
            let layout = FieldLayout { height, width };
            gen_oscillator_field(&layout, m, dt, &oscillator_components(), noise, seed)
                .map_err(|e| run_err("oscillator field", e))?
        }
        other => {
            return Err(AppError::Usage(format!(
                "system must be `linear` or `oscillator`, got `{other}`"
            )));
        }
    };

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| run_err(&format!("creating {}", out_dir.display()), e))?;
    let path = out_dir.join("snapshots.bin");
    save_snapshots(&path, &data).map_err(|e| run_err(&format!("writing {}", path.display()), e))?;
    println!(
        "wrote {}: {} x {} snapshots (system={system}, seed={seed})",
        path.display(),
        data.nrows(),
        data.ncols()
    );
    Ok(())
}
