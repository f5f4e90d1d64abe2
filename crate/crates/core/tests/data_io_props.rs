//! Serialization and generator contract checks: lossless round-trips,
//! valid image output, deterministic seeded generation, and spectral
//! ground truth of the synthetic oscillator field.

mod common;

use kedmd::data_io::{
    gen_linear_system, gen_oscillator_field, load_snapshots, save_matrix_csv, save_result,
    save_snapshots, FieldLayout, OscComponent, RunMeta, SnapshotFormat,
};
use kedmd::edmd::{kernel_edmd, SnapshotPairs};
use kedmd::kernels::KernelSpec;
use kedmd::linalg::DEFAULT_RTOL;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn finite_value() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        -1.0f64..1.0,
        Just(0.0),
        Just(-0.0),
        Just(1e-300),
        Just(-1e300),
        Just(f64::MIN_POSITIVE),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn binary_round_trip_preserves_bits(
        dims in (1usize..8, 1usize..8),
        seed_vals in prop::collection::vec(finite_value(), 64),
    ) {
        let (r, c) = dims;
        let m = DMatrix::from_fn(r, c, |i, j| seed_vals[(i * 13 + j * 29) % seed_vals.len()]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        save_snapshots(&path, &m).unwrap();
        let back = load_snapshots(&path, SnapshotFormat::Binary).unwrap();
        prop_assert_eq!(back.shape(), m.shape());
        for (a, b) in m.iter().zip(back.iter()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_round_trip_preserves_bits(
        dims in (1usize..6, 1usize..6),
        seed_vals in prop::collection::vec(finite_value(), 36),
    ) {
        let (r, c) = dims;
        let m = DMatrix::from_fn(r, c, |i, j| seed_vals[(i * 7 + j * 11) % seed_vals.len()]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        save_matrix_csv(&path, &m).unwrap();
        let back = load_snapshots(&path, SnapshotFormat::Csv).unwrap();
        prop_assert_eq!(back.shape(), m.shape());
        for (a, b) in m.iter().zip(back.iter()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn linear_generator_satisfies_the_recurrence(
        n in 1usize..5,
        m in 2usize..12,
        vals in prop::collection::vec(-1.0f64..1.0, 30),
    ) {
        let a = DMatrix::from_fn(n, n, |i, j| vals[(i * n + j) % vals.len()] * 0.6);
        let x0 = DVector::from_fn(n, |i, _| vals[(7 * i + 3) % vals.len()] + 0.1);
        let traj = gen_linear_system(&a, &x0, m).unwrap();
        prop_assert_eq!(traj.column(0), x0.column(0));
        for k in 0..m - 1 {
            let expected = &a * traj.column(k);
            for i in 0..n {
                prop_assert_eq!(expected[i].to_bits(), traj[(i, k + 1)].to_bits());
            }
        }
    }
}

#[test]
fn result_images_are_valid_p5() {
    let layout = FieldLayout {
        height: 6,
        width: 9,
    };
    let field = gen_oscillator_field(
        &layout,
        12,
        1.0,
        &[OscComponent {
            profile: 0,
            omega: std::f64::consts::PI / 6.0,
            rho: 0.97,
            amplitude: 1.0,
        }],
        0.005,
        3,
    )
    .unwrap();
    let pairs = SnapshotPairs::new(
        field.columns(0, 11).into_owned(),
        field.columns(1, 11).into_owned(),
    )
    .unwrap();
    let result = kernel_edmd(&pairs, &KernelSpec::laplace(1.0), DEFAULT_RTOL).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let meta = RunMeta {
        kernel: KernelSpec::laplace(1.0),
        seed: 3,
        rtol: DEFAULT_RTOL,
        m_true: 12,
        m_target: 12,
    };
    save_result(&result, Some(&layout), dir.path(), &meta).unwrap();

    for k in 1..=result.modes.ncols() {
        let bytes = std::fs::read(dir.path().join(format!("mode_{k}_re.pgm"))).unwrap();
        let header = format!("P5\n{} {}\n255\n", layout.width, layout.height);
        assert!(bytes.starts_with(header.as_bytes()), "bad header in mode_{k}_re.pgm");
        let pixels = &bytes[header.len()..];
        assert_eq!(pixels.len(), layout.height * layout.width);
        // Min-max scaling occupies the full 8-bit range unless constant.
        let lo = *pixels.iter().min().unwrap();
        let hi = *pixels.iter().max().unwrap();
        assert!((lo == 0 && hi == 255) || lo == hi);
    }
}

#[test]
fn oscillator_recovers_its_design_eigenvalues() {
    // Noiseless single component at (ω = π/8, ρ = 1): the independent
    // least-squares oracle must find e^{±iπ/8} exactly.
    let layout = FieldLayout {
        height: 6,
        width: 7,
    };
    let comp = OscComponent {
        profile: 0,
        omega: std::f64::consts::PI / 8.0,
        rho: 1.0,
        amplitude: 1.0,
    };
    let field = gen_oscillator_field(&layout, 40, 1.0, &[comp], 0.0, 11).unwrap();
    let x = field.columns(0, 39).into_owned();
    let y = field.columns(1, 39).into_owned();
    let oracle = common::exact_dmd_eigenvalues(&x, &y, 1e-10);
    let expected = [
        Complex64::from_polar(1.0, std::f64::consts::PI / 8.0),
        Complex64::from_polar(1.0, -std::f64::consts::PI / 8.0),
    ];
    common::assert_contains_eigs(&oracle, &expected, 1e-8);
}

#[test]
fn oscillator_two_component_spectrum_with_decay() {
    let layout = FieldLayout {
        height: 8,
        width: 10,
    };
    let comps = [
        OscComponent {
            profile: 0,
            omega: std::f64::consts::PI / 8.0,
            rho: 0.99,
            amplitude: 1.0,
        },
        OscComponent {
            profile: 2,
            omega: std::f64::consts::PI / 3.0,
            rho: 0.95,
            amplitude: 0.7,
        },
    ];
    let field = gen_oscillator_field(&layout, 50, 1.0, &comps, 0.0, 11).unwrap();
    let x = field.columns(0, 49).into_owned();
    let y = field.columns(1, 49).into_owned();
    let oracle = common::exact_dmd_eigenvalues(&x, &y, 1e-9);
    let expected = [
        Complex64::from_polar(0.99, std::f64::consts::PI / 8.0),
        Complex64::from_polar(0.99, -std::f64::consts::PI / 8.0),
        Complex64::from_polar(0.95, std::f64::consts::PI / 3.0),
        Complex64::from_polar(0.95, -std::f64::consts::PI / 3.0),
    ];
    common::assert_contains_eigs(&oracle, &expected, 1e-8);
}

#[test]
fn generators_are_deterministic_under_fixed_seeds() {
    let layout = FieldLayout {
        height: 5,
        width: 5,
    };
    let comp = OscComponent {
        profile: 3,
        omega: 0.7,
        rho: 0.9,
        amplitude: 1.2,
    };
    let a = gen_oscillator_field(&layout, 8, 0.5, &[comp], 0.02, 123).unwrap();
    let b = gen_oscillator_field(&layout, 8, 0.5, &[comp], 0.02, 123).unwrap();
    for (x, y) in a.iter().zip(b.iter()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}
