//! Shared test oracles. These deliberately avoid the library's own
//! spectral code paths: least-squares fits go through nalgebra's SVD and
//! eigenvalues through nalgebra's Schur-based solver, so agreement is a
//! genuine cross-check rather than self-confirmation.
//!
//! Each integration-test target compiles this module independently and
//! uses a different subset of the helpers, so unused-function lints are
//! silenced at module level.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Exact-DMD oracle: fit the best linear map Y ≈ A·X through the reduced
/// SVD of X and return the eigenvalues of the projected operator
/// Ã = UᵀYVΣ⁻¹, sorted by magnitude descending.
pub fn exact_dmd_eigenvalues(x: &DMatrix<f64>, y: &DMatrix<f64>, rank_tol: f64) -> Vec<Complex64> {
    let svd = nalgebra::SVD::new(x.clone(), true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let s = svd.singular_values;
    let s_max = s.iter().copied().fold(0.0f64, f64::max);
    let r = s.iter().filter(|&&v| v > rank_tol * s_max).count();
    assert!(r > 0, "oracle needs a nonzero data matrix");
    let u_r = u.columns(0, r);
    let v_r = v_t.rows(0, r).transpose();
    let mut a_tilde = u_r.transpose() * y * v_r;
    for j in 0..r {
        for i in 0..r {
            a_tilde[(i, j)] /= s[j];
        }
    }
    let mut values: Vec<Complex64> = a_tilde.complex_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    values
}

/// Assert every `want` value appears among `got` (each matched at most
/// once), within `tol·max(1, |want|)` per value.
pub fn assert_contains_eigs(got: &[Complex64], want: &[Complex64], tol: f64) {
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
        let (i, d) = best.unwrap_or_else(|| panic!("no candidate left for eigenvalue {w}"));
        assert!(
            d <= tol * w.norm().max(1.0),
            "eigenvalue {w} unmatched: nearest candidate {} at distance {d:.3e}",
            got[i]
        );
        used[i] = true;
    }
}

/// Assert two eigenvalue multisets are equal within `tol` per value,
/// after greedily pairing nearest values.
pub fn assert_eigs_match(a: &[Complex64], b: &[Complex64], tol: f64) {
    assert_eq!(
        a.len(),
        b.len(),
        "multiset sizes differ: {} vs {}",
        a.len(),
        b.len()
    );
    assert_contains_eigs(b, a, tol);
}
