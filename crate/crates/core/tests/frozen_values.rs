//! Values computed independently (brute-force enumeration with exact
//! fractions, 50-digit determinant and eigenvector roots) and frozen here.

use cvwit::ghzcert::{
    additional_r_cap, kappa_bisep, kappa_layout, threshold_for, witness_for_m, xi_layout_exact,
    SeparabilityClass,
};
use cvwit::model::GhzParams;
use cvwit::oracle::kappa_by_counting;
use num_bigint::BigInt;
use num_rational::BigRational;

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

#[test]
fn exact_kappa_values() {
    let cases: &[(usize, usize, &[usize], (i64, i64))] = &[
        (4, 2, &[1, 3], (1, 2)),
        (6, 3, &[4, 1, 1], (1, 3)),
        (7, 2, &[3, 4], (3, 7)),
        (8, 3, &[2, 3, 3], (2, 7)),
        (8, 1, &[5, 1, 1, 1], (-2, 7)),
    ];
    for &(n, m, sizes, (a, b)) in cases {
        let want = q(a, b);
        assert_eq!(kappa_by_counting(n, m, sizes).unwrap().kappa, want, "count {n} {m} {sizes:?}");
        let closed = q(1, 1) - xi_layout_exact(n, m, sizes).unwrap() * q(2, 1);
        assert_eq!(closed, want, "closed {n} {m} {sizes:?}");
        let f = kappa_layout(n, m, sizes).unwrap().value();
        assert!((f - a as f64 / b as f64).abs() < 1e-15);
    }
}

#[test]
fn first_block_rows_are_all_plus() {
    let c = kappa_by_counting(3, 1, &[1, 2]).unwrap();
    assert!(c.first_columns_positive);
}

fn bisep_witness(n: usize, m: usize, n0: usize) -> cvwit::ghzcert::WitnessChoice {
    let mut w = witness_for_m(n, m, SeparabilityClass::BISEPARABLE).unwrap();
    w.kappa = kappa_bisep(n, m, n0).unwrap();
    w.sizes = vec![n - n0, n0];
    w
}

#[test]
fn threshold_roots() {
    let cases = [
        (100, 6, 1, 0.999, 1e-4, 0.008_855_442_672_373_416_5),
        (10, 1, 9, 0.98, 0.01, 0.054_792_931_910_994_29),
        (1000, 10, 500, 0.9999, 0.0, 1.211_573_335_791_460_4),
    ];
    for (n, m, n0, eta, nn, want) in cases {
        let t = threshold_for(&bisep_witness(n, m, n0), eta, nn).unwrap();
        let lo = t.violation.unwrap().lo;
        assert!((lo - want).abs() < 1e-10 * want.max(1.0), "n={n}: {lo} vs {want}");
        assert!(t.eigen_consistent);
    }
}

#[test]
fn additional_condition_caps() {
    let cases = [
        (100, 6, 1, 0.999, 0.0, 0.731_627_496_064_865_6),
        (10_000, 13, 1, 0.99999, 1e-6, 1.408_773_929_503_403_2),
    ];
    for (n, m, n0, eta, nn, want) in cases {
        let k = kappa_bisep(n, m, n0).unwrap().value();
        let cap = additional_r_cap(|r| GhzParams::new(n, r, eta, nn).unwrap().cm(), m, k);
        assert!((cap - want).abs() < 1e-9, "n={n}: {cap} vs {want}");
    }
}
