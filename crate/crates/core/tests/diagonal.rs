mod common;

use approx::assert_relative_eq;
use common::*;
use dppmle::diagonal::*;
use dppmle::{Dataset, Error};
use proptest::prelude::*;

#[test]
fn two_singletons() {
    let d = Dataset::new(2, vec![vec![0], vec![1]]).unwrap();
    assert_eq!(diagonal_kernel(&d).diag(), vec![0.5, 0.5]);
    assert_relative_eq!(diag_log_likelihood(&d), 2.0 * 2f64.ln(), epsilon = 1e-12);
    assert_relative_eq!(hadamard_lower_bound(&d), 2f64.ln(), epsilon = 1e-12);
    let c = certificate(&d).unwrap();
    assert_relative_eq!(c.achieved_ratio, 2.0, epsilon = 1e-12);
    assert_relative_eq!(c.conditional_bound, 2.0, epsilon = 1e-12);
}

#[test]
fn triangle_lift_values() {
    let d = triangle_lift();
    // Oracle: brute-force likelihood of the diagonal kernel.
    let brute = diagonal_kernel(&d).log_likelihood(&d).unwrap();
    assert_relative_eq!(diag_log_likelihood(&d), brute, epsilon = 1e-12);
    assert_relative_eq!(brute, 4.0 * 1.5f64.ln() + 2.0 * 3f64.ln(), epsilon = 1e-12);
    let lb = 3.0 * 3f64.ln() - 2.0 * 2f64.ln();
    assert_relative_eq!(hadamard_lower_bound(&d), lb, epsilon = 1e-12);
    assert_relative_eq!(lb, 1.909543, epsilon = 1e-6);
    let c = certificate(&d).unwrap();
    assert_relative_eq!(c.achieved_ratio, 2.0, epsilon = 1e-12);
    assert_relative_eq!(
        c.conditional_bound,
        1.0 + ratio_function_f(2.0 / 3.0).unwrap(),
        epsilon = 1e-15
    );
    assert!(c.achieved_ratio <= c.conditional_bound);
}

#[test]
fn f_values() {
    assert_relative_eq!(ratio_function_f(0.5).unwrap(), 1.0, epsilon = 1e-15);
    assert_relative_eq!(ratio_function_f(0.1).unwrap(), 0.411817, epsilon = 1e-6);
    let small = ratio_function_f(1e-6).unwrap();
    assert!(small <= -1.0 / (1e-6f64).ln());
    assert!(ratio_function_f(1e-12).unwrap() < small);
    for x in [0.0, 1.0, -0.5, 2.0, f64::NAN] {
        assert!(matches!(ratio_function_f(x), Err(Error::Domain(_))));
    }
}

#[test]
fn f_monotone_and_bounded_on_grid() {
    let mut prev = 0.0;
    for i in 1..10_000 {
        let x = i as f64 / 10_000.0;
        let f = ratio_function_f(x).unwrap();
        assert!(f > prev, "not increasing at {x}");
        assert!(f <= -1.0 / x.ln() + 1e-12, "bound fails at {x}");
        prev = f;
    }
}

#[test]
fn degenerate_and_factoring() {
    let one = Dataset::new(2, vec![vec![0]]).unwrap();
    assert!(matches!(certificate(&one), Err(Error::Degenerate(_))));
    let d = Dataset::new(3, vec![vec![0, 1], vec![0, 2], vec![0]]).unwrap();
    let (reduced, removed) = factor_full_elements(&d);
    assert_eq!(removed, vec![0]);
    assert_eq!(reduced.n(), 2);
    assert!(reduced.stats().a_max < reduced.m());
    let c = certificate(&d).unwrap();
    assert_eq!(c.factored_elements, vec![0]);
    // Full-frequency elements contribute nothing to either likelihood.
    assert_relative_eq!(
        c.diag_log_likelihood,
        diag_log_likelihood(&d),
        epsilon = 1e-12
    );
}

#[test]
fn sparse_dataset_bound() {
    // a_max/m ≤ 1/n gives conditional bound ≤ 1 + 1/ln n.
    let n = 8;
    let samples = (0..n).map(|i| vec![i]).collect();
    let d = Dataset::new(n, samples).unwrap();
    let c = certificate(&d).unwrap();
    assert!(c.conditional_bound <= 1.0 + 1.0 / (n as f64).ln());
}

proptest! {
    #[test]
    fn ratio_within_bounds(seed in 0u64..100_000, n in 1usize..9, m in 2usize..13) {
        let mut r = rng(seed);
        let d = random_dataset(n, m, &mut r);
        let c = certificate(&d).unwrap();
        prop_assert!(c.achieved_ratio >= 1.0 - 1e-12);
        prop_assert!(c.achieved_ratio <= c.conditional_bound + 1e-9);
        prop_assert!(c.conditional_bound <= c.unconditional_bound + 1e-9);
        let lb = hadamard_lower_bound(&d);
        prop_assert!(diag_log_likelihood(&d) >= lb - 1e-12);
    }
}
