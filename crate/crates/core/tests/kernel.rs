mod common;

use approx::assert_relative_eq;
use common::*;
use dppmle::kernel::GramFactor;
use dppmle::{Dataset, Error, MarginalKernel};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn k2(a: f64, b: f64, c: f64) -> MarginalKernel {
    MarginalKernel::from_rows(&[vec![a, b], vec![b, c]]).unwrap()
}

#[test]
fn validate_examples() {
    let ok = k2(0.5, 0.0, 0.5).validate(1e-9);
    assert!(ok.passed);
    assert_eq!(ok.eigenvalues, vec![0.5, 0.5]);
    let bad = MarginalKernel::from_rows(&[vec![1.2, 0.0], vec![0.0, 0.3]])
        .unwrap()
        .validate(1e-9);
    assert!(!bad.passed);
    assert_relative_eq!(bad.max_eigenvalue, 1.2, epsilon = 1e-12);
    let asym = MarginalKernel::from_rows(&[vec![0.5, 0.1], vec![0.0, 0.5]])
        .unwrap()
        .validate(1e-9);
    assert!(!asym.passed);
}

#[test]
fn structural_errors() {
    assert!(matches!(
        MarginalKernel::from_rows(&[vec![0.5, 0.0]]),
        Err(Error::Structural(_))
    ));
    assert!(matches!(
        MarginalKernel::from_rows(&[vec![f64::NAN]]),
        Err(Error::Structural(_))
    ));
}

#[test]
fn subset_marginal_examples() {
    let k = k2(0.5, 0.5, 0.5);
    assert_eq!(k.subset_marginal(&[]).unwrap(), 1.0);
    assert_relative_eq!(k.subset_marginal(&[0]).unwrap(), 0.5);
    assert_relative_eq!(k.subset_marginal(&[0, 1]).unwrap(), 0.0, epsilon = 1e-15);
    assert!(k.subset_marginal(&[2]).is_err());
}

#[test]
fn point_probability_examples() {
    let k = k2(0.5, -0.5, 0.5);
    assert_relative_eq!(k.point_probability(&[0]).unwrap(), 0.5, epsilon = 1e-15);
    assert_relative_eq!(k.point_probability(&[1]).unwrap(), 0.5, epsilon = 1e-15);
    assert_relative_eq!(k.point_probability(&[]).unwrap(), 0.0, epsilon = 1e-15);
    assert_relative_eq!(k.point_probability(&[0, 1]).unwrap(), 0.0, epsilon = 1e-15);
}

#[test]
fn likelihood_examples() {
    let d = Dataset::new(2, vec![vec![0], vec![1]]).unwrap();
    let k = k2(0.5, -0.5, 0.5);
    assert_relative_eq!(k.log_likelihood(&d).unwrap(), 2f64.ln(), epsilon = 1e-12);
    // Diagonal kernel gives each singleton probability 1/4.
    let kd = k2(0.5, 0.0, 0.5);
    assert_relative_eq!(kd.log_likelihood(&d).unwrap(), 4f64.ln(), epsilon = 1e-12);
    // Zero-probability sample gives +inf.
    let z = Dataset::new(2, vec![vec![0, 1]]).unwrap();
    assert_eq!(k.log_likelihood(&z).unwrap(), f64::INFINITY);
}

#[test]
fn enumeration_guard() {
    let k = MarginalKernel::diagonal(&[0.5; 21]).unwrap();
    assert!(matches!(
        k.enumerate_distribution(),
        Err(Error::SizeGuard(_))
    ));
}

#[test]
fn l_ensemble_examples() {
    let k = k2(0.5, 0.0, 0.5);
    let l = k.to_l_ensemble().unwrap();
    assert_relative_eq!(l.matrix()[(0, 0)], 1.0, epsilon = 1e-12);
    assert_relative_eq!(l.matrix()[(0, 1)], 0.0, epsilon = 1e-12);
    match k2(1.0, 0.0, 0.5).to_l_ensemble() {
        Err(Error::NotLEnsemble { eigenvalue }) => assert_relative_eq!(eigenvalue, 1.0),
        other => panic!("expected NotLEnsemble, got {other:?}"),
    }
}

#[test]
fn factor_to_kernel_clamps() {
    let f = GramFactor::from_columns(1, &[vec![1.0], vec![1.0]]).unwrap();
    let (k, scale) = f.to_kernel(true).unwrap();
    assert_relative_eq!(scale, 0.5, epsilon = 1e-12);
    assert_relative_eq!(k.matrix()[(0, 1)], 0.5, epsilon = 1e-12);
    assert!(k.validate(1e-9).passed);
    let (_, s1) = GramFactor::from_columns(1, &[vec![0.5], vec![0.5]])
        .unwrap()
        .to_kernel(true)
        .unwrap();
    assert_eq!(s1, 1.0);
}

#[test]
fn json_round_trip() {
    let k = k2(0.5, -0.25, 0.3);
    let back = MarginalKernel::from_json_str(&k.to_json_string()).unwrap();
    assert_eq!(back, k);
    let f =
        GramFactor::from_columns(2, &[vec![0.1, 0.2], vec![0.3, -0.4], vec![1e-17, 0.5]]).unwrap();
    assert_eq!(GramFactor::from_json_str(&f.to_json_string()).unwrap(), f);
    assert!(matches!(
        MarginalKernel::from_json_str("{\"n\":2,"),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn random_kernels_match_inclusion_exclusion() {
    let mut r = rng(1);
    for n in 1..=6 {
        let k = random_kernel(n, 0.0, 1.0, &mut r);
        let dist = k.enumerate_distribution().unwrap();
        let total: f64 = dist.iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        for mask in 0usize..(1 << n) {
            let x: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let ie = inclusion_exclusion(&k, &x);
            assert!((dist[mask] - ie).abs() < 1e-10, "n={n} mask={mask}");
        }
    }
}

#[test]
fn factor_likelihood_matches_dense() {
    let mut r = rng(2);
    for _ in 0..30 {
        use rand::Rng;
        let n = r.gen_range(2..9);
        let rank = r.gen_range(1..=n);
        let q = DMatrix::from_fn(rank, n, |_, _| r.gen_range(-1.0..1.0));
        let f = GramFactor::new(q).unwrap();
        let s = f.sigma_max();
        let f = f.scaled(0.95 / s);
        let d = random_dataset(n, 6, &mut r);
        let fast = f.log_likelihood(&d).unwrap();
        if d.samples().iter().any(|s| s.len() > rank) {
            // More points than the rank: probability exactly zero.
            assert_eq!(fast, f64::INFINITY);
            continue;
        }
        let dense = f.kernel().unwrap().log_likelihood(&d).unwrap();
        assert!(
            (dense - fast).abs() < 1e-8 * dense.abs().max(1.0),
            "{dense} vs {fast}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn l_ensemble_probabilities_agree(seed in 0u64..10_000, n in 1usize..6) {
        let mut r = rng(seed);
        let k = random_kernel(n, 0.05, 0.9, &mut r);
        let l = k.to_l_ensemble().unwrap();
        for mask in 0usize..(1 << n) {
            let x: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let a = k.point_probability(&x).unwrap();
            let b = l.point_probability(&x).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
        let back = l.to_marginal().unwrap();
        prop_assert!((back.matrix() - k.matrix()).abs().max() < 1e-9);
    }

    #[test]
    fn marginals_and_probabilities_bounded(seed in 0u64..10_000, n in 1usize..7) {
        let mut r = rng(seed);
        let k = random_kernel(n, 0.0, 1.0, &mut r);
        for mask in 0usize..(1 << n) {
            let x: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let p = k.point_probability(&x).unwrap();
            let s = k.subset_marginal(&x).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
            prop_assert!(s >= -1e-12 && s <= 1.0 + 1e-12);
            prop_assert!(p <= s + 1e-12);
        }
    }

    #[test]
    fn likelihood_is_nonnegative(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let k = random_kernel(5, 0.0, 1.0, &mut r);
        let d = random_dataset(5, 8, &mut r);
        prop_assert!(k.log_likelihood(&d).unwrap() >= -1e-12);
    }
}

#[test]
fn factor_from_kernel_reproduces_it() {
    let mut r = rng(31);
    let k = random_kernel(6, 0.0, 1.0, &mut r);
    let f = GramFactor::from_kernel(&k, 1e-12);
    assert_eq!(f.rank(), 6);
    assert!((dppmle::linalg::gram(f.q()) - k.matrix()).abs().max() < 1e-12);
    let low =
        GramFactor::from_columns(2, &[vec![1.0, 0.0], vec![0.0, 0.5], vec![0.3, 0.3]]).unwrap();
    let back = GramFactor::from_kernel(&low.kernel().unwrap(), 1e-12);
    assert_eq!(back.rank(), 2);
}
