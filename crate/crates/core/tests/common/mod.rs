#![allow(dead_code)]

use dppmle::{Dataset, MarginalKernel};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Naive cofactor-expansion determinant, independent of the LU route.
pub fn cofactor_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    if n == 1 {
        return m[0][0];
    }
    let mut acc = 0.0;
    for j in 0..n {
        let minor: Vec<Vec<f64>> = m[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, &x)| x)
                    .collect()
            })
            .collect();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * m[0][j] * cofactor_det(&minor);
    }
    acc
}

pub fn sub(k: &MarginalKernel, idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter()
        .map(|&i| idx.iter().map(|&j| k.matrix()[(i, j)]).collect())
        .collect()
}

/// `Pr[Y = X]` by inclusion-exclusion over supersets of `X`.
pub fn inclusion_exclusion(k: &MarginalKernel, x: &[usize]) -> f64 {
    let n = k.n();
    let rest: Vec<usize> = (0..n).filter(|i| !x.contains(i)).collect();
    let mut total = 0.0;
    for mask in 0u32..(1 << rest.len()) {
        let mut t: Vec<usize> = x.to_vec();
        let mut extra = 0;
        for (b, &i) in rest.iter().enumerate() {
            if mask >> b & 1 == 1 {
                t.push(i);
                extra += 1;
            }
        }
        t.sort_unstable();
        let sign = if extra % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * cofactor_det(&sub(k, &t));
    }
    total
}

/// Random valid kernel `V diag(λ) Vᵀ` with spectrum in `[lo, hi]`.
pub fn random_kernel(n: usize, lo: f64, hi: f64, r: &mut ChaCha8Rng) -> MarginalKernel {
    let a = DMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
    let qr = a.qr();
    let v = qr.q();
    let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| r.gen_range(lo..=hi)));
    let k = &v * lam * v.transpose();
    let k = DMatrix::from_fn(n, n, |i, j| if i <= j { k[(i, j)] } else { k[(j, i)] });
    MarginalKernel::from_matrix(k).unwrap()
}

pub fn random_dataset(n: usize, m: usize, r: &mut ChaCha8Rng) -> Dataset {
    let samples = (0..m)
        .map(|_| (0..n).filter(|_| r.gen_bool(0.4)).collect())
        .collect();
    Dataset::new(n, samples).unwrap()
}

pub fn triangle_lift() -> Dataset {
    Dataset::new(6, vec![vec![0, 1, 3], vec![1, 2, 4], vec![0, 2, 5]]).unwrap()
}
pub mod cnf;
