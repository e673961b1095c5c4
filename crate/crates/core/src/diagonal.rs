//! Diagonal kernel estimate and its approximation certificate.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::MarginalKernel;

/// `x ln x` with the continuous extension `0 ln 0 = 0`.
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Kernel with `K_ii = a_i / m` and zero off-diagonal.
pub fn diagonal_kernel(data: &Dataset) -> MarginalKernel {
    let st = data.stats();
    let m = st.m as f64;
    let d: Vec<f64> = st.frequencies.iter().map(|&a| a as f64 / m).collect();
    MarginalKernel::diagonal(&d).expect("frequencies are finite")
}

/// Closed-form likelihood of [`diagonal_kernel`].
pub fn diag_log_likelihood(data: &Dataset) -> f64 {
    let st = data.stats();
    let m = st.m as f64;
    let mut acc = 0.0;
    for &a in &st.frequencies {
        let p = a as f64 / m;
        acc += xlogx(p) + xlogx(1.0 - p);
    }
    -acc
}

/// Lower bound on the optimal likelihood from Hadamard's inequality.
pub fn hadamard_lower_bound(data: &Dataset) -> f64 {
    let st = data.stats();
    let m = st.m as f64;
    -st.frequencies
        .iter()
        .map(|&a| xlogx(a as f64 / m))
        .sum::<f64>()
}

/// `f(x) = (1-x) ln(1-x) / (x ln x)` on the open interval `(0, 1)`.
pub fn ratio_function_f(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("f is defined on (0, 1), got {x}")));
    }
    Ok((1.0 - x) * (1.0 - x).ln() / (x * x.ln()))
}

/// Removes elements present in every sample; returns the reduced dataset
/// and the removed indices (0-based, in the original numbering).
pub fn factor_full_elements(data: &Dataset) -> (Dataset, Vec<usize>) {
    let full = data.stats().full_frequency;
    (data.without_elements(&full), full)
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub m: usize,
    pub factored_elements: Vec<usize>,
    pub a_max: usize,
    pub diag_log_likelihood: f64,
    pub lower_bound: f64,
    /// `ℓ_diag / ℓ_LB`, taken as 1 when both vanish.
    pub achieved_ratio: f64,
    /// `1 + f(a_max / m)`.
    pub conditional_bound: f64,
    /// `1 + (1 + 1/(m-1)) ln m`.
    pub unconditional_bound: f64,
}

pub fn certificate(data: &Dataset) -> Result<Certificate> {
    let m = data.m();
    if m < 2 {
        return Err(Error::Degenerate(
            "a single sample is fit exactly by a 0/1 diagonal kernel".into(),
        ));
    }
    let (reduced, removed) = factor_full_elements(data);
    let st = reduced.stats();
    let diag = diag_log_likelihood(&reduced);
    let lb = hadamard_lower_bound(&reduced);
    let mf = m as f64;
    let x = st.a_max as f64 / mf;
    let conditional_bound = if st.a_max == 0 {
        1.0
    } else {
        1.0 + ratio_function_f(x)?
    };
    let achieved_ratio = if lb == 0.0 { 1.0 } else { diag / lb };
    Ok(Certificate {
        m,
        factored_elements: removed,
        a_max: st.a_max,
        diag_log_likelihood: diag,
        lower_bound: lb,
        achieved_ratio,
        conditional_bound,
        unconditional_bound: 1.0 + (1.0 + 1.0 / (mf - 1.0)) * mf.ln(),
    })
}
