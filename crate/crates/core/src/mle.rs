//! Numerical maximum-likelihood search over `K = QᵀQ`, `σ₁(Q) ≤ 1`.
//!
//! Projected gradient descent with backtracking line search and random
//! restarts. Intended for small ground sets where it serves as an oracle.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{GramFactor, MarginalKernel};
use crate::linalg;
use crate::PROBABILITY_FLOOR;

/// Largest ground set `optimize` accepts.
pub const OPTIMIZE_LIMIT: usize = 12;
/// Largest ground set `verify_diagonal_theorem` accepts.
pub const DIAGONAL_CHECK_LIMIT: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerConfig {
    /// Rows of `Q`; `None` means `n`.
    pub rank: Option<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once an accepted step improves the objective by less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            rank: None,
            restarts: 20,
            max_iters: 5000,
            tol: 1e-12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartSummary {
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Gradient-mapping norm (unit step) at the final iterate.
    pub gradient_norm: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub factor: GramFactor,
    pub kernel: MarginalKernel,
    pub log_likelihood: f64,
    pub restarts: Vec<RestartSummary>,
    /// Samples whose `K - I_X̄` was singular at some gradient evaluation.
    pub singular_samples: Vec<usize>,
}

/// Euclidean projection onto `{Q : σ₁(Q) ≤ 1}` (singular values clipped).
pub fn clamp_spectral(q: &DMatrix<f64>) -> DMatrix<f64> {
    if linalg::spectral_norm(q) <= 1.0 {
        return q.clone();
    }
    let svd = q.clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let s = svd.singular_values.map(|x| x.min(1.0));
    u * DMatrix::from_diagonal(&s) * vt
}

fn shifted(q: &DMatrix<f64>, x: &[usize]) -> DMatrix<f64> {
    let mut m = linalg::gram(q);
    let n = m.nrows();
    let mut inside = vec![false; n];
    for &i in x {
        inside[i] = true;
    }
    for i in 0..n {
        if !inside[i] {
            m[(i, i)] -= 1.0;
        }
    }
    m
}

/// Objective with each sample's `-log p` capped at `-ln(1e-300)`.
pub fn floored_objective(q: &DMatrix<f64>, data: &Dataset) -> f64 {
    let cap = -PROBABILITY_FLOOR.ln();
    let total: f64 = data
        .samples()
        .iter()
        .map(|s| (-linalg::log_abs_det(&shifted(q, s))).min(cap))
        .sum();
    total / data.m() as f64
}

/// Gradient of `ℓ(QᵀQ)` in `Q`: `-(2/m) Σ_t Q (K - I_{X̄_t})^{-1}`.
/// Samples with singular `K - I_X̄` are skipped and reported.
pub fn gradient(q: &DMatrix<f64>, data: &Dataset) -> (DMatrix<f64>, Vec<usize>) {
    let n = q.ncols();
    let mut acc = DMatrix::zeros(n, n);
    let mut singular = Vec::new();
    for (t, s) in data.samples().iter().enumerate() {
        let m = shifted(q, s);
        if linalg::log_abs_det(&m) <= PROBABILITY_FLOOR.ln() {
            singular.push(t);
            continue;
        }
        match m.try_inverse() {
            Some(inv) => acc += inv,
            None => singular.push(t),
        }
    }
    (q * acc * (-2.0 / data.m() as f64), singular)
}

/// `‖(Q - Π(Q - t∇ℓ)) / t‖_F`, zero exactly at constrained stationary points.
pub fn projected_gradient_norm(q: &DMatrix<f64>, data: &Dataset, t: f64) -> f64 {
    let (g, _) = gradient(q, data);
    let next = clamp_spectral(&(q - &g * t));
    ((q - next) / t).norm()
}

struct Run {
    q: DMatrix<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn descend(
    mut q: DMatrix<f64>,
    data: &Dataset,
    cfg: &OptimizerConfig,
    singular: &mut Vec<usize>,
) -> Run {
    let mut f = floored_objective(&q, data);
    let mut step = 0.1;
    let mut converged = false;
    let mut it = 0;
    while it < cfg.max_iters {
        it += 1;
        let (g, sing) = gradient(&q, data);
        singular.extend(sing);
        let mut accepted = None;
        while step > 1e-16 {
            let cand = clamp_spectral(&(&q - &g * step));
            let fc = floored_objective(&cand, data);
            let decrease = g.dot(&(&q - &cand));
            if fc.is_finite() && fc <= f - 1e-4 * decrease {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            converged = true;
            break;
        };
        let gain = f - fc;
        q = cand;
        f = fc;
        if gain < cfg.tol {
            converged = true;
            break;
        }
        step = (step * 2.0).min(1e3);
    }
    Run {
        q,
        value: f,
        iterations: it,
        converged,
    }
}

pub fn optimize(data: &Dataset, cfg: &OptimizerConfig) -> Result<OptimizeResult> {
    let n = data.n();
    if n == 0 {
        return Err(Error::Degenerate("empty ground set".into()));
    }
    if n > OPTIMIZE_LIMIT {
        return Err(Error::SizeGuard(format!(
            "optimize needs n <= {OPTIMIZE_LIMIT}, got {n}"
        )));
    }
    let r = cfg.rank.unwrap_or(n);
    if r == 0 {
        return Err(Error::Parameter("rank must be positive".into()));
    }
    if cfg.restarts == 0 {
        return Err(Error::Parameter("at least one restart is needed".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bound = 1.0 / (n as f64).sqrt();
    let mut best: Option<(DMatrix<f64>, f64)> = None;
    let mut summaries = Vec::with_capacity(cfg.restarts);
    let mut singular = Vec::new();
    for _ in 0..cfg.restarts {
        let init = DMatrix::from_fn(r, n, |_, _| rng.gen_range(-bound..=bound));
        let run = descend(clamp_spectral(&init), data, cfg, &mut singular);
        let ll = GramFactor::new(run.q.clone())?.log_likelihood(data)?;
        summaries.push(RestartSummary {
            log_likelihood: ll,
            iterations: run.iterations,
            converged: run.converged,
            gradient_norm: projected_gradient_norm(&run.q, data, 1.0),
        });
        if best.as_ref().is_none_or(|(_, b)| run.value < *b) {
            best = Some((run.q, run.value));
        }
    }
    let (q, _) = best.expect("at least one restart ran");
    let factor = GramFactor::new(q)?;
    let kernel = factor.kernel()?;
    let ll = kernel.log_likelihood(data)?;
    singular.sort_unstable();
    singular.dedup();
    Ok(OptimizeResult {
        factor,
        kernel,
        log_likelihood: ll,
        restarts: summaries,
        singular_samples: singular,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagonalCheck {
    pub diagonal: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub max_deviation: f64,
    pub log_likelihood: f64,
    pub passed: bool,
}

/// Compares the optimizer's diagonal with the empirical frequencies `a_i/m`.
pub fn verify_diagonal_theorem(
    data: &Dataset,
    cfg: &OptimizerConfig,
    tol: f64,
) -> Result<DiagonalCheck> {
    if data.n() > DIAGONAL_CHECK_LIMIT {
        return Err(Error::SizeGuard(format!(
            "diagonal check needs n <= {DIAGONAL_CHECK_LIMIT}, got {}",
            data.n()
        )));
    }
    let res = optimize(data, cfg)?;
    let st = data.stats();
    let freq: Vec<f64> = st
        .frequencies
        .iter()
        .map(|&a| a as f64 / st.m as f64)
        .collect();
    let diag = res.kernel.diag();
    let dev = diag
        .iter()
        .zip(&freq)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(DiagonalCheck {
        diagonal: diag,
        frequencies: freq,
        max_deviation: dev,
        log_likelihood: res.log_likelihood,
        passed: dev <= tol,
    })
}

/// Best likelihood reached at each factor rank, for comparing ranks on a
/// lifted dataset.
pub fn likelihood_by_rank(
    data: &Dataset,
    ranks: &[usize],
    cfg: &OptimizerConfig,
) -> Result<Vec<(usize, f64)>> {
    ranks
        .iter()
        .map(|&r| {
            let c = OptimizerConfig {
                rank: Some(r),
                ..cfg.clone()
            };
            optimize(data, &c).map(|res| (r, res.log_likelihood))
        })
        .collect()
}
