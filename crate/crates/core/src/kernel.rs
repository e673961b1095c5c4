//! Marginal kernels, L-ensembles and rank-`r` Gram factors.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::PROBABILITY_FLOOR;

/// Largest ground set `enumerate_distribution` will expand.
pub const ENUMERATION_LIMIT: usize = 20;

/// Eigenvalues must stay at least this far below 1 to form an L-ensemble.
pub const L_ENSEMBLE_MARGIN: f64 = 1e-9;

fn check_indices(n: usize, idx: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in idx {
        if i >= n {
            return Err(Error::Structural(format!(
                "index {i} out of range for ground set of size {n}"
            )));
        }
        if seen[i] {
            return Err(Error::Structural(format!("index {i} repeated")));
        }
        seen[i] = true;
    }
    Ok(())
}

fn complement_mask(n: usize, x: &[usize]) -> Vec<bool> {
    let mut in_x = vec![false; n];
    for &i in x {
        in_x[i] = true;
    }
    in_x
}

/// `-log p` for a log-probability, with the likelihood floor applied.
fn neg_log_floored(log_p: f64) -> f64 {
    if log_p <= PROBABILITY_FLOOR.ln() {
        f64::INFINITY
    } else {
        -log_p
    }
}

fn check_dataset(n: usize, data: &Dataset) -> Result<()> {
    if data.n() != n {
        return Err(Error::Structural(format!(
            "dataset ground set has size {} but the kernel has size {n}",
            data.n()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalKernel {
    matrix: DMatrix<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub tol: f64,
    pub symmetry_defect: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub eigenvalues: Vec<f64>,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct KernelFile {
    n: usize,
    matrix: Vec<Vec<f64>>,
}

impl MarginalKernel {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Structural(format!(
                "kernel is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if let Some(pos) = matrix.iter().position(|v| !v.is_finite()) {
            let n = matrix.nrows();
            return Err(Error::Structural(format!(
                "non-finite entry at ({}, {})",
                pos % n,
                pos / n
            )));
        }
        Ok(MarginalKernel { matrix })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Structural(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_matrix(DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(values),
        ))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: KernelFile = serde_json::from_str(text).map_err(Error::from_json)?;
        if file.matrix.len() != file.n {
            return Err(Error::Structural(format!(
                "declared n = {} but matrix has {} rows",
                file.n,
                file.matrix.len()
            )));
        }
        Self::from_rows(&file.matrix)
    }

    pub fn to_json_string(&self) -> String {
        let n = self.n();
        let file = KernelFile {
            n,
            matrix: (0..n)
                .map(|i| (0..n).map(|j| self.matrix[(i, j)]).collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("kernel serialization cannot fail")
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.matrix[(i, i)]).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::sym_eigenvalues(&self.matrix)
    }

    /// Checks exact symmetry and that the spectrum lies in `[-tol, 1 + tol]`.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let n = self.n();
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                defect = defect.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
        }
        let eigenvalues = self.eigenvalues();
        let min = eigenvalues.first().copied().unwrap_or(0.0);
        let max = eigenvalues.last().copied().unwrap_or(0.0);
        let mut failures = Vec::new();
        if defect != 0.0 {
            failures.push(format!("matrix is not symmetric (defect {defect:e})"));
        }
        if min < -tol {
            failures.push(format!("min eigenvalue {min} is below 0"));
        }
        if max > 1.0 + tol {
            failures.push(format!("max eigenvalue {max} exceeds 1"));
        }
        ValidationReport {
            n,
            tol,
            symmetry_defect: defect,
            min_eigenvalue: min,
            max_eigenvalue: max,
            eigenvalues,
            passed: failures.is_empty(),
            failures,
        }
    }

    /// `Pr[S ⊆ Y] = det(K_S)`.
    pub fn subset_marginal(&self, s: &[usize]) -> Result<f64> {
        check_indices(self.n(), s)?;
        Ok(linalg::det(&linalg::principal_submatrix(&self.matrix, s)))
    }

    /// `log Pr[Y = X] = log |det(K - I_{X̄})|`.
    pub fn log_point_probability(&self, x: &[usize]) -> Result<f64> {
        check_indices(self.n(), x)?;
        Ok(linalg::log_abs_det(&self.shifted(x)))
    }

    pub fn point_probability(&self, x: &[usize]) -> Result<f64> {
        check_indices(self.n(), x)?;
        Ok(linalg::det(&self.shifted(x)).abs())
    }

    /// `K - I_{X̄}`.
    fn shifted(&self, x: &[usize]) -> DMatrix<f64> {
        let in_x = complement_mask(self.n(), x);
        let mut m = self.matrix.clone();
        for (i, inside) in in_x.iter().enumerate() {
            if !inside {
                m[(i, i)] -= 1.0;
            }
        }
        m
    }

    /// Average negative log-probability of the samples; `+inf` once any
    /// sample has probability at or below the floor.
    pub fn log_likelihood(&self, data: &Dataset) -> Result<f64> {
        check_dataset(self.n(), data)?;
        let mut total = 0.0;
        for s in data.samples() {
            total += neg_log_floored(linalg::log_abs_det(&self.shifted(s)));
        }
        Ok(total / data.m() as f64)
    }

    /// `Pr[Y = X]` for every subset, indexed by bitmask (bit `i` = element `i`).
    pub fn enumerate_distribution(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if n > ENUMERATION_LIMIT {
            return Err(Error::SizeGuard(format!(
                "enumeration needs n <= {ENUMERATION_LIMIT}, got {n}"
            )));
        }
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0usize..(1 << n) {
            let x: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            out.push(linalg::det(&self.shifted(&x)).abs());
        }
        Ok(out)
    }

    /// `L = K (I - K)^{-1}`, computed in the eigenbasis of `K`.
    pub fn to_l_ensemble(&self) -> Result<EnsembleKernel> {
        let n = self.n();
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        if let Some(&bad) = eig
            .eigenvalues
            .iter()
            .filter(|&&l| l > 1.0 - L_ENSEMBLE_MARGIN)
            .max_by(|a, b| a.total_cmp(b))
        {
            return Err(Error::NotLEnsemble { eigenvalue: bad });
        }
        let mapped = eig.eigenvalues.map(|l| {
            let l = l.max(0.0);
            l / (1.0 - l)
        });
        let v = &eig.eigenvectors;
        let l = v * DMatrix::from_diagonal(&mapped) * v.transpose();
        let l = DMatrix::from_fn(n, n, |i, j| 0.5 * (l[(i, j)] + l[(j, i)]));
        Ok(EnsembleKernel { matrix: l })
    }
}

/// L-ensemble kernel: symmetric positive semidefinite, `Pr[Y = X] ∝ det(L_X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleKernel {
    matrix: DMatrix<f64>,
}

impl EnsembleKernel {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let k = MarginalKernel::from_matrix(matrix)?;
        Ok(EnsembleKernel { matrix: k.matrix })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `det(L_X) / det(I + L)`.
    pub fn point_probability(&self, x: &[usize]) -> Result<f64> {
        check_indices(self.n(), x)?;
        let num = linalg::det(&linalg::principal_submatrix(&self.matrix, x));
        let den = linalg::det(&(DMatrix::identity(self.n(), self.n()) + &self.matrix));
        Ok(num / den)
    }

    /// `K = L (I + L)^{-1}`.
    pub fn to_marginal(&self) -> Result<MarginalKernel> {
        let n = self.n();
        let eig = SymmetricEigen::new(self.matrix.clone());
        let mapped = eig.eigenvalues.map(|l| {
            let l = l.max(0.0);
            l / (1.0 + l)
        });
        let v = &eig.eigenvectors;
        let k = v * DMatrix::from_diagonal(&mapped) * v.transpose();
        MarginalKernel::from_matrix(DMatrix::from_fn(n, n, |i, j| 0.5 * (k[(i, j)] + k[(j, i)])))
    }
}

/// Kernel given as `K = QᵀQ` with `Q` of shape `rank × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramFactor {
    q: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct FactorFile {
    n: usize,
    rank: usize,
    columns: Vec<Vec<f64>>,
}

impl GramFactor {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::Structural("factor has non-finite entries".into()));
        }
        Ok(GramFactor { q })
    }

    pub fn from_columns(rank: usize, columns: &[Vec<f64>]) -> Result<Self> {
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != rank) {
            return Err(Error::Structural(format!(
                "column {i} has length {}, expected rank {rank}",
                c.len()
            )));
        }
        Self::new(DMatrix::from_fn(rank, columns.len(), |a, i| columns[i][a]))
    }

    /// `Q = diag(√λ) Vᵀ` over eigenvalues above `tol·max(1, λ_max)`.
    pub fn from_kernel(kernel: &MarginalKernel, tol: f64) -> Self {
        let n = kernel.n();
        let eig = nalgebra::SymmetricEigen::new(kernel.matrix().clone());
        let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..n)
            .filter(|&i| eig.eigenvalues[i] > tol * top.max(1.0))
            .collect();
        let q = DMatrix::from_fn(keep.len(), n, |a, j| {
            let i = keep[a];
            eig.eigenvalues[i].sqrt() * eig.eigenvectors[(j, i)]
        });
        GramFactor { q }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: FactorFile = serde_json::from_str(text).map_err(Error::from_json)?;
        if file.columns.len() != file.n {
            return Err(Error::Structural(format!(
                "declared n = {} but {} columns given",
                file.n,
                file.columns.len()
            )));
        }
        Self::from_columns(file.rank, &file.columns)
    }

    pub fn to_json_string(&self) -> String {
        let file = FactorFile {
            n: self.n(),
            rank: self.rank(),
            columns: (0..self.n()).map(|i| self.column(i)).collect(),
        };
        serde_json::to_string(&file).expect("factor serialization cannot fail")
    }

    pub fn n(&self) -> usize {
        self.q.ncols()
    }

    /// Number of rows of `Q` (an upper bound on the kernel rank).
    pub fn rank(&self) -> usize {
        self.q.nrows()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.q.column(i).iter().copied().collect()
    }

    pub fn column_norm_sq(&self, i: usize) -> f64 {
        self.q.column(i).norm_squared()
    }

    pub fn sigma_max(&self) -> f64 {
        linalg::spectral_norm(&self.q)
    }

    /// `QᵀQ` without any rescaling.
    pub fn kernel(&self) -> Result<MarginalKernel> {
        MarginalKernel::from_matrix(linalg::gram(&self.q))
    }

    /// `QᵀQ`, scaled by `1/σ₁(Q)²` when `clamp` is set and `σ₁(Q) > 1`.
    /// Returns the kernel and the scale applied.
    pub fn to_kernel(&self, clamp: bool) -> Result<(MarginalKernel, f64)> {
        let s = self.sigma_max();
        let scale = if clamp && s > 1.0 { 1.0 / (s * s) } else { 1.0 };
        let k = linalg::gram(&self.q) * scale;
        Ok((MarginalKernel::from_matrix(k)?, scale))
    }

    pub fn scaled(&self, factor: f64) -> GramFactor {
        GramFactor {
            q: &self.q * factor,
        }
    }

    /// `QQᵀ`, the `rank × rank` companion of the kernel.
    pub fn inner_gram(&self) -> DMatrix<f64> {
        &self.q * self.q.transpose()
    }

    /// `log Pr[Y = X]` in `O((r + |X|)³)` using the bordered form
    /// `|det(K - I_X̄)| = |det [[I - QQᵀ, Q_X], [Q_Xᵀ, 0]]|`.
    pub fn log_point_probability(&self, x: &[usize]) -> Result<f64> {
        check_indices(self.n(), x)?;
        Ok(self.log_point_probability_with(&self.inner_gram(), x))
    }

    fn log_point_probability_with(&self, qqt: &DMatrix<f64>, x: &[usize]) -> f64 {
        let r = self.rank();
        if x.len() > r {
            return f64::NEG_INFINITY;
        }
        let size = r + x.len();
        let mut m = DMatrix::zeros(size, size);
        for a in 0..r {
            for b in 0..r {
                m[(a, b)] = if a == b { 1.0 } else { 0.0 } - qqt[(a, b)];
            }
            for (c, &i) in x.iter().enumerate() {
                m[(a, r + c)] = self.q[(a, i)];
                m[(r + c, a)] = self.q[(a, i)];
            }
        }
        linalg::log_abs_det(&m)
    }

    /// Same quantity as [`MarginalKernel::log_likelihood`] on `QᵀQ`,
    /// without forming the `n × n` kernel.
    pub fn log_likelihood(&self, data: &Dataset) -> Result<f64> {
        check_dataset(self.n(), data)?;
        let qqt = self.inner_gram();
        let mut total = 0.0;
        for s in data.samples() {
            total += neg_log_floored(self.log_point_probability_with(&qqt, s));
        }
        Ok(total / data.m() as f64)
    }
}
