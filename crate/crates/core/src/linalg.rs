//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};

pub type Vec3 = [f64; 3];

/// `log |det(m)|` by LU with partial pivoting; `-inf` for a singular matrix.
/// The empty matrix has determinant 1.
pub fn log_abs_det(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let lu = m.clone().lu();
    let u = lu.u();
    let mut acc = 0.0;
    for i in 0..u.nrows() {
        let d = u[(i, i)].abs();
        if d == 0.0 || !d.is_finite() {
            return f64::NEG_INFINITY;
        }
        acc += d.ln();
    }
    acc
}

pub fn det(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

pub fn principal_submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `QᵀQ` with the upper triangle mirrored so the result is exactly symmetric.
pub fn gram(q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.ncols();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = q.column(i).dot(&q.column(j));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Largest singular value of `q`.
pub fn spectral_norm(q: &DMatrix<f64>) -> f64 {
    if q.nrows() == 0 || q.ncols() == 0 {
        return 0.0;
    }
    let small = if q.nrows() <= q.ncols() {
        q * q.transpose()
    } else {
        q.transpose() * q
    };
    sym_eigenvalues(&small)
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn cross3(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn scale3(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Unit vector along `a`, or `None` when `a` is (numerically) zero.
pub fn normalize3(a: &Vec3) -> Option<Vec3> {
    let n = norm3(a);
    if n <= 1e-300 || !n.is_finite() {
        None
    } else {
        Some(scale3(a, 1.0 / n))
    }
}

/// `sin²` of the angle between two nonzero vectors.
pub fn sin2_between(a: &Vec3, b: &Vec3) -> f64 {
    let na = dot3(a, a);
    let nb = dot3(b, b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let c = dot3(a, b);
    (1.0 - c * c / (na * nb)).clamp(0.0, 1.0)
}

/// Angle between two lines through the origin, in `[0, π/2]`.
pub fn line_angle(a: &Vec3, b: &Vec3) -> f64 {
    let na = norm3(a);
    let nb = norm3(b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot3(a, b).abs() / (na * nb)).clamp(0.0, 1.0).acos()
}

/// Orthonormal basis (as columns) of the span of the given columns, by
/// modified Gram-Schmidt. Columns whose residual falls below `tol` relative
/// to their norm are dropped.
pub fn orthonormal_basis(cols: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for c in cols {
        let norm0 = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = c.clone();
        for _ in 0..2 {
            for b in &basis {
                let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > tol * norm0 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}
