//! Rounding a near-optimal kernel on a lifted graph dataset to rank 3.

use serde::Serialize;

use crate::coloring::vector::{optimal_value, orthogonal_to};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernel::GramFactor;
use crate::linalg::{self, cross3, dot3, normalize3, scale3, sin2_between, Vec3};

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionParams {
    /// Edges with `sin²θ` below this are bad.
    pub epsilon0: f64,
    /// Near-optimality slack used for the bad-column test; `None` uses the
    /// measured `ℓ(K) - ℓ*` (floored at 0).
    pub delta: Option<f64>,
    /// Require the measured slack to be at most `1/(128k)²`.
    pub guarantee: bool,
    /// Icosphere subdivision level of the seed grid (5 gives about 2°).
    pub seed_level: usize,
    pub refinements: usize,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams {
            epsilon0: 0.1,
            delta: None,
            guarantee: false,
            seed_level: 5,
            refinements: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnchorTriple {
    pub sample: usize,
    pub elements: Vec<usize>,
    /// `Pr[Y = S] / ∏_{i∈S} ‖q_i‖²`.
    pub ratio: f64,
}

fn numerical_rank(factor: &GramFactor) -> usize {
    let ev = linalg::sym_eigenvalues(&factor.inner_gram());
    let top = ev.last().copied().unwrap_or(0.0).max(0.0);
    if top == 0.0 {
        return 0;
    }
    ev.iter().filter(|&&l| l > top * 1e-18).count()
}

fn require_triples(data: &Dataset) -> Result<()> {
    if let Some(t) = data.samples().iter().position(|s| s.len() != 3) {
        return Err(Error::Precondition(format!(
            "sample {t} has {} elements; every sample must have exactly 3",
            data.samples()[t].len()
        )));
    }
    Ok(())
}

/// The sample maximizing `Pr[Y=S] / ∏‖q_i‖²`; ties go to the lowest index.
pub fn find_anchor_triple(factor: &GramFactor, data: &Dataset) -> Result<AnchorTriple> {
    require_triples(data)?;
    if factor.n() != data.n() {
        return Err(Error::Structural(format!(
            "factor has {} columns but the dataset ground set has {}",
            factor.n(),
            data.n()
        )));
    }
    let r = numerical_rank(factor);
    if r < 3 {
        return Err(Error::Precondition(format!(
            "factor has numerical rank {r}; an anchor triple needs rank at least 3"
        )));
    }
    let mut best: Option<(usize, f64)> = None;
    for (t, s) in data.samples().iter().enumerate() {
        let log_norms: f64 = s.iter().map(|&i| factor.column_norm_sq(i).ln()).sum();
        if !log_norms.is_finite() {
            continue;
        }
        let ratio = (factor.log_point_probability(s)? - log_norms).exp();
        if best.is_none_or(|(_, b)| ratio > b * (1.0 + 1e-12)) {
            best = Some((t, ratio));
        }
    }
    match best {
        Some((t, ratio)) if ratio > 0.0 => Ok(AnchorTriple {
            sample: t,
            elements: data.samples()[t].clone(),
            ratio,
        }),
        _ => Err(Error::Precondition(
            "anchor degeneracy: every sample has probability zero".into(),
        )),
    }
}

/// Orthonormal basis (length-`r` vectors) of the span of the anchor columns.
pub fn anchor_basis(factor: &GramFactor, anchor: &[usize]) -> Result<Vec<Vec<f64>>> {
    let cols: Vec<Vec<f64>> = anchor.iter().map(|&i| factor.column(i)).collect();
    let basis = linalg::orthonormal_basis(&cols, 1e-10);
    if basis.len() != 3 {
        return Err(Error::Precondition(format!(
            "anchor columns span dimension {}, expected 3",
            basis.len()
        )));
    }
    Ok(basis)
}

fn coords(factor: &GramFactor, basis: &[Vec<f64>], i: usize) -> Vec3 {
    let q = factor.column(i);
    let mut c = [0.0; 3];
    for (k, b) in basis.iter().enumerate().take(3) {
        c[k] = q.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    c
}

fn residual_of(factor: &GramFactor, basis: &[Vec<f64>], i: usize) -> f64 {
    let c = coords(factor, basis, i);
    (factor.column_norm_sq(i) - dot3(&c, &c)).max(0.0)
}

/// `Σ_{i∉S} ‖proj_{V⊥} q_i‖²` where `V` is spanned by the anchor columns.
pub fn residual_mass(factor: &GramFactor, anchor: &[usize]) -> Result<f64> {
    let basis = anchor_basis(factor, anchor)?;
    Ok((0..factor.n())
        .filter(|i| !anchor.contains(i))
        .map(|i| residual_of(factor, &basis, i))
        .sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct BadSets {
    pub bad_edges: Vec<usize>,
    /// Endpoints of bad edges.
    pub b1: Vec<usize>,
    /// Columns with large mass outside the anchor span.
    pub b2: Vec<usize>,
    /// `B1 ∪ B2`, sorted.
    pub bad: Vec<usize>,
    /// `δ m / ln 8 + 1`; reported only.
    pub bad_edge_bound: f64,
    /// `√δ m`; reported only.
    pub b2_bound: f64,
}

pub fn classify_bad(
    factor: &GramFactor,
    graph: &Graph,
    anchor: &[usize],
    delta: f64,
    epsilon0: f64,
) -> Result<BadSets> {
    if factor.n() != graph.n() + graph.m() {
        return Err(Error::Structural(format!(
            "factor has {} columns, expected |V| + |E| = {}",
            factor.n(),
            graph.n() + graph.m()
        )));
    }
    let basis = anchor_basis(factor, anchor)?;
    let mut bad_edges = Vec::new();
    let mut is_b1 = vec![false; graph.n()];
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        let (qu, qv) = (factor.column(u), factor.column(v));
        let nu: f64 = qu.iter().map(|x| x * x).sum();
        let nv: f64 = qv.iter().map(|x| x * x).sum();
        let c: f64 = qu.iter().zip(&qv).map(|(a, b)| a * b).sum();
        let sin2 = if nu == 0.0 || nv == 0.0 {
            0.0
        } else {
            (1.0 - c * c / (nu * nv)).max(0.0)
        };
        if sin2 < epsilon0 {
            bad_edges.push(e);
            is_b1[u] = true;
            is_b1[v] = true;
        }
    }
    let root = delta.max(0.0).sqrt();
    let b2: Vec<usize> = (0..factor.n())
        .filter(|&i| {
            let norm = factor.column_norm_sq(i);
            let res = residual_of(factor, &basis, i);
            res > 1e-12 * norm && res >= root * norm
        })
        .collect();
    let b1: Vec<usize> = (0..graph.n()).filter(|&v| is_b1[v]).collect();
    let mut bad: Vec<usize> = b1.iter().chain(&b2).copied().collect();
    bad.sort_unstable();
    bad.dedup();
    let m = graph.m() as f64;
    Ok(BadSets {
        bad_edges,
        b1,
        b2,
        bad,
        bad_edge_bound: delta.max(0.0) * m / 8f64.ln() + 1.0,
        b2_bound: root * m,
    })
}

/// Vertices of an icosahedron subdivided `level` times, on the unit sphere.
pub fn icosphere(level: usize) -> Vec<Vec3> {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ]
    .iter()
    .map(|v| normalize3(v).unwrap())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid = std::collections::HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let (x, y) = (verts[a], verts[b]);
                verts.push(normalize3(&[x[0] + y[0], x[1] + y[1], x[2] + y[2]]).unwrap());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    verts
}

/// `min_u sin²θ(u, y)` over unit directions `u`.
fn min_sin2(dirs: &[Vec3], y: &Vec3) -> f64 {
    dirs.iter()
        .map(|u| (1.0 - dot3(u, y).powi(2)).max(0.0))
        .fold(f64::INFINITY, f64::min)
}

/// Direction maximizing the smallest `sin²` angle to `dirs`: best points of
/// the seed grid, then `refinements` local passes at halving spacing, then
/// a local polish of the winner. Returns the direction and the value reached.
pub fn sphere_argmax(dirs: &[Vec3], seeds: &[Vec3], refinements: usize) -> (Vec3, f64) {
    if dirs.is_empty() {
        return ([1.0, 0.0, 0.0], 1.0);
    }
    let mut candidates: Vec<(f64, Vec3)> = seeds.iter().map(|y| (min_sin2(dirs, y), *y)).collect();
    // Exact optima for one or two constraints.
    let extra = if dirs.len() == 1 {
        Some(orthogonal_to(&dirs[0]))
    } else {
        normalize3(&cross3(&dirs[0], &dirs[1]))
    };
    if let Some(y) = extra {
        candidates.push((min_sin2(dirs, &y), y));
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    candidates.truncate(6);
    let spacing = if seeds.len() > 1 {
        // Typical nearest-neighbor distance on a near-uniform point set.
        (4.0 * std::f64::consts::PI / seeds.len() as f64).sqrt()
    } else {
        0.1
    };
    let mut best = candidates[0];
    for &(v0, y0) in &candidates {
        let (mut val, mut y) = (v0, y0);
        let mut h = spacing;
        for _ in 0..refinements {
            h /= 2.0;
            (val, y) = grid_step(dirs, y, val, h);
        }
        if val > best.0 {
            best = (val, y);
        }
    }
    // Polish the winner: re-center while improving, halve otherwise.
    let (mut val, mut y) = best;
    let mut h = spacing / 2f64.powi(refinements as i32);
    let mut steps = 0;
    while h > 1e-9 && steps < 400 {
        let (v, z) = grid_step(dirs, y, val, h);
        if v > val {
            (val, y) = (v, z);
        } else {
            h /= 2.0;
        }
        steps += 1;
    }
    (y, val)
}

/// Best point of a 7×7 tangent grid around `y`, or `y` itself.
fn grid_step(dirs: &[Vec3], y: Vec3, val: f64, h: f64) -> (f64, Vec3) {
    let e1 = orthogonal_to(&y);
    let e2 = cross3(&y, &e1);
    let (mut best, mut arg) = (val, y);
    for i in -3i32..=3 {
        for j in -3i32..=3 {
            let (a, b) = (i as f64 * h, j as f64 * h);
            let cand = normalize3(&[
                y[0] + a * e1[0] + b * e2[0],
                y[1] + a * e1[1] + b * e2[1],
                y[2] + a * e1[2] + b * e2[2],
            ])
            .unwrap();
            let v = min_sin2(dirs, &cand);
            if v > best {
                best = v;
                arg = cand;
            }
        }
    }
    (best, arg)
}

#[derive(Debug, Clone, Serialize)]
pub struct Reassignment {
    pub columns: Vec<Vec3>,
    /// Smallest `sin²` over edges touching a reassigned vertex.
    pub tau_hat: Option<f64>,
}

/// Good columns keep their anchor-span coordinates. Bad vertices, in index
/// order, take the direction farthest from their already placed neighbors
/// (good vertices and earlier bad ones), keeping their norm. Bad edge
/// columns become orthogonal to their endpoints, keeping their norm.
pub fn greedy_reassign(
    factor: &GramFactor,
    graph: &Graph,
    basis: &[Vec<f64>],
    bad: &[usize],
    seeds: &[Vec3],
    refinements: usize,
) -> Result<Reassignment> {
    let n = graph.n();
    let total = factor.n();
    let mut is_bad = vec![false; total];
    for &i in bad {
        is_bad[i] = true;
    }
    let mut cols: Vec<Vec3> = (0..total).map(|i| coords(factor, basis, i)).collect();
    let mut placed: Vec<bool> = (0..n).map(|v| !is_bad[v]).collect();
    for v in (0..n).filter(|&v| is_bad[v]) {
        let dirs: Vec<Vec3> = graph
            .neighbors(v)
            .iter()
            .filter(|&&w| placed[w])
            .filter_map(|&w| normalize3(&cols[w]))
            .collect();
        let (z, val) = if dirs.is_empty() {
            (normalize3(&cols[v]).unwrap_or([1.0, 0.0, 0.0]), 1.0)
        } else {
            sphere_argmax(&dirs, seeds, refinements)
        };
        if dirs.len() < 3 && val <= 0.0 {
            return Err(Error::Internal(format!(
                "sphere search for vertex {v} found no direction off {} neighbors",
                dirs.len()
            )));
        }
        cols[v] = scale3(&z, factor.column_norm_sq(v).sqrt());
        placed[v] = true;
    }
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        let i = n + e;
        if !is_bad[i] {
            continue;
        }
        let dir = normalize3(&cross3(&cols[u], &cols[v]))
            .or_else(|| normalize3(&cols[u]).map(|a| orthogonal_to(&a)))
            .unwrap_or([1.0, 0.0, 0.0]);
        cols[i] = scale3(&dir, factor.column_norm_sq(i).sqrt());
    }
    let tau_hat = graph
        .edges()
        .iter()
        .filter(|&&(u, v)| is_bad[u] || is_bad[v])
        .map(|&(u, v)| sin2_between(&cols[u], &cols[v]))
        .fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |a| a.min(x)))
        });
    Ok(Reassignment {
        columns: cols,
        tau_hat,
    })
}

/// Scales the factor by `√β` with `β = min(1, 1/σ₁²)`; spectral norms
/// within `1e-12` of 1 count as 1.
pub fn rescale_and_assemble(columns: &[Vec3]) -> Result<(GramFactor, f64)> {
    let cols: Vec<Vec<f64>> = columns.iter().map(|c| c.to_vec()).collect();
    let f = GramFactor::from_columns(3, &cols)?;
    let s2 = f.sigma_max().powi(2);
    let beta = if s2 <= 1.0 + 1e-12 { 1.0 } else { 1.0 / s2 };
    Ok((f.scaled(beta.sqrt()), beta))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionReport {
    pub input_likelihood: f64,
    pub output_likelihood: f64,
    pub optimal_value: f64,
    /// `ℓ(K) - ℓ*`.
    pub delta_hat: f64,
    pub delta_used: f64,
    pub numerical_rank: usize,
    pub early_exit: bool,
    pub anchor: Option<AnchorTriple>,
    pub residual_mass: f64,
    /// `-ln(anchor ratio)`, an upper bound on the residual mass.
    pub anchor_slack: f64,
    pub bad_sets: Option<BadSets>,
    pub beta: f64,
    pub tau_hat: Option<f64>,
    pub guarantee_mode: bool,
    /// `1/(128k)²` with `k` the maximum degree.
    pub guarantee_threshold: f64,
}

#[derive(Debug, Clone)]
pub struct Projection {
    /// `√β Q'`, shape `3 × N`.
    pub factor: GramFactor,
    pub beta: f64,
    pub report: ProjectionReport,
}

/// Rank-3 rounding of a kernel on the lifted dataset of `graph`.
pub fn project_to_rank3(
    factor: &GramFactor,
    data: &Dataset,
    graph: &Graph,
    params: &ProjectionParams,
) -> Result<Projection> {
    require_triples(data)?;
    if factor.n() != graph.n() + graph.m() || data.n() != factor.n() {
        return Err(Error::Structural(format!(
            "factor ({}), dataset ({}) and graph (|V|+|E| = {}) sizes disagree",
            factor.n(),
            data.n(),
            graph.n() + graph.m()
        )));
    }
    if factor.sigma_max() > 1.0 + 1e-9 {
        return Err(Error::Precondition(format!(
            "input kernel has largest eigenvalue {} > 1",
            factor.sigma_max().powi(2)
        )));
    }
    let input_ll = factor.log_likelihood(data)?;
    let opt = optimal_value(graph)?;
    let delta_hat = input_ll - opt;
    let k = graph.max_degree().max(1) as f64;
    let threshold = 1.0 / (128.0 * k).powi(2);
    if params.guarantee && delta_hat > threshold {
        return Err(Error::Precondition(format!(
            "guarantee mode needs ℓ(K) - ℓ* <= {threshold:e}, measured {delta_hat:e}"
        )));
    }
    let delta_used = params.delta.unwrap_or(delta_hat.max(0.0));
    let rank = numerical_rank(factor);

    let mut report = ProjectionReport {
        input_likelihood: input_ll,
        output_likelihood: f64::NAN,
        optimal_value: opt,
        delta_hat,
        delta_used,
        numerical_rank: rank,
        early_exit: rank <= 3,
        anchor: None,
        residual_mass: 0.0,
        anchor_slack: 0.0,
        bad_sets: None,
        beta: 1.0,
        tau_hat: None,
        guarantee_mode: params.guarantee,
        guarantee_threshold: threshold,
    };

    let columns: Vec<Vec3> = if rank <= 3 {
        let all: Vec<Vec<f64>> = (0..factor.n()).map(|i| factor.column(i)).collect();
        let basis = linalg::orthonormal_basis(&all, 1e-9);
        (0..factor.n()).map(|i| coords(factor, &basis, i)).collect()
    } else {
        let anchor = find_anchor_triple(factor, data)?;
        let basis = anchor_basis(factor, &anchor.elements)?;
        report.residual_mass = residual_mass(factor, &anchor.elements)?;
        report.anchor_slack = -anchor.ratio.ln();
        if params.guarantee && report.residual_mass > report.anchor_slack + 1e-9 {
            return Err(Error::Internal(format!(
                "residual mass {} exceeds the anchor bound {}",
                report.residual_mass, report.anchor_slack
            )));
        }
        let bad = classify_bad(factor, graph, &anchor.elements, delta_used, params.epsilon0)?;
        let seeds = icosphere(params.seed_level);
        let re = greedy_reassign(factor, graph, &basis, &bad.bad, &seeds, params.refinements)?;
        report.anchor = Some(anchor);
        report.bad_sets = Some(bad);
        report.tau_hat = re.tau_hat;
        re.columns
    };
    let (out, beta) = rescale_and_assemble(&columns)?;
    report.beta = beta;
    report.output_likelihood = out.log_likelihood(data)?;
    if report.output_likelihood < opt - 1e-9 {
        return Err(Error::Internal(format!(
            "projected likelihood {} is below the lower bound {opt}",
            report.output_likelihood
        )));
    }
    Ok(Projection {
        factor: out,
        beta,
        report,
    })
}
