//! Unit-vector colorings in `R³` and the rank-3 kernels they induce.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coloring::discrete::{check_proper, id_map};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernel::GramFactor;
use crate::linalg::{cross3, dot3, norm3, normalize3, scale3, sin2_between, Vec3};

/// Allowed deviation of a vector-coloring entry from unit length.
pub const UNIT_TOL: f64 = 1e-6;

fn need_edges(graph: &Graph) -> Result<f64> {
    if graph.m() == 0 {
        return Err(Error::Degenerate("graph has no edges".into()));
    }
    Ok(graph.m() as f64)
}

/// Rank-3 factor of the kernel attached to a proper 3-coloring: vertex `u`
/// gets `sqrt(deg(u)/m)` times the basis vector of its color, edge nodes
/// get `sqrt(1/m)` times the basis vector of the color missing on the edge.
pub fn coloring_to_kernel(graph: &Graph, colors: &[u8]) -> Result<GramFactor> {
    let check = check_proper(graph, colors)?;
    if let Some(&e) = check.monochromatic.first() {
        let (u, v) = graph.edges()[e];
        return Err(Error::Validation(format!(
            "coloring is not proper: edge {e} = ({u}, {v}) is monochromatic"
        )));
    }
    let m = need_edges(graph)?;
    let n = graph.n();
    let mut q = nalgebra::DMatrix::zeros(3, n + graph.m());
    for v in 0..n {
        q[(colors[v] as usize - 1, v)] = (graph.degree(v) as f64 / m).sqrt();
    }
    let w = (1.0 / m).sqrt();
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        let third = 6 - colors[u] - colors[v];
        q[(third as usize - 1, n + e)] = w;
    }
    GramFactor::new(q)
}

/// `3 ln m - (1/m) Σ_{uv ∈ E} (ln deg u + ln deg v)`.
pub fn optimal_value(graph: &Graph) -> Result<f64> {
    let m = need_edges(graph)?;
    let s: f64 = graph
        .edges()
        .iter()
        .map(|&(u, v)| (graph.degree(u) as f64).ln() + (graph.degree(v) as f64).ln())
        .sum();
    Ok(3.0 * m.ln() - s / m)
}

fn check_unit(graph: &Graph, vectors: &[Vec3]) -> Result<()> {
    if vectors.len() != graph.n() {
        return Err(Error::Validation(format!(
            "vector coloring covers {} nodes but the graph has {}",
            vectors.len(),
            graph.n()
        )));
    }
    for (v, x) in vectors.iter().enumerate() {
        if (norm3(x) - 1.0).abs() > UNIT_TOL {
            return Err(Error::Validation(format!(
                "vector for node {v} has norm {}, expected 1",
                norm3(x)
            )));
        }
    }
    Ok(())
}

/// Mean of `⟨χ_u, χ_v⟩²` over edges.
pub fn vector_error(graph: &Graph, vectors: &[Vec3]) -> Result<f64> {
    check_unit(graph, vectors)?;
    let m = need_edges(graph)?;
    let s: f64 = graph
        .edges()
        .iter()
        .map(|&(u, v)| dot3(&vectors[u], &vectors[v]).powi(2))
        .sum();
    Ok(s / m)
}

/// Likelihood of the lifted dataset under [`assemble_factor`], from the
/// edge angles alone. `+inf` when some edge has parallel endpoints.
pub fn likelihood_from_angles(graph: &Graph, vectors: &[Vec3]) -> Result<f64> {
    check_unit(graph, vectors)?;
    let m = need_edges(graph)?;
    let mut s = 0.0;
    for &(u, v) in graph.edges() {
        let sin2 = sin2_between(&vectors[u], &vectors[v]);
        if sin2 == 0.0 {
            return Ok(f64::INFINITY);
        }
        s += (graph.degree(u) as f64).ln() + (graph.degree(v) as f64).ln() + sin2.ln();
    }
    Ok(3.0 * m.ln() - s / m)
}

/// Any unit vector orthogonal to `a`.
pub(crate) fn orthogonal_to(a: &Vec3) -> Vec3 {
    let pick = if a[0].abs() <= a[1].abs() && a[0].abs() <= a[2].abs() {
        [1.0, 0.0, 0.0]
    } else if a[1].abs() <= a[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    normalize3(&cross3(a, &pick)).unwrap_or([1.0, 0.0, 0.0])
}

/// Factor with vertex columns `sqrt(deg/m) χ_u` and edge columns
/// `sqrt(1/m)` times the unit normal of the edge's endpoint directions.
pub fn assemble_factor(graph: &Graph, vectors: &[Vec3]) -> Result<GramFactor> {
    check_unit(graph, vectors)?;
    let m = need_edges(graph)?;
    let n = graph.n();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n + graph.m());
    for (v, x) in vectors.iter().enumerate().take(n) {
        cols.push(scale3(x, (graph.degree(v) as f64 / m).sqrt()).to_vec());
    }
    for &(u, v) in graph.edges() {
        let normal = normalize3(&cross3(&vectors[u], &vectors[v]))
            .unwrap_or_else(|| orthogonal_to(&vectors[u]));
        cols.push(scale3(&normal, (1.0 / m).sqrt()).to_vec());
    }
    GramFactor::from_columns(3, &cols)
}

pub fn discrete_to_vectors(colors: &[u8]) -> Vec<Vec3> {
    colors
        .iter()
        .map(|&c| {
            let mut x = [0.0; 3];
            x[c as usize - 1] = 1.0;
            x
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct VectorsFile {
    vectors: BTreeMap<String, Vec3>,
}

pub fn vectors_from_json_str(text: &str) -> Result<Vec<Vec3>> {
    let f: VectorsFile = serde_json::from_str(text).map_err(Error::from_json)?;
    id_map(&f.vectors, "vector")
}

pub fn vectors_to_json_string(vectors: &[Vec3]) -> String {
    let f = VectorsFile {
        vectors: vectors
            .iter()
            .enumerate()
            .map(|(i, &x)| (i.to_string(), x))
            .collect(),
    };
    serde_json::to_string(&f).expect("vector serialization cannot fail")
}
