//! Random `d`-regular expanders.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;

pub const DEFAULT_MAX_RETRIES: usize = 200;

/// Allowed excess of the second adjacency eigenvalue over `2√(d-1)`.
pub const SPECTRAL_SLACK: f64 = 0.5;

#[derive(Debug, Clone, Serialize)]
pub struct DensityAudit {
    /// Worst average internal degree over sampled sets of size about n/10.
    pub small_set_avg_degree: f64,
    pub small_set_threshold: f64,
    /// Worst average internal degree over sampled sets of size about n/2.
    pub half_set_avg_degree: f64,
    pub half_set_threshold: f64,
}

#[derive(Debug, Clone)]
pub struct Expander {
    pub graph: Graph,
    pub d: usize,
    pub seed: u64,
    /// Generation attempts used (0 when loaded from a file).
    pub attempts: usize,
    /// Second-largest adjacency eigenvalue.
    pub lambda2: f64,
    pub spectral_bound: f64,
    pub density: DensityAudit,
}

impl Expander {
    /// Wraps an existing `d`-regular graph and recomputes the audits.
    pub fn from_graph(graph: Graph, d: usize, seed: u64) -> Result<Self> {
        if let Some(v) = (0..graph.n()).find(|&v| graph.degree(v) != d) {
            return Err(Error::Validation(format!(
                "expander vertex {v} has degree {}, expected {d}",
                graph.degree(v)
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_a0d1);
        let density = density_audit(&graph, d, &mut rng);
        Ok(Expander {
            lambda2: second_eigenvalue(&graph),
            spectral_bound: spectral_bound(d),
            density,
            graph,
            d,
            seed,
            attempts: 0,
        })
    }

    pub fn count(&self) -> usize {
        self.graph.n()
    }
}

pub fn spectral_bound(d: usize) -> f64 {
    2.0 * ((d as f64) - 1.0).max(0.0).sqrt() + SPECTRAL_SLACK
}

fn second_eigenvalue(g: &Graph) -> f64 {
    let n = g.n();
    if n < 2 {
        return 0.0;
    }
    let mut a = DMatrix::zeros(n, n);
    for &(u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let ev = linalg::sym_eigenvalues(&a);
    ev[n - 2]
}

fn density_audit(g: &Graph, d: usize, rng: &mut ChaCha8Rng) -> DensityAudit {
    let n = g.n();
    let mut worst = |size: usize| -> f64 {
        let size = size.clamp(1, n);
        let mut verts: Vec<usize> = (0..n).collect();
        let mut best: f64 = 0.0;
        for _ in 0..32 {
            verts.shuffle(rng);
            let mut inside = vec![false; n];
            for &v in &verts[..size] {
                inside[v] = true;
            }
            let internal = g
                .edges()
                .iter()
                .filter(|&&(u, v)| inside[u] && inside[v])
                .count();
            best = best.max(2.0 * internal as f64 / size as f64);
        }
        best
    };
    DensityAudit {
        small_set_avg_degree: worst(n / 10),
        small_set_threshold: d as f64 / 6.0,
        half_set_avg_degree: worst(n / 2),
        half_set_threshold: 2.0 * d as f64 / 3.0,
    }
}

/// One pairing attempt: stubs are paired at random, pairs that would form
/// a loop or a repeated edge go back into the pool, and the attempt fails
/// when no usable pair remains.
fn try_pairing(count: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<BTreeSet<(usize, usize)>> {
    let mut edges = BTreeSet::new();
    let mut stubs: Vec<usize> = (0..count).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    while !stubs.is_empty() {
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && !edges.contains(&(a, b)) {
                edges.insert((a, b));
            } else {
                *leftover.entry(a).or_insert(0) += 1;
                *leftover.entry(b).or_insert(0) += 1;
            }
        }
        let nodes: Vec<usize> = leftover.keys().copied().collect();
        let usable = nodes
            .iter()
            .enumerate()
            .any(|(i, &a)| nodes[i + 1..].iter().any(|&b| !edges.contains(&(a, b))));
        if !leftover.is_empty() && !usable {
            return None;
        }
        stubs = leftover
            .into_iter()
            .flat_map(|(v, c)| std::iter::repeat_n(v, c))
            .collect();
    }
    Some(edges)
}

/// Samples a connected simple `d`-regular graph on `count` vertices whose
/// second adjacency eigenvalue is at most `2√(d-1) + 0.5`, retrying up to
/// `max_retries` times. Deterministic in `seed`.
pub fn build_expander(count: usize, d: usize, seed: u64, max_retries: usize) -> Result<Expander> {
    if d == 0 {
        return Err(Error::Parameter("degree must be positive".into()));
    }
    if count <= d {
        return Err(Error::Parameter(format!(
            "a simple {d}-regular graph needs more than {d} vertices, got {count}"
        )));
    }
    if (count * d) % 2 == 1 {
        return Err(Error::Parameter(format!(
            "count * d = {} is odd, so no {d}-regular graph on {count} vertices exists",
            count * d
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = spectral_bound(d);
    let mut best_lambda = f64::INFINITY;
    for attempt in 1..=max_retries.max(1) {
        let Some(edges) = try_pairing(count, d, &mut rng) else {
            continue;
        };
        let graph = Graph::new(count, edges.into_iter().collect())?;
        if !graph.is_connected() {
            continue;
        }
        let lambda2 = second_eigenvalue(&graph);
        best_lambda = best_lambda.min(lambda2);
        if lambda2 > bound {
            continue;
        }
        let audit_seed = rng.gen::<u64>();
        let density = density_audit(&graph, d, &mut ChaCha8Rng::seed_from_u64(audit_seed));
        return Ok(Expander {
            graph,
            d,
            seed,
            attempts: attempt,
            lambda2,
            spectral_bound: bound,
            density,
        });
    }
    Err(Error::ExpanderQuality(format!(
        "no connected {d}-regular graph on {count} vertices with second eigenvalue <= {bound:.4} \
         in {max_retries} attempts (best {best_lambda:.4})"
    )))
}
