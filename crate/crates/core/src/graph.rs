//! Simple undirected graphs.

use std::collections::{HashMap, VecDeque};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Rejects self-loops, repeated edges and out-of-range endpoints.
    /// Edge order is preserved.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashMap::with_capacity(edges.len());
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::Structural(format!(
                    "edge {e} = ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::Structural(format!("edge {e} is a self-loop at {u}")));
            }
            if let Some(prev) = seen.insert((u.min(v), u.max(v)), e) {
                return Err(Error::Structural(format!(
                    "edges {prev} and {e} both join {u} and {v}"
                )));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(Graph { n, edges, adj })
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        Graph::new(n, edges).expect("complete graph is simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a].contains(&b)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Ground set `V ∪ E` (vertices first, then edges in order); one
    /// sample `{u, v, e}` per edge.
    pub fn lift_to_hypergraph(&self) -> Result<Dataset> {
        if self.edges.is_empty() {
            return Err(Error::Degenerate("graph has no edges to lift".into()));
        }
        let samples = self
            .edges
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| vec![u.min(v), u.max(v), self.n + e])
            .collect();
        Dataset::new(self.n + self.edges.len(), samples)
    }
}
