//! Effect of deleted edges on the reduction graph.

use std::collections::VecDeque;

use serde::Serialize;

use crate::reduction::bot::{BotGraph, GadgetKind};
use crate::reduction::expander::Expander;

#[derive(Debug, Clone, Serialize)]
pub struct DamageReport {
    pub deleted_edges: usize,
    /// Equality gadgets with at least one deleted edge.
    pub broken_gadgets: Vec<usize>,
    /// Blocks whose literal node lost all its copy ties or all its
    /// expander links.
    pub isolated_blocks: Vec<usize>,
    /// Damaged variable copies `(var, copy)`.
    pub damaged_pairs: Vec<(usize, usize)>,
    /// Per block: survives (its variable copy is undamaged).
    pub block_survives: Vec<bool>,
    pub destroyed_clauses: Vec<usize>,
    pub survived_clauses: usize,
    /// `m - 2|E'|`, floored at 0.
    pub clause_bound: usize,
    pub clause_bound_holds: bool,
}

/// Classifies the damage caused by deleting `removed` (edge indices of the
/// reduction graph).
pub fn classify_damage(bot: &BotGraph, removed: &[usize]) -> DamageReport {
    let g = bot.graph();
    let k = bot.k();
    let n = bot.formula().n_vars();
    let mut gone = vec![false; g.m()];
    for &e in removed {
        if e < gone.len() {
            gone[e] = true;
        }
    }
    let gadgets = bot.equality_gadgets();
    let broken: Vec<bool> = gadgets
        .iter()
        .map(|gd| gd.edges.iter().any(|&e| gone[e]))
        .collect();

    let n_blocks = bot.blocks().len();
    // Per block: (broken, total) literal-copy ties, and broken expander links.
    let mut copy_ties = vec![(0usize, 0usize); n_blocks];
    let exp_edges = bot.expander().graph.edges();
    let mut link_broken = vec![false; exp_edges.len()];
    for (gi, gd) in gadgets.iter().enumerate() {
        match gd.kind {
            GadgetKind::LiteralCopy {
                var,
                negated,
                copies,
            } => {
                for c in [copies.0, copies.1] {
                    let b = bot.block_index(var, negated, c);
                    copy_ties[b].1 += 1;
                    if broken[gi] {
                        copy_ties[b].0 += 1;
                    }
                }
            }
            GadgetKind::ExpanderLink { expander_edge, .. } => {
                if broken[gi] {
                    link_broken[expander_edge] = true;
                }
            }
        }
    }
    let mut links = vec![(0usize, 0usize); n_blocks];
    for (e, &(a, b)) in exp_edges.iter().enumerate() {
        for x in [a, b] {
            links[x].1 += 1;
            if link_broken[e] {
                links[x].0 += 1;
            }
        }
    }
    let isolated: Vec<bool> = (0..n_blocks)
        .map(|b| {
            let (cb, ct) = copy_ties[b];
            let (lb, lt) = links[b];
            (ct > 0 && cb == ct) || (lt > 0 && lb == lt)
        })
        .collect();

    let mut damaged_pairs = Vec::new();
    let mut block_survives = vec![true; n_blocks];
    for var in 0..n {
        for copy in 0..k {
            let pos = bot.block_index(var, false, copy);
            let neg = bot.block_index(var, true, copy);
            let hit = bot.pair_edges(var, copy).iter().any(|&e| gone[e]);
            if hit || isolated[pos] || isolated[neg] {
                damaged_pairs.push((var, copy));
                block_survives[pos] = false;
                block_survives[neg] = false;
            }
        }
    }

    let mut destroyed = Vec::new();
    for (c, cg) in bot.clause_gadgets().iter().enumerate() {
        let lit_damaged = cg.blocks.iter().any(|&b| !block_survives[b]);
        let own_edge = cg.edges.iter().any(|&e| gone[e]);
        if lit_damaged || own_edge {
            destroyed.push(c);
        }
    }
    let m = bot.formula().m();
    let deleted = gone.iter().filter(|&&x| x).count();
    let survived = m - destroyed.len();
    let bound = m.saturating_sub(2 * deleted);
    DamageReport {
        deleted_edges: deleted,
        broken_gadgets: (0..gadgets.len()).filter(|&i| broken[i]).collect(),
        isolated_blocks: (0..n_blocks).filter(|&b| isolated[b]).collect(),
        damaged_pairs,
        block_survives,
        destroyed_clauses: destroyed,
        survived_clauses: survived,
        clause_bound: bound,
        clause_bound_holds: survived >= bound,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrimReport {
    pub threshold: f64,
    pub survives: Vec<bool>,
    pub deleted_vertices: Vec<usize>,
    /// Expander edges lost, either deleted up front or incident to a
    /// trimmed vertex.
    pub removed_edges: Vec<usize>,
    /// `15 |E'| / d`; reported only.
    pub size_bound: f64,
    pub within_bound: bool,
}

/// Default trimming threshold `3d/4 + 2`.
pub fn default_trim_threshold(d: usize) -> f64 {
    0.75 * d as f64 + 2.0
}

/// Deletes the expander edges in `deleted`, then repeatedly removes
/// vertices whose remaining degree is below `threshold`.
pub fn trim_dense(expander: &Expander, deleted: &[usize], threshold: f64) -> TrimReport {
    let g = &expander.graph;
    let mut edge_alive = vec![true; g.m()];
    for &e in deleted {
        if e < edge_alive.len() {
            edge_alive[e] = false;
        }
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        incident[u].push(e);
        incident[v].push(e);
    }
    let mut deg: Vec<usize> = (0..g.n())
        .map(|v| incident[v].iter().filter(|&&e| edge_alive[e]).count())
        .collect();
    let mut alive = vec![true; g.n()];
    let mut queue: VecDeque<usize> = (0..g.n())
        .filter(|&v| (deg[v] as f64) < threshold)
        .collect();
    let mut order = Vec::new();
    while let Some(v) = queue.pop_front() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        order.push(v);
        for &e in &incident[v] {
            if !edge_alive[e] {
                continue;
            }
            edge_alive[e] = false;
            let (a, b) = g.edges()[e];
            let w = if a == v { b } else { a };
            deg[w] -= 1;
            if alive[w] && (deg[w] as f64) < threshold {
                queue.push_back(w);
            }
        }
    }
    let size_bound = 15.0 * deleted.len() as f64 / expander.d as f64;
    TrimReport {
        threshold,
        within_bound: (order.len() as f64) <= size_bound,
        survives: alive,
        deleted_vertices: order,
        removed_edges: (0..g.m()).filter(|&e| !edge_alive[e]).collect(),
        size_bound,
    }
}
