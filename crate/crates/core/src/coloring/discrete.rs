//! Colorings with values in `{1, 2, 3}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::reduction::BotGraph;
use crate::sat::{Lit, SolveResult, Solver};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProperCheck {
    pub proper: bool,
    /// Indices of monochromatic edges.
    pub monochromatic: Vec<usize>,
}

fn check_colors(graph: &Graph, colors: &[u8]) -> Result<()> {
    if colors.len() != graph.n() {
        return Err(Error::Validation(format!(
            "coloring covers {} nodes but the graph has {} (missing node color)",
            colors.len(),
            graph.n()
        )));
    }
    if let Some(v) = colors.iter().position(|c| !(1..=3).contains(c)) {
        return Err(Error::Validation(format!(
            "node {v} has color {}, expected 1, 2 or 3",
            colors[v]
        )));
    }
    Ok(())
}

pub fn check_proper(graph: &Graph, colors: &[u8]) -> Result<ProperCheck> {
    check_colors(graph, colors)?;
    let mono: Vec<usize> = graph
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, &(u, v))| colors[u] == colors[v])
        .map(|(e, _)| e)
        .collect();
    Ok(ProperCheck {
        proper: mono.is_empty(),
        monochromatic: mono,
    })
}

/// Exact 3-colorability via a one-hot SAT encoding. The endpoints of the
/// first edge are pinned to colors 1 and 2 to break color symmetry.
/// Returns `Ok(None)` for graphs that are not 3-colorable, and an error if
/// `conflict_limit` is exhausted first.
pub fn find_three_coloring(graph: &Graph, conflict_limit: Option<u64>) -> Result<Option<Vec<u8>>> {
    let var = |v: usize, c: usize| 3 * v + c;
    let mut s = Solver::new(3 * graph.n());
    s.set_conflict_limit(conflict_limit);
    for v in 0..graph.n() {
        s.add_clause(&[
            Lit::pos(var(v, 0)),
            Lit::pos(var(v, 1)),
            Lit::pos(var(v, 2)),
        ]);
    }
    for &(u, v) in graph.edges() {
        for c in 0..3 {
            s.add_clause(&[Lit::neg(var(u, c)), Lit::neg(var(v, c))]);
        }
    }
    if let Some(&(u, v)) = graph.edges().first() {
        s.add_clause(&[Lit::pos(var(u, 0))]);
        s.add_clause(&[Lit::pos(var(v, 1))]);
    }
    match s.solve() {
        SolveResult::Sat(model) => {
            let colors = (0..graph.n())
                .map(|v| {
                    (0..3)
                        .find(|&c| model[var(v, c)])
                        .map_or(1, |c| c as u8 + 1)
                })
                .collect();
            Ok(Some(colors))
        }
        SolveResult::Unsat => Ok(None),
        SolveResult::Unknown => Err(Error::SizeGuard(format!(
            "3-coloring search exceeded {} conflicts",
            conflict_limit.unwrap_or(0)
        ))),
    }
}

/// Colors the `aux` nodes (currently 0 = uncolored) so that every edge
/// touching them is proper, trying assignments in lexicographic order.
fn complete_locally(graph: &Graph, colors: &mut [u8], aux: &[usize]) -> bool {
    let total = 3usize.pow(aux.len() as u32);
    for code in 0..total {
        let mut c = code;
        for &v in aux.iter().rev() {
            colors[v] = (c % 3) as u8 + 1;
            c /= 3;
        }
        let ok = aux.iter().all(|&v| {
            graph
                .neighbors(v)
                .iter()
                .all(|&w| colors[w] == 0 || colors[w] != colors[v])
        });
        if ok {
            return true;
        }
    }
    for &v in aux {
        colors[v] = 0;
    }
    false
}

/// Canonical coloring of the reduction graph from a satisfying assignment:
/// `T = 1`, `F = 2`, `D = 3`, true literals 1 and false literals 2, with
/// gadget nodes completed gadget by gadget.
pub fn assignment_to_coloring(bot: &BotGraph, assignment: &[bool]) -> Result<Vec<u8>> {
    let formula = bot.formula();
    if assignment.len() != formula.n_vars() {
        return Err(Error::Validation(format!(
            "assignment has {} values for {} variables",
            assignment.len(),
            formula.n_vars()
        )));
    }
    if let Some(c) = formula.first_violated(assignment) {
        return Err(Error::UnsatisfiedClause {
            clause: c,
            detail: format!("literals {:?} are all false", formula.clauses()[c]),
        });
    }
    let g = bot.graph();
    let mut colors = vec![0u8; g.n()];
    for b in bot.blocks() {
        colors[b.t] = 1;
        colors[b.f] = 2;
        colors[b.d] = 3;
        colors[b.literal] = if assignment[b.var] != b.negated { 1 } else { 2 };
    }
    for (i, gd) in bot.equality_gadgets().iter().enumerate() {
        if !complete_locally(g, &mut colors, &[gd.aux.0, gd.aux.1]) {
            return Err(Error::Internal(format!(
                "equality gadget {i} cannot be colored"
            )));
        }
    }
    for (c, cg) in bot.clause_gadgets().iter().enumerate() {
        let aux = [cg.u[0], cg.v[0], cg.u[1], cg.v[1], cg.u[2], cg.v[2]];
        if !complete_locally(g, &mut colors, &aux) {
            return Err(Error::Internal(format!(
                "clause gadget {c} cannot be colored"
            )));
        }
    }
    Ok(colors)
}

/// Exhaustive check whether a clause gadget admits a completion when its
/// three literals carry the given colors (blocks colored canonically).
pub fn clause_gadget_completable(literal_colors: [u8; 3]) -> bool {
    // Local copy of one gadget: T nodes 0..3, literals 3..6, u 6..9, v 9..12.
    let mut edges = Vec::new();
    for p in 0..3 {
        edges.push((6 + p, p));
        edges.push((6 + p, 3 + p));
        edges.push((6 + p, 9 + p));
    }
    edges.extend([(9, 10), (10, 11), (9, 11)]);
    let g = Graph::new(12, edges).expect("gadget graph is simple");
    let mut colors = vec![
        1,
        1,
        1,
        literal_colors[0],
        literal_colors[1],
        literal_colors[2],
    ];
    colors.extend([0u8; 6]);
    complete_locally(&g, &mut colors, &[6, 7, 8, 9, 10, 11])
}

#[derive(Serialize, Deserialize)]
struct ColorsFile {
    colors: BTreeMap<String, u8>,
}

#[derive(Serialize, Deserialize)]
struct AssignmentFile {
    assignment: Vec<bool>,
}

pub(crate) fn id_map<T: Copy>(map: &BTreeMap<String, T>, what: &str) -> Result<Vec<T>> {
    let mut out: Vec<Option<T>> = vec![None; map.len()];
    for (k, &v) in map {
        let id: usize = k
            .parse()
            .map_err(|_| Error::Validation(format!("{what} key `{k}` is not a node id")))?;
        if id >= out.len() {
            return Err(Error::Validation(format!(
                "{what} ids must be 0..{}, found {id}",
                out.len()
            )));
        }
        out[id] = Some(v);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Validation(format!("missing {what} for node {i}"))))
        .collect()
}

pub fn colors_from_json_str(text: &str) -> Result<Vec<u8>> {
    let f: ColorsFile = serde_json::from_str(text).map_err(Error::from_json)?;
    id_map(&f.colors, "color")
}

pub fn colors_to_json_string(colors: &[u8]) -> String {
    let f = ColorsFile {
        colors: colors
            .iter()
            .enumerate()
            .map(|(i, &c)| (i.to_string(), c))
            .collect(),
    };
    serde_json::to_string(&f).expect("coloring serialization cannot fail")
}

pub fn assignment_from_json_str(text: &str) -> Result<Vec<bool>> {
    let f: AssignmentFile = serde_json::from_str(text).map_err(Error::from_json)?;
    Ok(f.assignment)
}

pub fn assignment_to_json_string(assignment: &[bool]) -> String {
    serde_json::to_string(&AssignmentFile {
        assignment: assignment.to_vec(),
    })
    .expect("assignment serialization cannot fail")
}
