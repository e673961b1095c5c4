//! Bounded-degree graph `G_φ` built from a 3-CNF formula and an expander.
//!
//! Every literal has `k` copies. Each copy owns a block `(T, F, D)`
//! forming a triangle; the two literals of a variable copy are joined to
//! each other and each to its own `D`. Copies of a literal are tied by
//! equality gadgets, clauses use a six-node gadget, and each expander edge
//! ties the `T`, `F` and `D` nodes of two blocks by equality gadgets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::reduction::cnf::{CnfFormula, Literal};
use crate::reduction::expander::Expander;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    T,
    F,
    D,
}

impl BlockKind {
    pub const ALL: [BlockKind; 3] = [BlockKind::T, BlockKind::F, BlockKind::D];

    /// Color used for this node in the canonical coloring (1, 2 or 3).
    pub fn color(self) -> u8 {
        match self {
            BlockKind::T => 1,
            BlockKind::F => 2,
            BlockKind::D => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Literal {
        block: usize,
    },
    Color {
        block: usize,
        kind: BlockKind,
    },
    /// `second` distinguishes the two auxiliary nodes `u` (false) and `v`.
    EqualityAux {
        gadget: usize,
        second: bool,
    },
    ClauseAux {
        clause: usize,
        position: usize,
        second: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetKind {
    /// Ties copies `copies.0 < copies.1` of one literal.
    LiteralCopy {
        var: usize,
        negated: bool,
        copies: (usize, usize),
    },
    /// Ties nodes of `kind` across expander edge `expander_edge`.
    ExpanderLink {
        expander_edge: usize,
        kind: BlockKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeTag {
    BlockTriangle { block: usize },
    LiteralPair { var: usize, copy: usize },
    LiteralDummy { block: usize },
    Equality { gadget: usize },
    Clause { clause: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub var: usize,
    pub negated: bool,
    pub copy: usize,
    pub literal: usize,
    pub t: usize,
    pub f: usize,
    pub d: usize,
}

impl Block {
    pub fn node(&self, kind: BlockKind) -> usize {
        match kind {
            BlockKind::T => self.t,
            BlockKind::F => self.f,
            BlockKind::D => self.d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityGadget {
    pub kind: GadgetKind,
    pub ends: (usize, usize),
    pub aux: (usize, usize),
    pub edges: [usize; 5],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseGadget {
    /// Block of the literal copy used at each position.
    pub blocks: [usize; 3],
    pub u: [usize; 3],
    pub v: [usize; 3],
    pub edges: [usize; 12],
}

#[derive(Debug, Clone)]
pub struct BotGraph {
    formula: CnfFormula,
    k: usize,
    expander: Expander,
    roles: Vec<NodeRole>,
    graph: Graph,
    tags: Vec<EdgeTag>,
    blocks: Vec<Block>,
    pair_edges: Vec<[usize; 9]>,
    gadgets: Vec<EqualityGadget>,
    clauses: Vec<ClauseGadget>,
}

struct Builder {
    roles: Vec<NodeRole>,
    edges: Vec<(usize, usize)>,
    tags: Vec<EdgeTag>,
}

impl Builder {
    fn node(&mut self, role: NodeRole) -> usize {
        self.roles.push(role);
        self.roles.len() - 1
    }

    fn edge(&mut self, u: usize, v: usize, tag: EdgeTag) -> usize {
        self.edges.push((u, v));
        self.tags.push(tag);
        self.edges.len() - 1
    }

    fn equality(
        &mut self,
        gadgets: &mut Vec<EqualityGadget>,
        kind: GadgetKind,
        x: usize,
        y: usize,
    ) {
        let g = gadgets.len();
        let u = self.node(NodeRole::EqualityAux {
            gadget: g,
            second: false,
        });
        let v = self.node(NodeRole::EqualityAux {
            gadget: g,
            second: true,
        });
        let tag = EdgeTag::Equality { gadget: g };
        let edges = [
            self.edge(x, u, tag),
            self.edge(x, v, tag),
            self.edge(y, u, tag),
            self.edge(y, v, tag),
            self.edge(u, v, tag),
        ];
        gadgets.push(EqualityGadget {
            kind,
            ends: (x, y),
            aux: (u, v),
            edges,
        });
    }
}

impl BotGraph {
    /// Index of the block for copy `copy` of literal `(var, negated)`.
    pub fn block_index(&self, var: usize, negated: bool, copy: usize) -> usize {
        block_index(self.k, var, negated, copy)
    }

    pub fn build(formula: &CnfFormula, k: usize, expander: Expander) -> Result<BotGraph> {
        let n = formula.n_vars();
        if k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if expander.count() != 2 * k * n {
            return Err(Error::Parameter(format!(
                "expander has {} vertices but 2·k·n = {}",
                expander.count(),
                2 * k * n
            )));
        }
        let n_blocks = 2 * k * n;
        let mut b = Builder {
            roles: Vec::new(),
            edges: Vec::new(),
            tags: Vec::new(),
        };
        let mut blocks = Vec::with_capacity(n_blocks);
        for var in 0..n {
            for negated in [false, true] {
                for copy in 0..k {
                    let idx = blocks.len();
                    let literal = b.node(NodeRole::Literal { block: idx });
                    blocks.push(Block {
                        var,
                        negated,
                        copy,
                        literal,
                        t: 0,
                        f: 0,
                        d: 0,
                    });
                }
            }
        }
        for (idx, blk) in blocks.iter_mut().enumerate() {
            blk.t = b.node(NodeRole::Color {
                block: idx,
                kind: BlockKind::T,
            });
            blk.f = b.node(NodeRole::Color {
                block: idx,
                kind: BlockKind::F,
            });
            blk.d = b.node(NodeRole::Color {
                block: idx,
                kind: BlockKind::D,
            });
        }

        let mut pair_edges = Vec::with_capacity(n * k);
        for var in 0..n {
            for copy in 0..k {
                let p = &blocks[block_index(k, var, false, copy)];
                let q = &blocks[block_index(k, var, true, copy)];
                let (pi, qi) = (
                    block_index(k, var, false, copy),
                    block_index(k, var, true, copy),
                );
                let tp = EdgeTag::BlockTriangle { block: pi };
                let tq = EdgeTag::BlockTriangle { block: qi };
                pair_edges.push([
                    b.edge(p.t, p.f, tp),
                    b.edge(p.f, p.d, tp),
                    b.edge(p.d, p.t, tp),
                    b.edge(q.t, q.f, tq),
                    b.edge(q.f, q.d, tq),
                    b.edge(q.d, q.t, tq),
                    b.edge(p.literal, q.literal, EdgeTag::LiteralPair { var, copy }),
                    b.edge(p.literal, p.d, EdgeTag::LiteralDummy { block: pi }),
                    b.edge(q.literal, q.d, EdgeTag::LiteralDummy { block: qi }),
                ]);
            }
        }

        let mut gadgets = Vec::new();
        for var in 0..n {
            for negated in [false, true] {
                for j1 in 0..k {
                    for j2 in (j1 + 1)..k {
                        let x = blocks[block_index(k, var, negated, j1)].literal;
                        let y = blocks[block_index(k, var, negated, j2)].literal;
                        let kind = GadgetKind::LiteralCopy {
                            var,
                            negated,
                            copies: (j1, j2),
                        };
                        b.equality(&mut gadgets, kind, x, y);
                    }
                }
            }
        }

        let mut next_copy = vec![0usize; n_blocks / k];
        let mut clauses = Vec::with_capacity(formula.m());
        for (c, cl) in formula.clauses().iter().enumerate() {
            let mut used = [0usize; 3];
            for (p, lit) in cl.iter().enumerate() {
                let slot = 2 * lit.var + usize::from(lit.negated);
                let copy = next_copy[slot];
                if copy >= k {
                    return Err(Error::Capacity(format!(
                        "literal {} occurs more than k = {k} times (clause {c})",
                        signed(*lit)
                    )));
                }
                next_copy[slot] += 1;
                used[p] = block_index(k, lit.var, lit.negated, copy);
            }
            let tag = EdgeTag::Clause { clause: c };
            let mut u = [0; 3];
            let mut v = [0; 3];
            for p in 0..3 {
                u[p] = b.node(NodeRole::ClauseAux {
                    clause: c,
                    position: p,
                    second: false,
                });
                v[p] = b.node(NodeRole::ClauseAux {
                    clause: c,
                    position: p,
                    second: true,
                });
            }
            let mut edges = [0; 12];
            for p in 0..3 {
                let blk = &blocks[used[p]];
                edges[3 * p] = b.edge(u[p], blk.t, tag);
                edges[3 * p + 1] = b.edge(u[p], blk.literal, tag);
                edges[3 * p + 2] = b.edge(u[p], v[p], tag);
            }
            edges[9] = b.edge(v[0], v[1], tag);
            edges[10] = b.edge(v[1], v[2], tag);
            edges[11] = b.edge(v[0], v[2], tag);
            clauses.push(ClauseGadget {
                blocks: used,
                u,
                v,
                edges,
            });
        }

        for (e, &(a, c)) in expander.graph.edges().iter().enumerate() {
            for kind in BlockKind::ALL {
                let x = blocks[a].node(kind);
                let y = blocks[c].node(kind);
                b.equality(
                    &mut gadgets,
                    GadgetKind::ExpanderLink {
                        expander_edge: e,
                        kind,
                    },
                    x,
                    y,
                );
            }
        }

        let graph = Graph::new(b.roles.len(), b.edges)?;
        Ok(BotGraph {
            formula: formula.clone(),
            k,
            expander,
            roles: b.roles,
            graph,
            tags: b.tags,
            blocks,
            pair_edges,
            gadgets,
            clauses,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.expander.d
    }

    pub fn expander(&self) -> &Expander {
        &self.expander
    }

    pub fn roles(&self) -> &[NodeRole] {
        &self.roles
    }

    pub fn tags(&self) -> &[EdgeTag] {
        &self.tags
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// The nine edges of the two literal blocks of variable copy
    /// `(var, copy)`: both triangles, the literal pair edge, and the two
    /// literal-dummy edges.
    pub fn pair_edges(&self, var: usize, copy: usize) -> &[usize; 9] {
        &self.pair_edges[var * self.k + copy]
    }

    pub fn equality_gadgets(&self) -> &[EqualityGadget] {
        &self.gadgets
    }

    pub fn clause_gadgets(&self) -> &[ClauseGadget] {
        &self.clauses
    }

    /// Expected vs. tallied node and edge counts per gadget class, ignoring
    /// the edges listed in `removed`.
    pub fn count_audit(&self, removed: &[usize]) -> CountAudit {
        let n = self.formula.n_vars();
        let k = self.k;
        let d = self.d();
        let m = self.formula.m();
        let mut gone = vec![false; self.graph.m()];
        for &e in removed {
            if e < gone.len() {
                gone[e] = true;
            }
        }
        let class_of_edge = |tag: &EdgeTag| -> usize {
            match tag {
                EdgeTag::BlockTriangle { .. }
                | EdgeTag::LiteralPair { .. }
                | EdgeTag::LiteralDummy { .. } => 0,
                EdgeTag::Equality { gadget } => match self.gadgets[*gadget].kind {
                    GadgetKind::LiteralCopy { .. } => 1,
                    GadgetKind::ExpanderLink { .. } => 3,
                },
                EdgeTag::Clause { .. } => 2,
            }
        };
        let class_of_node = |role: &NodeRole| -> usize {
            match role {
                NodeRole::Literal { .. } | NodeRole::Color { .. } => 0,
                NodeRole::EqualityAux { gadget, .. } => match self.gadgets[*gadget].kind {
                    GadgetKind::LiteralCopy { .. } => 1,
                    GadgetKind::ExpanderLink { .. } => 3,
                },
                NodeRole::ClauseAux { .. } => 2,
            }
        };
        let mut nodes = [0usize; 4];
        for r in &self.roles {
            nodes[class_of_node(r)] += 1;
        }
        let mut edges = [0usize; 4];
        for (e, t) in self.tags.iter().enumerate() {
            if !gone[e] {
                edges[class_of_edge(t)] += 1;
            }
        }
        let expected_nodes = [8 * n * k, 2 * n * k * (k - 1), 6 * m, 6 * n * k * d];
        let expected_edges = [9 * n * k, 5 * n * k * (k - 1), 12 * m, 15 * n * k * d];
        let names = [
            "literal_blocks",
            "copy_equality",
            "clause",
            "expander_equality",
        ];
        let mut classes = Vec::new();
        let mut mismatches = Vec::new();
        for c in 0..4 {
            if nodes[c] != expected_nodes[c] {
                mismatches.push(format!(
                    "{}: expected {} nodes, found {}",
                    names[c], expected_nodes[c], nodes[c]
                ));
            }
            if edges[c] != expected_edges[c] {
                let missing: Vec<String> = removed
                    .iter()
                    .filter(|&&e| e < self.tags.len() && class_of_edge(&self.tags[e]) == c)
                    .map(|&e| format!("edge {e} of {}", self.describe_tag(&self.tags[e])))
                    .collect();
                mismatches.push(format!(
                    "{}: expected {} edges, found {} (missing {})",
                    names[c],
                    expected_edges[c],
                    edges[c],
                    missing.join(", ")
                ));
            }
            classes.push(ClassCount {
                class: names[c].to_string(),
                expected_nodes: expected_nodes[c],
                nodes: nodes[c],
                expected_edges: expected_edges[c],
                edges: edges[c],
            });
        }
        CountAudit {
            expected_nodes: expected_nodes.iter().sum(),
            nodes: nodes.iter().sum(),
            expected_edges: expected_edges.iter().sum(),
            edges: edges.iter().sum(),
            max_degree: self.graph.max_degree(),
            degree_cap: (2 * d + 3).max(2 * k + 1),
            classes,
            mismatches,
        }
    }

    pub fn describe_tag(&self, tag: &EdgeTag) -> String {
        match *tag {
            EdgeTag::BlockTriangle { block } => format!("triangle of block {block}"),
            EdgeTag::LiteralPair { var, copy } => {
                format!("literal pair of variable {var} copy {copy}")
            }
            EdgeTag::LiteralDummy { block } => format!("literal-dummy edge of block {block}"),
            EdgeTag::Equality { gadget } => format!("equality gadget {gadget}"),
            EdgeTag::Clause { clause } => format!("clause gadget {clause}"),
        }
    }

    pub fn to_json_string(&self) -> String {
        let nodes = self
            .roles
            .iter()
            .enumerate()
            .map(|(id, r)| self.node_record(id, r))
            .collect();
        let file = GraphFile {
            meta: Meta {
                n_vars: self.formula.n_vars(),
                m_clauses: self.formula.m(),
                k: self.k,
                d: self.d(),
                seed: self.expander.seed,
            },
            nodes,
            edges: self.graph.edges().iter().map(|&(u, v)| [u, v]).collect(),
            expander_edges: self
                .expander
                .graph
                .edges()
                .iter()
                .map(|&(u, v)| [u, v])
                .collect(),
        };
        serde_json::to_string(&file).expect("graph serialization cannot fail")
    }

    fn node_record(&self, id: usize, role: &NodeRole) -> NodeRecord {
        let lit = |block: usize| {
            let b = &self.blocks[block];
            (Some(b.var), Some(b.negated), Some(b.copy))
        };
        let (role_name, (var, negated, copy), gadget) = match *role {
            NodeRole::Literal { block } => ("literal".to_string(), lit(block), None),
            NodeRole::Color { block, kind } => {
                (format!("color_{}", kind_name(kind)), lit(block), None)
            }
            NodeRole::EqualityAux { gadget, second } => (
                format!("equality_{}", if second { "v" } else { "u" }),
                (None, None, None),
                Some(gadget),
            ),
            NodeRole::ClauseAux {
                clause,
                position,
                second,
            } => (
                format!("clause_{}_{position}", if second { "v" } else { "u" }),
                (None, None, None),
                Some(clause),
            ),
        };
        NodeRecord {
            id,
            role: role_name,
            var,
            negated,
            copy,
            gadget,
        }
    }

    /// Reads a graph file written by [`BotGraph::to_json_string`]. The
    /// formula is recovered from the clause gadgets and the graph is rebuilt
    /// and compared against the file.
    pub fn from_json_str(text: &str) -> Result<BotGraph> {
        let file: GraphFile = serde_json::from_str(text).map_err(Error::from_json)?;
        let pg = PlainGraphFile::from_graph_file(&file);
        let graph = pg.to_graph()?;
        let mut clause_lits = vec![[None::<Literal>; 3]; file.meta.m_clauses];
        for rec in &file.nodes {
            let Some(rest) = rec.role.strip_prefix("clause_u_") else {
                continue;
            };
            let (Some(c), Ok(p)) = (rec.gadget, rest.parse::<usize>()) else {
                return Err(Error::Validation(format!(
                    "node {} has a malformed clause role",
                    rec.id
                )));
            };
            if c >= clause_lits.len() || p >= 3 || rec.id >= graph.n() {
                return Err(Error::Validation(format!(
                    "node {} refers to a missing clause",
                    rec.id
                )));
            }
            for &w in graph.neighbors(rec.id) {
                let r = file.nodes.get(w).ok_or_else(|| {
                    Error::Validation(format!("edge endpoint {w} has no node record"))
                })?;
                if r.role == "literal" {
                    let (Some(var), Some(negated)) = (r.var, r.negated) else {
                        return Err(Error::Validation(format!(
                            "literal node {w} lacks var/negated"
                        )));
                    };
                    clause_lits[c][p] = Some(Literal { var, negated });
                }
            }
        }
        let mut clauses = Vec::with_capacity(clause_lits.len());
        for (c, cl) in clause_lits.iter().enumerate() {
            let mut out = [Literal {
                var: 0,
                negated: false,
            }; 3];
            for p in 0..3 {
                out[p] = cl[p].ok_or_else(|| {
                    Error::Validation(format!("clause {c} position {p} has no literal"))
                })?;
            }
            clauses.push(out);
        }
        let formula = CnfFormula::new(file.meta.n_vars, clauses)?;
        let count = 2 * file.meta.k * file.meta.n_vars;
        let exp_graph = Graph::new(
            count,
            file.expander_edges.iter().map(|e| (e[0], e[1])).collect(),
        )?;
        let expander = Expander::from_graph(exp_graph, file.meta.d, file.meta.seed)?;
        let rebuilt = BotGraph::build(&formula, file.meta.k, expander)?;
        if rebuilt.graph.edges() != graph.edges() || rebuilt.roles.len() != file.nodes.len() {
            return Err(Error::Validation(
                "graph file does not match the reduction of its own formula".into(),
            ));
        }
        for (id, (r, rec)) in rebuilt.roles.iter().zip(&file.nodes).enumerate() {
            if rebuilt.node_record(id, r) != *rec {
                return Err(Error::Validation(format!(
                    "node record {id} does not match"
                )));
            }
        }
        Ok(rebuilt)
    }

    /// Clause indices using each block (a block is used by at most one clause).
    pub fn clauses_of_block(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.blocks.len()];
        for (c, g) in self.clauses.iter().enumerate() {
            for &b in &g.blocks {
                out[b] = Some(c);
            }
        }
        out
    }
}

fn block_index(k: usize, var: usize, negated: bool, copy: usize) -> usize {
    (2 * var + usize::from(negated)) * k + copy
}

fn signed(l: Literal) -> String {
    if l.negated {
        format!("-{}", l.var + 1)
    } else {
        format!("{}", l.var + 1)
    }
}

fn kind_name(kind: BlockKind) -> &'static str {
    match kind {
        BlockKind::T => "t",
        BlockKind::F => "f",
        BlockKind::D => "d",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassCount {
    pub class: String,
    pub expected_nodes: usize,
    pub nodes: usize,
    pub expected_edges: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountAudit {
    pub expected_nodes: usize,
    pub nodes: usize,
    pub expected_edges: usize,
    pub edges: usize,
    pub max_degree: usize,
    /// `max(2d + 3, 2k + 1)`.
    pub degree_cap: usize,
    pub classes: Vec<ClassCount>,
    pub mismatches: Vec<String>,
}

impl CountAudit {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.max_degree <= self.degree_cap
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub n_vars: usize,
    pub m_clauses: usize,
    pub k: usize,
    pub d: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub role: String,
    pub var: Option<usize>,
    pub negated: Option<bool>,
    pub copy: Option<usize>,
    pub gadget: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub meta: Meta,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<[usize; 2]>,
    pub expander_edges: Vec<[usize; 2]>,
}

/// Just the vertices and edges of a graph file; everything else optional.
#[derive(Debug, Clone, Deserialize)]
pub struct PlainGraphFile {
    pub nodes: Vec<serde_json::Value>,
    pub edges: Vec<[usize; 2]>,
}

impl PlainGraphFile {
    fn from_graph_file(f: &GraphFile) -> Self {
        PlainGraphFile {
            nodes: vec![serde_json::Value::Null; f.nodes.len()],
            edges: f.edges.clone(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::from_json)
    }

    pub fn to_graph(&self) -> Result<Graph> {
        Graph::new(
            self.nodes.len(),
            self.edges.iter().map(|e| (e[0], e[1])).collect(),
        )
    }
}
