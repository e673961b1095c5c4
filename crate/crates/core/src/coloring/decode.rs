//! Reading a satisfying-ish assignment off a near-optimal vector coloring.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cross3, dot3, line_angle, normalize3, scale3, Vec3};
use crate::reduction::bot::{BlockKind, BotGraph, EdgeTag, GadgetKind};
use crate::reduction::damage::{classify_damage, default_trim_threshold, trim_dense};

#[derive(Debug, Clone, Serialize)]
pub struct DecoderParams {
    /// An edge is good when its endpoint lines meet at angle `>= π/2 - slack`.
    pub slack: f64,
    /// Allowed angle between a surviving T/F/D vector and its axis.
    pub region: f64,
    /// A literal reads as true within this angle of the True axis.
    pub literal_window: f64,
    /// Expander trimming threshold; `None` means `3d/4 + 2`.
    pub trim_threshold: Option<f64>,
}

impl Default for DecoderParams {
    fn default() -> Self {
        DecoderParams {
            slack: 0.005,
            region: PI / 300.0,
            literal_window: PI / 12.0,
            trim_threshold: None,
        }
    }
}

impl DecoderParams {
    /// Slack of the form `c / ln n` for a graph with `n` nodes.
    pub fn with_log_slack(c: f64, n: usize) -> Self {
        DecoderParams {
            slack: c / (n.max(3) as f64).ln(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.slack
            && self.slack < self.region
            && self.region < self.literal_window
            && self.literal_window < PI / 4.0;
        if !ok {
            return Err(Error::Parameter(format!(
                "need 0 < slack ({}) < region ({}) < literal window ({}) < π/4",
                self.slack, self.region, self.literal_window
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionViolation {
    pub node: usize,
    pub kind: BlockKind,
    pub angle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecodeOutcome {
    pub assignment: Vec<bool>,
    pub satisfied_clauses: usize,
    pub m_clauses: usize,
    pub satisfied_fraction: f64,
    /// Variables decided by neither literal; they default to false.
    pub free_variables: Vec<usize>,
    pub bad_edges: usize,
    pub trimmed_vertices: usize,
    pub damaged_pairs: usize,
    pub survived_clauses: usize,
    pub anchor_block: usize,
    pub region_violations: Vec<RegionViolation>,
}

pub fn decode_assignment(
    bot: &BotGraph,
    vectors: &[Vec3],
    params: &DecoderParams,
) -> Result<DecodeOutcome> {
    params.validate()?;
    let g = bot.graph();
    if vectors.len() != g.n() {
        return Err(Error::Validation(format!(
            "vector coloring covers {} nodes but the graph has {}",
            vectors.len(),
            g.n()
        )));
    }
    let cutoff = PI / 2.0 - params.slack;
    let bad: Vec<usize> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, &(u, v))| line_angle(&vectors[u], &vectors[v]) < cutoff)
        .map(|(e, _)| e)
        .collect();

    let gadgets = bot.equality_gadgets();
    let mut exp_deleted: Vec<usize> = bad
        .iter()
        .filter_map(|&e| match bot.tags()[e] {
            EdgeTag::Equality { gadget } => match gadgets[gadget].kind {
                GadgetKind::ExpanderLink { expander_edge, .. } => Some(expander_edge),
                GadgetKind::LiteralCopy { .. } => None,
            },
            _ => None,
        })
        .collect();
    exp_deleted.sort_unstable();
    exp_deleted.dedup();
    let threshold = params
        .trim_threshold
        .unwrap_or_else(|| default_trim_threshold(bot.d()));
    let trim = trim_dense(bot.expander(), &exp_deleted, threshold);

    let mut lost_link = vec![false; bot.expander().graph.m()];
    for &e in &trim.removed_edges {
        lost_link[e] = true;
    }
    let mut removed = bad.clone();
    for gd in gadgets {
        if let GadgetKind::ExpanderLink { expander_edge, .. } = gd.kind {
            if lost_link[expander_edge] {
                removed.extend_from_slice(&gd.edges);
            }
        }
    }
    removed.sort_unstable();
    removed.dedup();
    let damage = classify_damage(bot, &removed);

    let blocks = bot.blocks();
    let anchor = (0..blocks.len())
        .find(|&b| damage.block_survives[b])
        .ok_or_else(|| Error::Decode("no literal block survived".into()))?;
    let t_axis = normalize3(&vectors[blocks[anchor].t])
        .ok_or_else(|| Error::Decode("anchor T vector is zero".into()))?;
    let fv = vectors[blocks[anchor].f];
    let f_axis = normalize3(&[
        fv[0] - dot3(&fv, &t_axis) * t_axis[0],
        fv[1] - dot3(&fv, &t_axis) * t_axis[1],
        fv[2] - dot3(&fv, &t_axis) * t_axis[2],
    ])
    .ok_or_else(|| Error::Decode("anchor F vector is parallel to its T vector".into()))?;
    let d_axis = cross3(&t_axis, &f_axis);
    let axis = |k: BlockKind| match k {
        BlockKind::T => t_axis,
        BlockKind::F => f_axis,
        BlockKind::D => d_axis,
    };

    let mut violations = Vec::new();
    for (b, blk) in blocks.iter().enumerate() {
        if !damage.block_survives[b] {
            continue;
        }
        for kind in BlockKind::ALL {
            let node = blk.node(kind);
            let angle = line_angle(&vectors[node], &axis(kind));
            if angle > params.region {
                violations.push(RegionViolation { node, kind, angle });
            }
        }
    }

    let n = bot.formula().n_vars();
    let reads_true = |var: usize, negated: bool| -> bool {
        let mut any = false;
        for copy in 0..bot.k() {
            let b = bot.block_index(var, negated, copy);
            if !damage.block_survives[b] {
                continue;
            }
            any = true;
            if line_angle(&vectors[blocks[b].literal], &t_axis) > params.literal_window {
                return false;
            }
        }
        any
    };
    let mut assignment = vec![false; n];
    let mut free = Vec::new();
    for (var, slot) in assignment.iter_mut().enumerate() {
        if reads_true(var, false) {
            *slot = true;
        } else if !reads_true(var, true) {
            free.push(var);
        }
    }
    let m = bot.formula().m();
    let sat = bot.formula().satisfied_count(&assignment);
    Ok(DecodeOutcome {
        assignment,
        satisfied_clauses: sat,
        m_clauses: m,
        satisfied_fraction: if m == 0 { 1.0 } else { sat as f64 / m as f64 },
        free_variables: free,
        bad_edges: bad.len(),
        trimmed_vertices: trim.deleted_vertices.len(),
        damaged_pairs: damage.damaged_pairs.len(),
        survived_clauses: damage.survived_clauses,
        anchor_block: anchor,
        region_violations: violations,
    })
}

/// Rotates `x` about `axis` (unit) by `angle` (Rodrigues).
pub fn rotate(x: &Vec3, axis: &Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    let k_cross = cross3(axis, x);
    let k_dot = dot3(axis, x);
    let a = scale3(x, c);
    let b = scale3(&k_cross, s);
    let d = scale3(axis, k_dot * (1.0 - c));
    [a[0] + b[0] + d[0], a[1] + b[1] + d[1], a[2] + b[2] + d[2]]
}
