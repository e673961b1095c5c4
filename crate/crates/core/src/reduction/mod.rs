//! Reduction from 3-SAT to 3-coloring of a bounded-degree graph.

pub mod bot;
pub mod cnf;
pub mod damage;
pub mod expander;

pub use bot::{BlockKind, BotGraph, EdgeTag, GadgetKind, NodeRole, PlainGraphFile};
pub use cnf::{CnfFormula, Literal};
pub use damage::{classify_damage, trim_dense, DamageReport, TrimReport};
pub use expander::{build_expander, Expander};
