//! Compares the best likelihood found at each factor rank on small lifted
//! datasets, and flags any case where a rank above 3 beats rank 3.
//!
//! Run with `cargo run --release --example cardinality_rank`.

use dppmle::coloring::optimal_value;
use dppmle::mle::{likelihood_by_rank, OptimizerConfig};
use dppmle::Graph;

fn main() -> dppmle::Result<()> {
    let graphs = [
        ("K3", Graph::complete(3)),
        ("P4", Graph::new(4, vec![(0, 1), (1, 2), (2, 3)])?),
        ("C4", Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 3)])?),
        ("C5", Graph::new(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])?),
    ];
    let cfg = OptimizerConfig { restarts: 10, ..Default::default() };
    for (name, g) in &graphs {
        let data = g.lift_to_hypergraph()?;
        let ranks: Vec<usize> = (3..=data.n()).collect();
        let best = likelihood_by_rank(&data, &ranks, &cfg)?;
        let at3 = best[0].1;
        println!("{name}: optimum from a coloring {:.6}", optimal_value(g)?);
        for (r, ll) in &best {
            let mark = if *r > 3 && *ll < at3 - 1e-6 { "  <- beats rank 3" } else { "" };
            println!("  rank {r:>2}: {ll:.6}{mark}");
        }
    }
    Ok(())
}
