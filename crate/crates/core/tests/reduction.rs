mod common;

use common::cnf::*;
use common::rng;
use dppmle::reduction::bot::{EdgeTag, GadgetKind};
use dppmle::reduction::damage::default_trim_threshold;
use dppmle::reduction::*;
use dppmle::{Error, Graph};
use proptest::prelude::*;
use rand::Rng;

fn bot(f: &CnfFormula, k: usize, d: usize, seed: u64) -> BotGraph {
    let e = build_expander(2 * k * f.n_vars(), d, seed, 200).unwrap();
    BotGraph::build(f, k, e).unwrap()
}

#[test]
fn dimacs_parsing() {
    let f = CnfFormula::parse_dimacs("c comment\np cnf 3 1\n1 2 3 0\n").unwrap();
    assert_eq!(f.n_vars(), 3);
    assert_eq!(f.m(), 1);
    assert_eq!(f.k(), 1);
    let g = CnfFormula::parse_dimacs("1 -2 3 0\n-1 2 -3 0\n").unwrap();
    assert_eq!(g.k(), 2);
    assert!(g.clauses()[0][1].negated);
    // Clause split across lines.
    let h = CnfFormula::parse_dimacs("p cnf 3 1\n1 -2\n3 0\n").unwrap();
    assert_eq!(h.m(), 1);
    assert!(matches!(
        CnfFormula::parse_dimacs("p cnf 3 2\n1 2 3 0\n"),
        Err(Error::Parse { message, .. }) if message.contains("header mismatch")
    ));
    assert!(matches!(
        CnfFormula::parse_dimacs("p cnf 3 1\n1 x 3 0\n"),
        Err(Error::Parse {
            line: 2,
            column: 3,
            ..
        })
    ));
    assert!(CnfFormula::parse_dimacs("1 1 2 0\n").is_err());
    assert!(CnfFormula::parse_dimacs("1 2 0\n").is_err());
    let round = CnfFormula::parse_dimacs(&g.to_dimacs()).unwrap();
    assert_eq!(round, g);
}

#[test]
fn expander_examples() {
    let c6 = build_expander(6, 2, 7, 200).unwrap();
    assert_eq!(c6.graph.m(), 6);
    assert!(c6.graph.is_connected());
    assert!((0..6).all(|v| c6.graph.degree(v) == 2));
    let k4 = build_expander(4, 3, 1, 200).unwrap();
    assert_eq!(k4.graph.edges(), Graph::complete(4).edges());
    assert!((k4.lambda2 + 1.0).abs() < 1e-9);
    assert!(matches!(
        build_expander(5, 3, 1, 200),
        Err(Error::Parameter(_))
    ));
    assert!(matches!(
        build_expander(3, 3, 1, 200),
        Err(Error::Parameter(_))
    ));
}

#[test]
fn expander_is_deterministic_and_audited() {
    let a = build_expander(40, 8, 99, 200).unwrap();
    let b = build_expander(40, 8, 99, 200).unwrap();
    assert_eq!(a.graph, b.graph);
    assert!(a.lambda2 <= a.spectral_bound);
    assert!((0..40).all(|v| a.graph.degree(v) == 8));
    assert!(a.graph.is_connected());
}

#[test]
fn single_clause_counts() {
    let f = CnfFormula::parse_dimacs("p cnf 3 1\n1 2 3 0\n").unwrap();
    let g = bot(&f, 1, 2, 7);
    assert_eq!(g.graph().n(), 66);
    assert_eq!(g.graph().m(), 129);
    assert!(g.graph().max_degree() <= 7);
    let audit = g.count_audit(&[]);
    assert!(audit.passed(), "{:?}", audit.mismatches);
    let lifted = g.graph().lift_to_hypergraph().unwrap();
    assert_eq!(lifted.n(), 195);
    assert_eq!(lifted.m(), 129);
}

#[test]
fn formula_without_clauses() {
    let f = CnfFormula::from_signed(2, &[]).unwrap();
    let g = bot(&f, 2, 2, 3);
    let audit = g.count_audit(&[]);
    assert!(audit.passed());
    assert_eq!(audit.nodes, 8 * 4 + 2 * 4 + 6 * 4 * 2);
}

#[test]
fn audit_names_missing_gadget() {
    let f = CnfFormula::parse_dimacs("p cnf 3 1\n1 2 3 0\n").unwrap();
    let g = bot(&f, 1, 2, 7);
    let e = g
        .tags()
        .iter()
        .position(|t| matches!(t, EdgeTag::Equality { .. }))
        .unwrap();
    let audit = g.count_audit(&[e]);
    assert!(!audit.passed());
    assert!(audit
        .mismatches
        .iter()
        .any(|m| m.contains("equality gadget")));
}

#[test]
fn capacity_error() {
    let f = CnfFormula::parse_dimacs("1 2 3 0\n1 -2 -3 0\n").unwrap();
    let e = build_expander(6, 2, 1, 200).unwrap();
    assert!(matches!(BotGraph::build(&f, 1, e), Err(Error::Capacity(_))));
}

#[test]
fn lift_triangle() {
    let d = Graph::complete(3).lift_to_hypergraph().unwrap();
    assert_eq!(
        d.to_json_string(),
        r#"{"ground_set_size":6,"samples":[[1,2,4],[1,3,5],[2,3,6]]}"#
    );
}

#[test]
fn graph_file_round_trip() {
    let f = CnfFormula::parse_dimacs("1 -2 3 0\n-1 2 -3 0\n").unwrap();
    let g = bot(&f, 2, 3, 11);
    let text = g.to_json_string();
    let back = BotGraph::from_json_str(&text).unwrap();
    assert_eq!(back.graph(), g.graph());
    assert_eq!(back.formula(), g.formula());
    assert_eq!(back.tags(), g.tags());
    assert_eq!(back.to_json_string(), text);
    let again = bot(&f, 2, 3, 11);
    assert_eq!(again.to_json_string(), text);
}

#[test]
fn damage_examples() {
    let f = CnfFormula::parse_dimacs("p cnf 3 1\n1 2 3 0\n").unwrap();
    let g = bot(&f, 1, 2, 7);
    let none = classify_damage(&g, &[]);
    assert!(none.damaged_pairs.is_empty());
    assert_eq!(none.survived_clauses, 1);
    // One expander gadget edge: one gadget broken, no literal isolated (d = 2 links).
    let e = g
        .tags()
        .iter()
        .position(|t| matches!(t, EdgeTag::Equality { .. }))
        .unwrap();
    let one = classify_damage(&g, &[e]);
    assert_eq!(one.broken_gadgets.len(), 1);
    assert!(one.survived_clauses + 2 >= 1);
    assert!(one.clause_bound_holds);
    // A literal-block edge damages exactly that variable copy.
    let pe = g.pair_edges(0, 0)[6];
    let dmg = classify_damage(&g, &[pe]);
    assert_eq!(dmg.damaged_pairs, vec![(0, 0)]);
    assert_eq!(dmg.survived_clauses, 0);
    assert!(dmg.clause_bound_holds);
}

#[test]
fn copy_isolation() {
    let f = CnfFormula::parse_dimacs("1 2 3 0\n1 -2 -3 0\n").unwrap();
    let g = bot(&f, 2, 2, 5);
    let gi = g
        .equality_gadgets()
        .iter()
        .position(|gd| {
            matches!(
                gd.kind,
                GadgetKind::LiteralCopy {
                    var: 0,
                    negated: false,
                    ..
                }
            )
        })
        .unwrap();
    let e = g.equality_gadgets()[gi].edges[4];
    let r = classify_damage(&g, &[e]);
    assert_eq!(r.damaged_pairs, vec![(0, 0), (0, 1)]);
    assert_eq!(r.survived_clauses, 0);
}

#[test]
fn trimming() {
    let c6 = build_expander(6, 2, 7, 200).unwrap();
    let all = trim_dense(&c6, &[0], default_trim_threshold(2));
    assert_eq!(all.deleted_vertices.len(), 6);
    let e = build_expander(20, 8, 4, 200).unwrap();
    let keep = trim_dense(&e, &[], default_trim_threshold(8));
    assert!(keep.deleted_vertices.is_empty());
    let cascade = trim_dense(&e, &[0], default_trim_threshold(8));
    assert_eq!(cascade.deleted_vertices.len(), 20);
    let loose = trim_dense(&e, &[0], 6.0);
    assert!(loose.deleted_vertices.is_empty());
}

#[test]
fn satisfiable_iff_colorable_small() {
    use dppmle::coloring::find_three_coloring;
    let mut r = rng(8);
    for _ in 0..6 {
        let n = r.gen_range(3..6);
        let f = random_formula(n, r.gen_range(1..4), 2, &mut r);
        let g = bot(&f, 2, 3, r.gen());
        let sat = f.brute_force_satisfying().unwrap().is_some();
        let col = find_three_coloring(g.graph(), None).unwrap().is_some();
        assert_eq!(sat, col);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn simple_and_degree_capped(seed in 0u64..1_000_000, n in 3usize..11, k in 1usize..5) {
        let mut r = rng(seed);
        let f = random_formula(n, r.gen_range(0..(n * k / 3 + 1)), k, &mut r);
        let kk = k.max(f.k()).max(9usize.div_ceil(2 * n));
        let g = bot(&f, kk, 8, seed);
        let audit = g.count_audit(&[]);
        prop_assert!(audit.passed(), "{:?}", audit.mismatches);
        prop_assert!(g.graph().max_degree() <= (2 * 8 + 3).max(2 * kk + 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solver_agrees_with_exhaustive_search(seed in 0u64..1_000_000) {
        let mut r = rng(seed);
        let n = r.gen_range(3..10);
        let f = random_formula(n, r.gen_range(1..4 * n), 8, &mut r);
        let brute = f.brute_force_satisfying().unwrap();
        match f.solve() {
            Some(a) => prop_assert!(f.first_violated(&a).is_none() && brute.is_some()),
            None => prop_assert!(brute.is_none()),
        }
    }
}
