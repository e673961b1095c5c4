mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use common::cnf::*;
use common::rng;
use dppmle::coloring::decode::rotate;
use dppmle::coloring::discrete::clause_gadget_completable;
use dppmle::coloring::geometry::*;
use dppmle::coloring::vector::vectors_from_json_str;
use dppmle::coloring::*;
use dppmle::linalg::{normalize3, Vec3};
use dppmle::reduction::*;
use dppmle::{Error, Graph};
use proptest::prelude::*;
use rand::Rng;

fn bot(f: &CnfFormula, k: usize, d: usize, seed: u64) -> BotGraph {
    let e = build_expander(2 * k * f.n_vars(), d, seed, 200).unwrap();
    BotGraph::build(f, k, e).unwrap()
}

#[test]
fn proper_checks() {
    let k3 = Graph::complete(3);
    assert!(check_proper(&k3, &[1, 2, 3]).unwrap().proper);
    assert_eq!(
        check_proper(&k3, &[1, 1, 3]).unwrap().monochromatic,
        vec![0]
    );
    assert!(matches!(
        check_proper(&k3, &[1, 2]),
        Err(Error::Validation(_))
    ));
    assert!(find_three_coloring(&Graph::complete(4), None)
        .unwrap()
        .is_none());
    let c = find_three_coloring(&k3, None).unwrap().unwrap();
    assert!(check_proper(&k3, &c).unwrap().proper);
}

#[test]
fn triangle_kernel() {
    let k3 = Graph::complete(3);
    let f = coloring_to_kernel(&k3, &[1, 2, 3]).unwrap();
    let k = f.kernel().unwrap();
    let ev = k.eigenvalues();
    assert_relative_eq!(ev[5], 1.0, epsilon = 1e-12);
    assert!(k.validate(1e-9).passed);
    let d = k3.lift_to_hypergraph().unwrap();
    let opt = optimal_value(&k3).unwrap();
    assert_relative_eq!(opt, 3.0 * 3f64.ln() - 2.0 * 2f64.ln(), epsilon = 1e-12);
    assert_relative_eq!(k.log_likelihood(&d).unwrap(), opt, epsilon = 1e-9);
    assert_relative_eq!(f.log_likelihood(&d).unwrap(), opt, epsilon = 1e-9);
    assert!(coloring_to_kernel(&k3, &[1, 1, 2]).is_err());
}

#[test]
fn vector_examples() {
    let p2 = Graph::new(2, vec![(0, 1)]).unwrap();
    let s = 0.5f64.sqrt();
    assert_relative_eq!(
        vector_error(&p2, &[[1.0, 0.0, 0.0], [s, s, 0.0]]).unwrap(),
        0.5,
        epsilon = 1e-12
    );
    assert!(vector_error(&p2, &[[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).is_err());
    let k3 = Graph::complete(3);
    let opt = optimal_value(&k3).unwrap();
    let mut v = discrete_to_vectors(&[1, 2, 3]);
    assert_eq!(vector_error(&k3, &v).unwrap(), 0.0);
    assert_relative_eq!(
        likelihood_from_angles(&k3, &v).unwrap(),
        opt,
        epsilon = 1e-12
    );
    // Tilt vertex 1 to 60° from vertex 0, inside their plane.
    v[1] = [0.5, 3f64.sqrt() / 2.0, 0.0];
    let expect = opt - (1.0 / 3.0) * (0.75f64).ln();
    assert_relative_eq!(
        likelihood_from_angles(&k3, &v).unwrap(),
        expect,
        epsilon = 1e-12
    );
    v[1] = v[0];
    assert_eq!(likelihood_from_angles(&k3, &v).unwrap(), f64::INFINITY);
    assert!(vectors_from_json_str(r#"{"vectors":{"0":[1,0,0],"2":[0,1,0]}}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn angle_likelihood_matches_kernel(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let n = r.gen_range(3..7);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if r.gen_bool(0.5) {
                    edges.push((u, v));
                }
            }
        }
        prop_assume!(!edges.is_empty());
        let g = Graph::new(n, edges).unwrap();
        let vecs: Vec<Vec3> = (0..n)
            .map(|_| normalize3(&[r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)]).unwrap())
            .collect();
        let d = g.lift_to_hypergraph().unwrap();
        let a = likelihood_from_angles(&g, &vecs).unwrap();
        let f = assemble_factor(&g, &vecs).unwrap();
        let dense = dppmle::MarginalKernel::from_matrix(dppmle::linalg::gram(f.q())).unwrap().log_likelihood(&d).unwrap();
        prop_assert!((a - dense).abs() < 1e-8 * a.abs().max(1.0), "{} vs {}", a, dense);
        prop_assert!(vector_error(&g, &vecs).unwrap() >= 0.0);
    }
}

#[test]
fn assignment_coloring_is_proper() {
    let f = CnfFormula::parse_dimacs("1 -2 3 0\n-1 2 -3 0\n").unwrap();
    let g = bot(&f, 2, 3, 4);
    let a = f.brute_force_satisfying().unwrap().unwrap();
    let c = assignment_to_coloring(&g, &a).unwrap();
    assert!(check_proper(g.graph(), &c).unwrap().proper);
    let bad = vec![false, true, false];
    assert!(matches!(
        assignment_to_coloring(&g, &bad),
        Err(Error::UnsatisfiedClause { clause: 0, .. })
    ));
}

#[test]
fn clause_gadget_needs_a_true_literal() {
    assert!(!clause_gadget_completable([2, 2, 2]));
    for c in [[1, 2, 2], [2, 1, 2], [2, 2, 1], [1, 1, 1], [1, 1, 2]] {
        assert!(clause_gadget_completable(c));
    }
}

#[test]
fn unsat_formula_graph_is_not_colorable() {
    let f = full_unsat();
    assert!(f.brute_force_satisfying().unwrap().is_none());
    let g = bot(&f, 8, 8, 3);
    assert!(find_three_coloring(g.graph(), Some(2_000_000))
        .unwrap()
        .is_none());
}

fn noisy(v: &[Vec3], eps: f64, r: &mut rand_chacha::ChaCha8Rng) -> Vec<Vec3> {
    v.iter()
        .map(|x| {
            let axis = normalize3(&[
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
            ])
            .unwrap();
            normalize3(&rotate(x, &axis, r.gen_range(0.0..eps))).unwrap()
        })
        .collect()
}

#[test]
fn decode_exact_and_noisy() {
    let f =
        CnfFormula::parse_dimacs("p cnf 6 4\n1 2 -3 0\n-1 4 5 0\n3 -4 6 0\n-2 -5 -6 0\n").unwrap();
    let g = bot(&f, 2, 8, 21);
    let a = f.brute_force_satisfying().unwrap().unwrap();
    let c = assignment_to_coloring(&g, &a).unwrap();
    let vecs = discrete_to_vectors(&c);
    let out = decode_assignment(&g, &vecs, &DecoderParams::default()).unwrap();
    assert_eq!(out.satisfied_clauses, f.m());
    assert!(out.region_violations.is_empty());
    assert_eq!(out.bad_edges, 0);
    let mut r = rng(5);
    let noisy = noisy(&vecs, 1e-3, &mut r);
    let out = decode_assignment(&g, &noisy, &DecoderParams::default()).unwrap();
    assert_eq!(out.satisfied_clauses, f.m());
    // A global rotation changes nothing.
    let axis = normalize3(&[1.0, 2.0, 3.0]).unwrap();
    let rotated: Vec<Vec3> = vecs.iter().map(|x| rotate(x, &axis, 1.1)).collect();
    let out = decode_assignment(&g, &rotated, &DecoderParams::default()).unwrap();
    assert_eq!(
        out.assignment,
        decode_assignment(&g, &vecs, &DecoderParams::default())
            .unwrap()
            .assignment
    );
}

#[test]
fn decoder_params_validated() {
    let p = DecoderParams {
        slack: 0.1,
        ..Default::default()
    };
    assert!(matches!(p.validate(), Err(Error::Parameter(_))));
    assert!(DecoderParams::with_log_slack(0.02, 1000).validate().is_ok());
}

#[test]
fn decode_with_total_trimming_fails() {
    let f = CnfFormula::parse_dimacs("p cnf 3 1\n1 2 3 0\n").unwrap();
    let g = bot(&f, 1, 2, 7);
    let a = f.brute_force_satisfying().unwrap().unwrap();
    let vecs = discrete_to_vectors(&assignment_to_coloring(&g, &a).unwrap());
    assert!(matches!(
        decode_assignment(&g, &vecs, &DecoderParams::default()),
        Err(Error::Decode(_))
    ));
    let loose = DecoderParams {
        trim_threshold: Some(1.0),
        ..Default::default()
    };
    assert_eq!(
        decode_assignment(&g, &vecs, &loose)
            .unwrap()
            .satisfied_clauses,
        1
    );
}

#[test]
fn quadruple_claim() {
    let r = check_quadruple_claim(20_000, 1);
    assert_eq!(r.counterexamples, 0, "{r:?}");
    // Without the ⟨d,c⟩ premise the claim fails: d = c.
    let a = [1.0, 0.0, 0.0];
    let b = [0.0, 1.0, 0.0];
    let c = [0.0, 0.0, 1.0];
    assert!(quadruple_premise(&a, &b, &c, &c) >= 1.0);
}

#[test]
fn clause_grid_search() {
    let tau = 1.01 * PI / 300.0;
    let r = clause_gadget_grid_search(5.0, tau, 0.98);
    assert!(!r.counterexample_possible, "{r:?}");
    assert!(r.literal_configs > 0 && r.aux_configs > 0);
    let control = clause_gadget_grid_search(5.0, tau, 1.0);
    assert!(control.counterexample_possible);
}
