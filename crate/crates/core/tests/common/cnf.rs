use dppmle::reduction::CnfFormula;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random 3-CNF over `n` variables, each occurring at most `k` times.
pub fn random_formula(n: usize, m: usize, k: usize, r: &mut ChaCha8Rng) -> CnfFormula {
    let mut occ = vec![0usize; n];
    let mut clauses = Vec::new();
    for _ in 0..m {
        let avail: Vec<usize> = (0..n).filter(|&v| occ[v] < k).collect();
        if avail.len() < 3 {
            break;
        }
        let mut pick = Vec::new();
        while pick.len() < 3 {
            let v = avail[r.gen_range(0..avail.len())];
            if !pick.contains(&v) {
                pick.push(v);
            }
        }
        let mut c = [0i64; 3];
        for (p, &v) in pick.iter().enumerate() {
            occ[v] += 1;
            c[p] = if r.gen_bool(0.5) {
                v as i64 + 1
            } else {
                -(v as i64 + 1)
            };
        }
        clauses.push(c);
    }
    CnfFormula::from_signed(n, &clauses).unwrap()
}

/// All eight sign patterns over three variables: unsatisfiable.
pub fn full_unsat() -> CnfFormula {
    let mut clauses = Vec::new();
    for mask in 0..8 {
        let s = |b: i64, v: i64| if mask >> b & 1 == 1 { -v } else { v };
        clauses.push([s(0, 1), s(1, 2), s(2, 3)]);
    }
    CnfFormula::from_signed(3, &clauses).unwrap()
}
