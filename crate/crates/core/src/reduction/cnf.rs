//! 3-CNF formulas and DIMACS input.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sat::{Lit, SolveResult, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Literal {
    /// 0-based variable index.
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn eval(&self, assignment: &[bool]) -> bool {
        assignment[self.var] != self.negated
    }

    fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    n_vars: usize,
    clauses: Vec<[Literal; 3]>,
}

/// Largest formula `brute_force_satisfying` will search.
pub const BRUTE_FORCE_LIMIT: usize = 20;

impl CnfFormula {
    pub fn new(n_vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        for (c, cl) in clauses.iter().enumerate() {
            for (p, l) in cl.iter().enumerate() {
                if l.var >= n_vars {
                    return Err(Error::Validation(format!(
                        "clause {c} uses variable {} but only {n_vars} are declared",
                        l.var + 1
                    )));
                }
                if cl[..p].iter().any(|o| o.var == l.var) {
                    return Err(Error::Validation(format!(
                        "clause {c} repeats variable {}",
                        l.var + 1
                    )));
                }
            }
        }
        Ok(CnfFormula { n_vars, clauses })
    }

    /// Builds a formula from signed 1-based DIMACS literals.
    pub fn from_signed(n_vars: usize, clauses: &[[i64; 3]]) -> Result<Self> {
        let mut out = Vec::with_capacity(clauses.len());
        for (c, cl) in clauses.iter().enumerate() {
            let mut lits = [Literal {
                var: 0,
                negated: false,
            }; 3];
            for (p, &x) in cl.iter().enumerate() {
                if x == 0 {
                    return Err(Error::Validation(format!("clause {c} contains literal 0")));
                }
                lits[p] = Literal {
                    var: (x.unsigned_abs() - 1) as usize,
                    negated: x < 0,
                };
            }
            out.push(lits);
        }
        CnfFormula::new(n_vars, out)
    }

    /// Parses DIMACS CNF. The `p cnf` header is optional; without it the
    /// variable count is the largest variable mentioned.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut clauses: Vec<Vec<i64>> = Vec::new();
        let mut current: Vec<i64> = Vec::new();
        let mut last_line = 0;
        for (ln, line) in text.lines().enumerate() {
            let line_no = ln + 1;
            last_line = line_no;
            let trimmed = line.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('c') {
                continue;
            }
            if trimmed.starts_with('%') {
                break;
            }
            if trimmed.starts_with('p') {
                let parts: Vec<&str> = trimmed.split_whitespace().collect();
                let bad = || Error::Parse {
                    line: line_no,
                    column: 1,
                    message: format!("malformed header `{trimmed}`"),
                };
                if parts.len() != 4 || parts[1] != "cnf" || header.is_some() {
                    return Err(bad());
                }
                let n = parts[2].parse().map_err(|_| bad())?;
                let m = parts[3].parse().map_err(|_| bad())?;
                header = Some((n, m, line_no));
                continue;
            }
            let mut col = 1;
            for tok in line.split_whitespace() {
                col = line[col - 1..].find(tok).map_or(col, |o| col + o);
                let x: i64 = tok.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    column: col,
                    message: format!("expected an integer literal, found `{tok}`"),
                })?;
                if x == 0 {
                    if current.len() != 3 {
                        return Err(Error::Parse {
                            line: line_no,
                            column: col,
                            message: format!(
                                "clause {} has {} literals; exactly 3 are required",
                                clauses.len() + 1,
                                current.len()
                            ),
                        });
                    }
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(x);
                }
                col += tok.len();
            }
        }
        if !current.is_empty() {
            return Err(Error::Parse {
                line: last_line,
                column: 1,
                message: "last clause is not terminated by 0".into(),
            });
        }
        let max_var = clauses
            .iter()
            .flatten()
            .map(|x| x.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let n_vars = match header {
            Some((n, m, line)) => {
                if m != clauses.len() {
                    return Err(Error::Parse {
                        line,
                        column: 1,
                        message: format!(
                            "header mismatch: header declares {m} clauses, found {}",
                            clauses.len()
                        ),
                    });
                }
                if max_var > n {
                    return Err(Error::Parse {
                        line,
                        column: 1,
                        message: format!(
                            "header mismatch: header declares {n} variables, variable {max_var} used"
                        ),
                    });
                }
                n
            }
            None => max_var,
        };
        let arr: Vec<[i64; 3]> = clauses.iter().map(|c| [c[0], c[1], c[2]]).collect();
        CnfFormula::from_signed(n_vars, &arr)
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.n_vars, self.clauses.len());
        for c in &self.clauses {
            s.push_str(&format!(
                "{} {} {} 0\n",
                c[0].to_dimacs(),
                c[1].to_dimacs(),
                c[2].to_dimacs()
            ));
        }
        s
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    /// Occurrences of each variable across all clauses.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ = vec![0; self.n_vars];
        for c in &self.clauses {
            for l in c {
                occ[l.var] += 1;
            }
        }
        occ
    }

    /// Maximum occurrence count of any variable, at least 1.
    pub fn k(&self) -> usize {
        self.occurrences().into_iter().max().unwrap_or(0).max(1)
    }

    /// Index of the first clause falsified by `assignment`, if any.
    pub fn first_violated(&self, assignment: &[bool]) -> Option<usize> {
        self.clauses
            .iter()
            .position(|c| !c.iter().any(|l| l.eval(assignment)))
    }

    pub fn satisfied_count(&self, assignment: &[bool]) -> usize {
        self.clauses
            .iter()
            .filter(|c| c.iter().any(|l| l.eval(assignment)))
            .count()
    }

    /// Exhaustive search over all assignments (first in binary order).
    pub fn brute_force_satisfying(&self) -> Result<Option<Vec<bool>>> {
        if self.n_vars > BRUTE_FORCE_LIMIT {
            return Err(Error::SizeGuard(format!(
                "exhaustive search needs at most {BRUTE_FORCE_LIMIT} variables, got {}",
                self.n_vars
            )));
        }
        for mask in 0u64..(1u64 << self.n_vars) {
            let a: Vec<bool> = (0..self.n_vars).map(|i| mask >> i & 1 == 1).collect();
            if self.first_violated(&a).is_none() {
                return Ok(Some(a));
            }
        }
        Ok(None)
    }

    /// A satisfying assignment from the CDCL solver, if one exists.
    pub fn solve(&self) -> Option<Vec<bool>> {
        let mut s = Solver::new(self.n_vars);
        for c in &self.clauses {
            let lits: Vec<Lit> = c
                .iter()
                .map(|l| {
                    if l.negated {
                        Lit::neg(l.var)
                    } else {
                        Lit::pos(l.var)
                    }
                })
                .collect();
            s.add_clause(&lits);
        }
        match s.solve() {
            SolveResult::Sat(a) => Some(a),
            SolveResult::Unsat => None,
            SolveResult::Unknown => unreachable!("no conflict limit was set"),
        }
    }
}
