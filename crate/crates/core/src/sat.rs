//! Compact CDCL solver (two watched literals, 1UIP learning, VSIDS,
//! phase saving, Luby restarts). Used for exact 3-colorability checks.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(var: usize) -> Lit {
        Lit((var as u32) << 1)
    }
    pub fn neg(var: usize) -> Lit {
        Lit(((var as u32) << 1) | 1)
    }
    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }
    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }
    fn idx(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Vec<bool>),
    Unsat,
    /// The conflict budget ran out.
    Unknown,
}

const UNDEF: i8 = -1;

pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<i8>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    heap: VarHeap,
    seen: Vec<bool>,
    unsat: bool,
    conflict_limit: Option<u64>,
    pub conflicts: u64,
}

impl Solver {
    pub fn new(num_vars: usize) -> Solver {
        Solver {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assign: vec![UNDEF; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; num_vars],
            var_inc: 1.0,
            phase: vec![false; num_vars],
            heap: VarHeap::new(num_vars),
            seen: vec![false; num_vars],
            unsat: false,
            conflict_limit: None,
            conflicts: 0,
        }
    }

    pub fn set_conflict_limit(&mut self, limit: Option<u64>) {
        self.conflict_limit = limit;
    }

    fn value(&self, l: Lit) -> i8 {
        let a = self.assign[l.var()];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ (l.is_neg() as i8)
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var();
        self.assign[v] = (!l.is_neg()) as i8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds a clause before solving. Returns false once the formula is
    /// known to be unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        assert_eq!(self.decision_level(), 0, "clauses are added at level 0");
        if self.unsat {
            return false;
        }
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            assert!(l.var() < self.num_vars, "literal variable out of range");
            match self.value(l) {
                1 => return true,
                0 => continue,
                _ => {}
            }
            if c.contains(&!l) {
                return true;
            }
            if !c.contains(&l) {
                c.push(l);
            }
        }
        match c.len() {
            0 => {
                self.unsat = true;
                false
            }
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.unsat = true;
                }
                !self.unsat
            }
            _ => {
                self.attach(c);
                true
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> usize {
        let idx = self.clauses.len();
        self.watches[c[0].idx()].push(idx);
        self.watches[c[1].idx()].push(idx);
        self.clauses.push(c);
        idx
    }

    /// Unit propagation; returns a conflicting clause if one arises.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let ws = std::mem::take(&mut self.watches[false_lit.idx()]);
            let mut keep = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                if self.assign[first.var()] != UNDEF
                    && (self.assign[first.var()] ^ first.is_neg() as i8) == 1
                {
                    keep.push(ci);
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    let l = c[k];
                    let a = self.assign[l.var()];
                    if a == UNDEF || (a ^ l.is_neg() as i8) == 1 {
                        c.swap(1, k);
                        let nl = c[1];
                        self.watches[nl.idx()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                keep.push(ci);
                if self.value(first) == 0 {
                    conflict = Some(ci);
                    keep.extend_from_slice(&ws[i..]);
                    break;
                }
                self.enqueue(first, Some(ci));
            }
            self.watches[false_lit.idx()] = keep;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increase(v, &self.activity);
    }

    fn analyze(&mut self, mut conflict: usize) -> (Vec<Lit>, usize) {
        let mut learnt = vec![Lit(0)];
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            let start = usize::from(p.is_some());
            let lits = self.clauses[conflict][start..].to_vec();
            for q in lits {
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[lit.var()] = false;
            counter -= 1;
            if counter == 0 {
                break;
            }
            conflict = self.reason[lit.var()].expect("implied literal has a reason");
        }
        learnt[0] = !p.unwrap();
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var()] > self.level[learnt[max_i].var()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var()];
        }
        for l in &learnt {
            self.seen[l.var()] = false;
        }
        (learnt, bt)
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let start = self.trail_lim[lvl];
        for i in (start..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var();
            self.phase[v] = !l.is_neg();
            self.assign[v] = UNDEF;
            self.reason[v] = None;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(lvl);
        self.qhead = start;
    }

    pub fn solve(&mut self) -> SolveResult {
        if self.unsat {
            return SolveResult::Unsat;
        }
        for v in 0..self.num_vars {
            if self.assign[v] == UNDEF {
                self.heap.insert(v, &self.activity);
            }
        }
        let mut restart_round = 0u32;
        loop {
            let budget = 100 * luby(restart_round);
            restart_round += 1;
            match self.search(budget) {
                Some(r) => return r,
                None => self.cancel_until(0),
            }
        }
    }

    /// Runs until a result or `budget` conflicts (then `None`: restart).
    fn search(&mut self, budget: u64) -> Option<SolveResult> {
        let mut local = 0u64;
        loop {
            if let Some(conflict) = self.propagate() {
                self.conflicts += 1;
                local += 1;
                if self.decision_level() == 0 {
                    self.unsat = true;
                    return Some(SolveResult::Unsat);
                }
                let (learnt, bt) = self.analyze(conflict);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(asserting, Some(ci));
                }
                self.var_inc /= 0.95;
                if let Some(limit) = self.conflict_limit {
                    if self.conflicts >= limit {
                        self.cancel_until(0);
                        return Some(SolveResult::Unknown);
                    }
                }
            } else {
                if local >= budget {
                    return None;
                }
                let next = loop {
                    match self.heap.pop(&self.activity) {
                        Some(v) if self.assign[v] == UNDEF => break Some(v),
                        Some(_) => continue,
                        None => break None,
                    }
                };
                let Some(v) = next else {
                    let model = self.assign.iter().map(|&a| a == 1).collect();
                    return Some(SolveResult::Sat(model));
                };
                self.trail_lim.push(self.trail.len());
                let lit = if self.phase[v] {
                    Lit::pos(v)
                } else {
                    Lit::neg(v)
                };
                self.enqueue(lit, None);
            }
        }
    }
}

/// Luby restart sequence 1, 1, 2, 1, 1, 2, 4, ...
fn luby(mut i: u32) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < u64::from(i) + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = u64::from(i);
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    i = seq;
    1u64 << i
}

/// Max-heap of variables keyed by activity, with position index.
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn new(n: usize) -> Self {
        VarHeap {
            heap: Vec::with_capacity(n),
            pos: vec![None; n],
        }
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.pos[v].is_some() {
            return;
        }
        self.pos[v] = Some(self.heap.len());
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn increase(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.pos[v] {
            self.sift_up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0]] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if act[self.heap[parent]] >= act[v] {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let len = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= len {
                break;
            }
            let r = l + 1;
            let c = if r < len && act[self.heap[r]] > act[self.heap[l]] {
                r
            } else {
                l
            };
            if act[self.heap[c]] <= act[v] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i]] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }
}
