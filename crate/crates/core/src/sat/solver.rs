//! A small CDCL solver: two watched literals, first-UIP clause learning,
//! activity-based branching with phase saving, and geometric restarts.
//! Clauses may be added between calls to [`Solver::solve`].

use std::time::Instant;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    /// Values for variables `1..=n`; index 0 is unused.
    Sat(Vec<bool>),
    Unsat,
}

// Internal literals: 2 * var + (1 if negative).
type Lit = u32;

fn lit_of(dimacs: i32) -> Lit {
    let v = dimacs.unsigned_abs() - 1;
    2 * v + u32::from(dimacs < 0)
}

fn var(l: Lit) -> usize {
    (l >> 1) as usize
}

fn neg(l: Lit) -> Lit {
    l ^ 1
}

pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    value: Vec<Option<bool>>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    deadline: Option<Instant>,
    pub conflicts: u64,
}

impl Solver {
    pub fn new(num_vars: usize) -> Solver {
        Solver {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            value: vec![None; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; num_vars],
            inc: 1.0,
            phase: vec![false; num_vars],
            seen: vec![false; num_vars],
            ok: true,
            deadline: None,
            conflicts: 0,
        }
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.value[var(l)].map(|v| v != (l & 1 == 1))
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn assign(&mut self, l: Lit, reason: Option<usize>) {
        let v = var(l);
        self.value[v] = Some(l & 1 == 0);
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let start = self.trail_lim[lvl];
        for &l in &self.trail[start..] {
            let v = var(l);
            self.phase[v] = l & 1 == 0;
            self.value[v] = None;
            self.reason[v] = None;
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(lvl);
        self.qhead = self.trail.len();
    }

    /// Adds a clause of DIMACS literals. Returns false once the formula is
    /// known to be unsatisfiable.
    pub fn add_clause(&mut self, lits: &[i32]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len());
        for &d in lits {
            assert!(d != 0 && d.unsigned_abs() as usize <= self.num_vars, "literal {d} out of range");
            let l = lit_of(d);
            match self.lit_value(l) {
                Some(true) => return true,
                Some(false) => {}
                None => {
                    if c.contains(&neg(l)) {
                        return true;
                    }
                    if !c.contains(&l) {
                        c.push(l);
                    }
                }
            }
        }
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.assign(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c);
            }
        }
        self.ok
    }

    fn attach(&mut self, c: Vec<Lit>) -> usize {
        let i = self.clauses.len();
        self.watches[c[0] as usize].push(i);
        self.watches[c[1] as usize].push(i);
        self.clauses.push(c);
        i
    }

    /// Unit propagation; returns a conflicting clause if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = neg(p);
            let ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut keep = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut idx = 0;
            while idx < ws.len() {
                let ci = ws[idx];
                idx += 1;
                if conflict.is_some() {
                    keep.push(ci);
                    continue;
                }
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                if self.value[var(first)].map(|v| v != (first & 1 == 1)) == Some(true) {
                    keep.push(ci);
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    let l = c[k];
                    let val = self.value[var(l)].map(|v| v != (l & 1 == 1));
                    if val != Some(false) {
                        c.swap(1, k);
                        let w = c[1];
                        self.watches[w as usize].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                keep.push(ci);
                match self.lit_value(first) {
                    Some(false) => conflict = Some(ci),
                    _ => self.assign(first, Some(ci)),
                }
            }
            let slot = &mut self.watches[false_lit as usize];
            keep.append(slot);
            *slot = keep;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.inc *= 1e-100;
        }
    }

    /// First-UIP learning. Returns the learnt clause (asserting literal
    /// first) and the backjump level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut counter = 0;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        loop {
            let start = usize::from(p.is_some());
            let clause = self.clauses[confl].clone();
            for &q in &clause[start..] {
                let v = var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= self.decision_level() {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[var(self.trail[index])] {
                    break;
                }
            }
            let lit = self.trail[index];
            self.seen[var(lit)] = false;
            counter -= 1;
            p = Some(lit);
            if counter == 0 {
                break;
            }
            confl = self.reason[var(lit)].expect("implied literal has a reason");
        }
        learnt[0] = neg(p.unwrap());
        for &l in &learnt[1..] {
            self.seen[var(l)] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[var(learnt[i])] > self.level[var(learnt[max_i])] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[var(learnt[1])];
        }
        (learnt, bt)
    }

    fn pick_branch(&self) -> Option<Lit> {
        let mut best: Option<usize> = None;
        for v in 0..self.num_vars {
            if self.value[v].is_none() && best.is_none_or(|b| self.activity[v] > self.activity[b]) {
                best = Some(v);
            }
        }
        best.map(|v| 2 * v as u32 + u32::from(!self.phase[v]))
    }

    fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::Timeout),
            _ => Ok(()),
        }
    }

    pub fn solve(&mut self) -> Result<SatResult> {
        if !self.ok {
            return Ok(SatResult::Unsat);
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return Ok(SatResult::Unsat);
        }
        let mut restart_limit = 100.0;
        let mut since_restart = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                since_restart += 1;
                if self.conflicts.is_multiple_of(256) {
                    self.check_deadline()?;
                }
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Ok(SatResult::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.assign(learnt[0], None);
                } else {
                    let l0 = learnt[0];
                    let ci = self.attach(learnt);
                    self.assign(l0, Some(ci));
                }
                self.inc *= 1.05;
            } else {
                if since_restart as f64 >= restart_limit {
                    since_restart = 0;
                    restart_limit *= 1.5;
                    self.cancel_until(0);
                    self.check_deadline()?;
                    continue;
                }
                match self.pick_branch() {
                    None => {
                        let mut model = vec![false; self.num_vars + 1];
                        for v in 0..self.num_vars {
                            model[v + 1] = self.value[v] == Some(true);
                        }
                        return Ok(SatResult::Sat(model));
                    }
                    Some(l) => {
                        self.trail_lim.push(self.trail.len());
                        self.assign(l, None);
                    }
                }
            }
        }
    }
}

/// Whether `model` (indexed from 1) satisfies every clause.
pub fn satisfies(clauses: &[Vec<i32>], model: &[bool]) -> bool {
    clauses
        .iter()
        .all(|c| c.iter().any(|&l| model[l.unsigned_abs() as usize] == (l > 0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solve(n: usize, clauses: &[Vec<i32>]) -> SatResult {
        let mut s = Solver::new(n);
        for c in clauses {
            s.add_clause(c);
        }
        s.solve().unwrap()
    }

    fn brute(n: usize, clauses: &[Vec<i32>]) -> bool {
        (0..1u32 << n).any(|bits| {
            let model: Vec<bool> = (0..=n).map(|v| v > 0 && bits >> (v - 1) & 1 == 1).collect();
            satisfies(clauses, &model)
        })
    }

    #[test]
    fn trivial() {
        assert_eq!(solve(1, &[vec![1]]), SatResult::Sat(vec![false, true]));
        assert_eq!(solve(1, &[vec![1], vec![-1]]), SatResult::Unsat);
        assert!(matches!(solve(0, &[]), SatResult::Sat(_)));
        assert_eq!(solve(1, &[vec![]]), SatResult::Unsat);
    }

    #[test]
    fn pigeonhole_3_into_2() {
        // p(i, j): pigeon i in hole j.
        let p = |i: i32, j: i32| 2 * i + j + 1;
        let mut cl = Vec::new();
        for i in 0..3 {
            cl.push(vec![p(i, 0), p(i, 1)]);
        }
        for j in 0..2 {
            for a in 0..3 {
                for b in a + 1..3 {
                    cl.push(vec![-p(a, j), -p(b, j)]);
                }
            }
        }
        assert_eq!(solve(6, &cl), SatResult::Unsat);
    }

    #[test]
    fn agrees_with_truth_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..400 {
            let n = rng.gen_range(1..=8);
            let m = rng.gen_range(1..=30);
            let clauses: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    (0..rng.gen_range(1..=3))
                        .map(|_| {
                            let v = rng.gen_range(1..=n as i32);
                            if rng.gen() { v } else { -v }
                        })
                        .collect()
                })
                .collect();
            match solve(n, &clauses) {
                SatResult::Sat(model) => assert!(satisfies(&clauses, &model)),
                SatResult::Unsat => assert!(!brute(n, &clauses), "{clauses:?}"),
            }
        }
    }

    #[test]
    fn incremental_blocking() {
        let mut s = Solver::new(3);
        s.add_clause(&[1, 2, 3]);
        let mut count = 0;
        while let SatResult::Sat(m) = s.solve().unwrap() {
            count += 1;
            let block: Vec<i32> = (1..=3).map(|v| if m[v as usize] { -v } else { v }).collect();
            s.add_clause(&block);
        }
        assert_eq!(count, 7);
    }

    #[test]
    fn expired_deadline() {
        // Large enough to need conflicts.
        let p = |i: i32, j: i32| 8 * i + j + 1;
        let mut cl = Vec::new();
        for i in 0..9 {
            cl.push((0..8).map(|j| p(i, j)).collect());
        }
        for j in 0..8 {
            for a in 0..9 {
                for b in a + 1..9 {
                    cl.push(vec![-p(a, j), -p(b, j)]);
                }
            }
        }
        let mut s = Solver::new(72);
        for c in &cl {
            s.add_clause(c);
        }
        s.set_deadline(Some(Instant::now()));
        assert_eq!(s.solve(), Err(Error::Timeout));
    }
}
