//! Goal-oriented rule-based search for local solutions of flat problems.
//!
//! Eager rules are applied first; when none applies, the first unsolved
//! statement is branched on with the nondeterministic rules. Every branch
//! that solves all statements yields the substitution induced by its
//! assignment.

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::local::{Assignment, AtomUniverse};
use crate::normalize::FlatProblem;
use crate::term::{subsumes, Atom, Concept, Statement, StatementKind, Substitution, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GoalRule {
    EagerGroundSolving,
    EagerSolving,
    EagerExtension,
    EagerTopSolving,
    EagerLeftDecomposition,
    EagerAtomicDecomposition,
    Decomposition,
    Extension,
    LocalExtension,
}

impl fmt::Display for GoalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GoalRule::EagerGroundSolving => "Eager Ground Solving",
            GoalRule::EagerSolving => "Eager Solving",
            GoalRule::EagerExtension => "Eager Extension",
            GoalRule::EagerTopSolving => "Eager Top Solving",
            GoalRule::EagerLeftDecomposition => "Eager Left Decomposition",
            GoalRule::EagerAtomicDecomposition => "Eager Atomic Decomposition",
            GoalRule::Decomposition => "Decomposition",
            GoalRule::Extension => "Extension",
            GoalRule::LocalExtension => "Local Extension",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoalStep {
    pub rule: GoalRule,
    pub statement: Statement,
    pub choice: Option<String>,
}

impl fmt::Display for GoalStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on `{}`", self.rule, self.statement)?;
        if let Some(c) = &self.choice {
            write!(f, " [{c}]")?;
        }
        Ok(())
    }
}

/// Subsumptions with a variable on the right and dissubsumptions `X !<= D`
/// with `D` a non-variable atom.
pub fn initially_solved(s: &Statement) -> bool {
    match s.kind {
        StatementKind::Sub => s.rhs.as_var().is_some(),
        StatementKind::Dissub => {
            s.lhs.as_var().is_some() && s.rhs.as_atom().is_some_and(|a| !a.is_var())
        }
    }
}

/// The variable whose assignment an initially solved statement constrains.
fn constrained_var(s: &Statement) -> Option<&Symbol> {
    if !initially_solved(s) {
        return None;
    }
    match s.kind {
        StatementKind::Sub => s.rhs.as_var(),
        StatementKind::Dissub => s.lhs.as_var(),
    }
}

#[derive(Clone, Debug)]
pub struct GoalState {
    pub gamma: Vec<(Statement, bool)>,
    index: HashMap<Statement, usize>,
    pub assignment: Assignment,
    pub trace: Vec<GoalStep>,
}

pub enum EagerOutcome {
    Progress,
    Fail,
    NoEagerApplicable,
}

impl GoalState {
    pub fn new(problem: &FlatProblem, universe: &AtomUniverse) -> GoalState {
        let mut st = GoalState {
            gamma: Vec::new(),
            index: HashMap::new(),
            assignment: Assignment::empty(&universe.vars),
            trace: Vec::new(),
        };
        for s in &problem.statements {
            st.add(s.clone());
        }
        st
    }

    /// Adds `s` unless present. New initially solved statements are
    /// expanded against the current assignment.
    pub fn add(&mut self, s: Statement) {
        if self.index.contains_key(&s) {
            return;
        }
        let solved = initially_solved(&s);
        self.index.insert(s.clone(), self.gamma.len());
        self.gamma.push((s.clone(), solved));
        if let Some(x) = constrained_var(&s) {
            let set: Vec<Atom> = self.assignment.get(x).into_iter().flatten().cloned().collect();
            for e in set {
                self.add_expansion(&s, e);
            }
        }
    }

    fn add_expansion(&mut self, s: &Statement, e: Atom) {
        let e = Concept::atom(e);
        match s.kind {
            StatementKind::Sub => self.add(Statement::sub(s.lhs.clone(), e)),
            StatementKind::Dissub => self.add(Statement::dissub(e, s.rhs.clone())),
        }
    }

    /// Adds the expansion of every initially solved statement about `x`.
    pub fn expand(&mut self, x: &Symbol) {
        let set: Vec<Atom> = self.assignment.get(x).into_iter().flatten().cloned().collect();
        let about_x: Vec<Statement> = self
            .gamma
            .iter()
            .filter(|(s, _)| constrained_var(s) == Some(x))
            .map(|(s, _)| s.clone())
            .collect();
        for s in &about_x {
            for e in &set {
                self.add_expansion(s, e.clone());
            }
        }
    }

    fn expand_if_var(&mut self, c: &Concept) {
        if let Some(x) = c.as_var() {
            let x = x.clone();
            self.expand(&x);
        }
    }

    /// Adds `d` to `S_x`; false if this makes the assignment cyclic.
    fn extend(&mut self, x: &Symbol, d: Atom) -> bool {
        self.assignment.insert(x, d);
        self.assignment.is_acyclic()
    }

    fn solve(&mut self, i: usize, rule: GoalRule, choice: Option<String>) {
        self.gamma[i].1 = true;
        self.trace.push(GoalStep {
            rule,
            statement: self.gamma[i].0.clone(),
            choice,
        });
    }

    pub fn all_solved(&self) -> bool {
        self.gamma.iter().all(|(_, solved)| *solved)
    }

    fn in_set(&self, c: &Atom, d: &Atom) -> bool {
        c.as_var().is_some_and(|x| self.assignment.contains(x, d))
    }

    /// The first eager rule, in priority order, applicable to `s`.
    fn eager_rule(&self, s: &Statement) -> Option<GoalRule> {
        if s.is_ground() {
            return Some(GoalRule::EagerGroundSolving);
        }
        if let Some(d) = s.rhs.as_atom() {
            if s.lhs.atoms().iter().any(|c| c == d || self.in_set(c, d)) {
                return Some(GoalRule::EagerSolving);
            }
        }
        if s.is_sub() && s.rhs.as_atom().is_some() && self.extension_index(s).is_some() {
            return Some(GoalRule::EagerExtension);
        }
        if s.is_sub() {
            return None;
        }
        if s.rhs.is_top() {
            return Some(GoalRule::EagerTopSolving);
        }
        let rhs_non_var = s.rhs.as_atom().is_some_and(|a| !a.is_var());
        if s.lhs.atoms().len() != 1 && rhs_non_var {
            return Some(GoalRule::EagerLeftDecomposition);
        }
        if s.lhs.as_atom().is_some_and(|a| !a.is_var()) && rhs_non_var {
            return Some(GoalRule::EagerAtomicDecomposition);
        }
        None
    }

    fn extension_index(&self, s: &Statement) -> Option<usize> {
        let atoms = s.lhs.atoms();
        (0..atoms.len()).find(|&i| {
            atoms[i].as_var().is_some_and(|x| {
                atoms
                    .iter()
                    .enumerate()
                    .all(|(j, c)| j == i || self.assignment.contains(x, c))
            })
        })
    }

    /// Applies one eager rule to the first unsolved statement that has one.
    pub fn eager_step(&mut self) -> EagerOutcome {
        let found = self
            .gamma
            .iter()
            .enumerate()
            .filter(|(_, (_, solved))| !solved)
            .find_map(|(i, (s, _))| self.eager_rule(s).map(|r| (i, r)));
        let Some((i, rule)) = found else {
            return EagerOutcome::NoEagerApplicable;
        };
        let s = self.gamma[i].0.clone();
        match rule {
            GoalRule::EagerGroundSolving => {
                let holds = subsumes(&s.lhs, &s.rhs);
                if holds != s.is_sub() {
                    return EagerOutcome::Fail;
                }
            }
            GoalRule::EagerSolving => {
                if s.is_dissub() {
                    return EagerOutcome::Fail;
                }
            }
            GoalRule::EagerExtension => {
                let k = self.extension_index(&s).unwrap();
                let x = s.lhs.atoms()[k].as_var().unwrap().clone();
                let d = s.rhs.as_atom().unwrap().clone();
                if !self.extend(&x, d) {
                    return EagerOutcome::Fail;
                }
                self.expand(&x);
            }
            GoalRule::EagerTopSolving => return EagerOutcome::Fail,
            GoalRule::EagerLeftDecomposition => {
                for c in s.lhs.atoms() {
                    let c = Concept::atom(c.clone());
                    self.add(Statement::dissub(c.clone(), s.rhs.clone()));
                    self.expand_if_var(&c);
                }
            }
            GoalRule::EagerAtomicDecomposition => {
                let (c, d) = (&s.lhs.atoms()[0], &s.rhs.atoms()[0]);
                if c.is_ground() && d.is_ground() {
                    let holds = subsumes(&s.lhs, &s.rhs);
                    if holds {
                        return EagerOutcome::Fail;
                    }
                } else if let (Atom::Exists(r, c1), Atom::Exists(q, d1)) = (c, d) {
                    if r == q {
                        self.add(Statement::dissub(c1.clone(), d1.clone()));
                        if d1.as_var().is_none() {
                            self.expand_if_var(c1);
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        self.solve(i, rule, None);
        EagerOutcome::Progress
    }

    /// Successor states for the nondeterministic rules applied to the first
    /// unsolved statement. Empty if none applies or every choice fails.
    pub fn nondet_branches(&self, at_nv: &[Atom]) -> Vec<GoalState> {
        let Some(i) = self.gamma.iter().position(|(_, solved)| !solved) else {
            return Vec::new();
        };
        let s = self.gamma[i].0.clone();
        let mut out = Vec::new();
        match s.kind {
            StatementKind::Sub => {
                let Some(d) = s.rhs.as_atom() else {
                    return out;
                };
                if let Atom::Exists(role, d1) = d {
                    for c in s.lhs.atoms() {
                        if let Atom::Exists(r, c1) = c {
                            if r == role {
                                let mut st = self.clone();
                                st.add(Statement::sub(c1.clone(), d1.clone()));
                                st.expand_if_var(d1);
                                st.solve(i, GoalRule::Decomposition, Some(format!("atom {c}")));
                                out.push(st);
                            }
                        }
                    }
                }
                for c in s.lhs.atoms() {
                    if let Some(x) = c.as_var() {
                        let mut st = self.clone();
                        if !st.extend(x, d.clone()) {
                            continue;
                        }
                        st.expand(x);
                        st.solve(i, GoalRule::Extension, Some(format!("add {d} to S_{x}")));
                        out.push(st);
                    }
                }
            }
            StatementKind::Dissub => {
                let Some(x) = s.rhs.as_var() else {
                    return out;
                };
                for d in at_nv {
                    let mut st = self.clone();
                    if !st.extend(x, d.clone()) {
                        continue;
                    }
                    let dc = Concept::atom(d.clone());
                    st.add(Statement::dissub(s.lhs.clone(), dc));
                    st.expand(x);
                    st.expand_if_var(&s.lhs);
                    st.solve(i, GoalRule::LocalExtension, Some(format!("add {d} to S_{x}")));
                    out.push(st);
                }
            }
        }
        out
    }
}

/// All ways of choosing one right-hand atom for every dissubsumption.
/// Empty if some dissubsumption has `top` on the right.
pub fn prepare_goal_input(f: &FlatProblem) -> Vec<FlatProblem> {
    let fixed: Vec<Statement> = f
        .statements
        .iter()
        .filter(|s| s.is_sub() || s.rhs.atoms().len() == 1)
        // `C <= top` always holds.
        .filter(|s| !(s.is_sub() && s.rhs.is_top()))
        .cloned()
        .collect();
    let multi: Vec<&Statement> = f
        .statements
        .iter()
        .filter(|s| s.is_dissub() && s.rhs.atoms().len() != 1)
        .collect();
    if multi.is_empty() {
        return vec![f.with_statements(fixed)];
    }
    multi
        .iter()
        .map(|s| {
            s.rhs
                .atoms()
                .iter()
                .map(|d| Statement::dissub(s.lhs.clone(), Concept::atom(d.clone())))
                .collect::<Vec<_>>()
        })
        .multi_cartesian_product()
        .map(|choice| f.with_statements(fixed.iter().cloned().chain(choice)))
        .collect()
}

/// Upper bound on rule applications per branch: every application solves a
/// statement, and only this many distinct statements can arise.
pub fn step_budget(gamma0: usize, universe: &AtomUniverse) -> usize {
    let at = universe.at.len();
    gamma0 * (1 + 2 * universe.at_nv.len()) + 2 * at * at
}

#[derive(Clone, Debug)]
pub struct GoalSolution {
    pub assignment: Assignment,
    pub substitution: Substitution,
    pub trace: Vec<GoalStep>,
}

/// Depth-first search over all prepared inputs, yielding one solution per
/// successful branch.
pub struct GoalSearch {
    universe: AtomUniverse,
    pending: std::vec::IntoIter<FlatProblem>,
    stack: Vec<GoalState>,
    budget: usize,
    done: bool,
    deadline: Option<Instant>,
}

impl GoalSearch {
    pub fn universe(&self) -> &AtomUniverse {
        &self.universe
    }

    pub fn with_deadline(mut self, deadline: Option<Instant>) -> GoalSearch {
        self.deadline = deadline;
        self
    }

    fn run_eager(&self, st: &mut GoalState) -> Result<bool> {
        loop {
            if st.trace.len() > self.budget {
                return Err(Error::StepBudgetExceeded(self.budget));
            }
            match st.eager_step() {
                EagerOutcome::Progress => {}
                EagerOutcome::Fail => return Ok(false),
                EagerOutcome::NoEagerApplicable => return Ok(true),
            }
        }
    }
}

impl Iterator for GoalSearch {
    type Item = Result<GoalSolution>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            if self.deadline.is_some_and(|d| Instant::now() >= d) {
                self.done = true;
                return Some(Err(Error::Timeout));
            }
            let Some(mut st) = self.stack.pop() else {
                let p = self.pending.next()?;
                self.budget = step_budget(p.statements.len(), &self.universe);
                self.stack.push(GoalState::new(&p, &self.universe));
                continue;
            };
            match self.run_eager(&mut st) {
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Ok(false) => continue,
                Ok(true) => {}
            }
            if st.all_solved() {
                let substitution = match st.assignment.induced_substitution() {
                    Ok(s) => s,
                    Err(e) => {
                        self.done = true;
                        return Some(Err(e));
                    }
                };
                return Some(Ok(GoalSolution {
                    assignment: st.assignment,
                    substitution,
                    trace: st.trace,
                }));
            }
            let succ = st.nondet_branches(&self.universe.at_nv);
            self.stack.extend(succ.into_iter().rev());
        }
    }
}

/// Runs the goal-oriented search on `f`. Dissubsumptions with several
/// right-hand atoms are split first; the atoms of `f` are used throughout.
pub fn solve_goal_oriented(f: &FlatProblem) -> GoalSearch {
    GoalSearch {
        universe: AtomUniverse::of(f),
        pending: prepare_goal_input(f).into_iter(),
        stack: Vec::new(),
        budget: 0,
        done: false,
        deadline: None,
    }
}
