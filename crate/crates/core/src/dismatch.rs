//! Reduction of dismatching problems to flat disunification problems.
//!
//! Each run applies decomposition, flattening and solving rules until none
//! applies; runs that do not fail produce a flat problem that is locally
//! solvable iff the input is solvable along that run. All runs are explored
//! depth first.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::normalize::{FlatProblem, Flattener, FreshVars};
use crate::problem::BasicProblem;
use crate::term::{subsumes, Atom, Concept, Statement, StatementKind, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    RightDecomp,
    LeftDecomp,
    AtomicDecomp,
    FlattenRightGroundDissub,
    FlattenLeftGroundSub,
    SolveLeftGroundDissub,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleId::RightDecomp => "Right Decomposition",
            RuleId::LeftDecomp => "Left Decomposition",
            RuleId::AtomicDecomp => "Atomic Decomposition",
            RuleId::FlattenRightGroundDissub => "Flattening Right-Ground Dissubsumptions",
            RuleId::FlattenLeftGroundSub => "Flattening Left-Ground Subsumptions",
            RuleId::SolveLeftGroundDissub => "Solving Left-Ground Dissubsumptions",
        })
    }
}

pub fn is_dismatching_problem(b: &BasicProblem) -> bool {
    b.is_dismatching()
}

fn is_non_var_atom(c: &Concept) -> bool {
    c.as_atom().is_some_and(|a| !a.is_var())
}

/// The rule whose condition matches `s`, if any. At most one does.
pub fn applicable_rule(s: &Statement) -> Option<RuleId> {
    let n = s.lhs.atoms().len();
    match s.kind {
        StatementKind::Sub => {
            let fires = s.rhs.as_var().is_some()
                && s.lhs.is_ground()
                && s.lhs.atoms().iter().any(|a| !a.is_flat());
            fires.then_some(RuleId::FlattenLeftGroundSub)
        }
        StatementKind::Dissub => {
            if s.rhs.atoms().len() != 1 {
                return Some(RuleId::RightDecomp);
            }
            if s.rhs.as_var().is_some() {
                return s.lhs.is_ground().then_some(RuleId::SolveLeftGroundDissub);
            }
            if n != 1 {
                return Some(RuleId::LeftDecomp);
            }
            if is_non_var_atom(&s.lhs) {
                return Some(RuleId::AtomicDecomp);
            }
            match s.rhs.as_atom() {
                Some(Atom::Exists(_, d))
                    if d.is_ground() && !d.as_atom().is_some_and(Atom::is_name) =>
                {
                    Some(RuleId::FlattenRightGroundDissub)
                }
                _ => None,
            }
        }
    }
}

/// `c(s)` when a rule applies to `s`, zero otherwise.
pub fn rule_measure(s: &Statement) -> usize {
    if applicable_rule(s).is_some() {
        s.measure()
    } else {
        0
    }
}

pub fn problem_measure<'a, I: IntoIterator<Item = &'a Statement>>(statements: I) -> usize {
    statements.into_iter().map(rule_measure).sum()
}

/// Flattens subsumptions and the non-ground sides of dissubsumptions.
pub fn pre_flatten_dismatching(b: &BasicProblem) -> Result<FlatProblem> {
    if !b.is_dismatching() {
        return Err(not_dismatching(b));
    }
    let mut fl = Flattener::new(FreshVars::after(&b.signature.variables));
    for s in &b.statements {
        match s.kind {
            StatementKind::Sub => {
                let lhs = fl.term(&s.lhs);
                let rhs = fl.term(&s.rhs);
                fl.sub_split(lhs, &rhs);
            }
            StatementKind::Dissub => {
                let lhs = if s.lhs.is_ground() { s.lhs.clone() } else { fl.term(&s.lhs) };
                let rhs = if s.rhs.is_ground() { s.rhs.clone() } else { fl.term(&s.rhs) };
                fl.out.insert(Statement::dissub(lhs, rhs));
            }
        }
    }
    let mut f = FlatProblem::from_flat(b.clone()).with_statements(fl.out);
    f.definitions = fl.definitions;
    Ok(f)
}

fn not_dismatching(b: &BasicProblem) -> Error {
    let s = b
        .dissubsumptions()
        .find(|s| !s.lhs.is_ground() && !s.rhs.is_ground())
        .map(|s| s.to_string())
        .unwrap_or_default();
    Error::NotDismatching(format!("`{s}` has no ground side"))
}

/// One rule application on a branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: RuleId,
    pub statement: Statement,
    /// The don't-know choice taken, if the rule has any.
    pub choice: Option<String>,
    pub measure_before: usize,
    pub measure_after: usize,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on `{}`", self.rule, self.statement)?;
        if let Some(c) = &self.choice {
            write!(f, " [{c}]")?;
        }
        write!(f, " (c: {} -> {})", self.measure_before, self.measure_after)
    }
}

/// A flat problem produced by a successful run, with the rules applied.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub problem: FlatProblem,
    pub trace: Vec<Step>,
    pub initial_measure: usize,
}

#[derive(Clone)]
struct Branch {
    gamma: BTreeSet<Statement>,
    queue: VecDeque<Statement>,
    fresh: FreshVars,
    cache: BTreeMap<Concept, Symbol>,
    definitions: Vec<(Symbol, Concept)>,
    trace: Vec<Step>,
}

enum Atomic {
    Fail,
    Remove,
    Replace(Statement),
}

fn atomic_decomposition(c: &Atom, d: &Atom) -> Atomic {
    if c.is_ground() && d.is_ground() {
        let holds = subsumes(&Concept::atom(c.clone()), &Concept::atom(d.clone()));
        return if holds { Atomic::Fail } else { Atomic::Remove };
    }
    match (c, d) {
        (Atom::Exists(r, c1), Atom::Exists(s, d1)) if r == s => {
            Atomic::Replace(Statement::dissub(c1.clone(), d1.clone()))
        }
        _ => Atomic::Remove,
    }
}

impl Branch {
    fn add(&mut self, s: Statement) {
        if self.gamma.insert(s.clone()) && applicable_rule(&s).is_some() {
            self.queue.push_back(s);
        }
    }

    fn measure(&self) -> usize {
        problem_measure(&self.gamma)
    }

    fn abbreviation(&mut self, d: &Concept) -> Symbol {
        if let Some(v) = self.cache.get(d) {
            return v.clone();
        }
        let v = self.fresh.next_var();
        self.cache.insert(d.clone(), v.clone());
        self.definitions.push((v.clone(), d.clone()));
        v
    }

    fn record(&mut self, rule: RuleId, s: &Statement, choice: Option<String>, before: usize) {
        let after = self.measure();
        self.trace.push(Step {
            rule,
            statement: s.clone(),
            choice,
            measure_before: before,
            measure_after: after,
        });
        debug_assert!(after < before, "measure did not decrease: {before} -> {after} at {s}");
    }
}

/// Depth-first enumeration of the flat problems produced by successful runs.
/// Problems with identical statement sets are yielded once.
pub struct Reductions {
    origin: BasicProblem,
    constants: Vec<Symbol>,
    roles: Vec<Symbol>,
    stack: Vec<Branch>,
    seen: HashSet<BTreeSet<Statement>>,
    base: FlatProblem,
    initial_measure: usize,
    /// Number of failed branches so far.
    pub failures: usize,
    /// Rule applications performed so far, on all branches.
    pub applications: usize,
    /// Applications that did not decrease the measure.
    pub violations: usize,
    /// Most rule applications on a single branch.
    pub longest_branch: usize,
}

impl Reductions {
    /// The measure of the problem the rules start from.
    pub fn initial_measure(&self) -> usize {
        self.initial_measure
    }

    fn successors(&self, mut br: Branch, s: Statement, rule: RuleId) -> Vec<Branch> {
        let before = br.measure();
        br.gamma.remove(&s);
        let mut out = Vec::new();
        match rule {
            RuleId::RightDecomp => {
                for (i, d) in s.rhs.atoms().iter().enumerate() {
                    let mut b = br.clone();
                    b.add(Statement::dissub(s.lhs.clone(), Concept::atom(d.clone())));
                    b.record(rule, &s, Some(format!("index {}", i + 1)), before);
                    out.push(b);
                }
            }
            RuleId::LeftDecomp => {
                for c in s.lhs.atoms() {
                    br.add(Statement::dissub(Concept::atom(c.clone()), s.rhs.clone()));
                }
                br.record(rule, &s, None, before);
                out.push(br);
            }
            RuleId::AtomicDecomp => {
                let (c, d) = (&s.lhs.atoms()[0], &s.rhs.atoms()[0]);
                match atomic_decomposition(c, d) {
                    Atomic::Fail => {}
                    Atomic::Remove => {
                        br.record(rule, &s, None, before);
                        out.push(br);
                    }
                    Atomic::Replace(t) => {
                        br.add(t);
                        br.record(rule, &s, None, before);
                        out.push(br);
                    }
                }
            }
            RuleId::FlattenRightGroundDissub => {
                let Some(Atom::Exists(r, d)) = s.rhs.as_atom() else {
                    unreachable!()
                };
                let v = br.abbreviation(d);
                br.add(Statement::dissub(
                    s.lhs.clone(),
                    Concept::exists(r.as_str(), Concept::var(v.as_str())),
                ));
                br.add(Statement::sub(d.clone(), Concept::var(v.as_str())));
                br.record(rule, &s, None, before);
                out.push(br);
            }
            RuleId::FlattenLeftGroundSub => {
                let mut lhs = Vec::new();
                for a in s.lhs.atoms() {
                    match a {
                        Atom::Exists(r, d) if !a.is_flat() => {
                            let v = br.abbreviation(d);
                            br.add(Statement::sub(d.clone(), Concept::var(v.as_str())));
                            lhs.push(Atom::Exists(r.clone(), Concept::var(v.as_str())));
                        }
                        other => lhs.push(other.clone()),
                    }
                }
                br.add(Statement::sub(Concept::conj(lhs), s.rhs.clone()));
                br.record(rule, &s, None, before);
                out.push(br);
            }
            RuleId::SolveLeftGroundDissub => {
                let x = s.rhs.clone();
                for a in &self.constants {
                    let ca = Concept::constant(a.as_str());
                    if subsumes(&s.lhs, &ca) {
                        continue;
                    }
                    let mut b = br.clone();
                    b.add(Statement::sub(x.clone(), ca));
                    b.record(rule, &s, Some(format!("constant {a}")), before);
                    out.push(b);
                }
                for r in &self.roles {
                    let mut b = br.clone();
                    let z = b.fresh.next_var();
                    let rz = Atom::exists(r.as_str(), Concept::var(z.as_str()));
                    b.add(Statement::sub(x.clone(), Concept::atom(rz.clone())));
                    for c in s.lhs.atoms() {
                        match atomic_decomposition(c, &rz) {
                            Atomic::Replace(t) => b.add(t),
                            Atomic::Remove => {}
                            Atomic::Fail => unreachable!("right side is not ground"),
                        }
                    }
                    b.record(rule, &s, Some(format!("role {r}, new variable {z}")), before);
                    out.push(b);
                }
            }
        }
        out
    }

    fn finish(&self, br: Branch) -> Reduced {
        let mut problem = self.base.with_statements(br.gamma);
        problem.definitions = br.definitions;
        problem.origin = self.origin.clone();
        Reduced {
            problem,
            trace: br.trace,
            initial_measure: self.initial_measure,
        }
    }
}

impl Iterator for Reductions {
    type Item = Reduced;

    fn next(&mut self) -> Option<Reduced> {
        while let Some(mut br) = self.stack.pop() {
            let Some(s) = br.queue.pop_front() else {
                if self.seen.insert(br.gamma.clone()) {
                    return Some(self.finish(br));
                }
                continue;
            };
            if !br.gamma.contains(&s) {
                self.stack.push(br);
                continue;
            }
            let rule = applicable_rule(&s).expect("queued statements have a rule");
            let succ = self.successors(br, s, rule);
            if succ.is_empty() {
                self.failures += 1;
            }
            for b in &succ {
                let step = b.trace.last().expect("successors record their step");
                self.applications += 1;
                if step.measure_after >= step.measure_before {
                    self.violations += 1;
                }
                self.longest_branch = self.longest_branch.max(b.trace.len());
            }
            self.stack.extend(succ.into_iter().rev());
        }
        None
    }
}

/// Enumerates the reduced flat problems of a dismatching problem. The input
/// is flattened first where needed.
pub fn reduce_dismatching(b: &BasicProblem) -> Result<Reductions> {
    let pre = pre_flatten_dismatching(b)?;
    let mut br = Branch {
        gamma: BTreeSet::new(),
        queue: VecDeque::new(),
        fresh: pre.fresh_vars(),
        cache: BTreeMap::new(),
        definitions: pre.definitions.clone(),
        trace: Vec::new(),
    };
    for s in &pre.statements {
        br.add(s.clone());
    }
    let initial_measure = br.measure();
    Ok(Reductions {
        origin: b.clone(),
        constants: b.signature.constants.iter().cloned().collect(),
        roles: b.signature.roles.iter().cloned().collect(),
        stack: vec![br],
        seen: HashSet::new(),
        base: pre,
        initial_measure,
        failures: 0,
        applications: 0,
        violations: 0,
        longest_branch: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_problem;

    fn basic(text: &str) -> BasicProblem {
        parse_problem(text).unwrap().as_basic().unwrap()
    }

    fn stmt(text: &str) -> Statement {
        basic(text).statements.into_iter().next().unwrap()
    }

    const EXAMPLE: &str =
        "vars X, Y; X <= B; A & B & C <= X; some r.X <= Y; top !<= Y; Y !<= some r.B;";

    #[test]
    fn dismatching_detection() {
        assert!(is_dismatching_problem(&basic(EXAMPLE)));
        assert!(!is_dismatching_problem(&basic("vars X, Y; X !<= Y;")));
        assert!(is_dismatching_problem(&BasicProblem::new(Default::default(), [])));
    }

    #[test]
    fn rule_selection() {
        assert_eq!(applicable_rule(&stmt("vars Y; top !<= Y;")), Some(RuleId::SolveLeftGroundDissub));
        assert_eq!(applicable_rule(&stmt("A & B !<= C & D;")), Some(RuleId::RightDecomp));
        assert_eq!(
            applicable_rule(&stmt("vars X; X !<= some r.(A & B);")),
            Some(RuleId::FlattenRightGroundDissub)
        );
        assert_eq!(applicable_rule(&stmt("vars X; X !<= some r.B;")), None);
        assert_eq!(applicable_rule(&stmt("vars X; X & A !<= B;")), Some(RuleId::LeftDecomp));
        assert_eq!(applicable_rule(&stmt("vars X; some r.X !<= some r.B;")), Some(RuleId::AtomicDecomp));
        assert_eq!(
            applicable_rule(&stmt("vars X; A & some r.(A & B) <= X;")),
            Some(RuleId::FlattenLeftGroundSub)
        );
        assert_eq!(applicable_rule(&stmt("vars X; A & some r.B <= X;")), None);
    }

    #[test]
    fn ground_atomic_cases() {
        assert_eq!(reduce_dismatching(&basic("A !<= A;")).unwrap().count(), 0);
        let all: Vec<_> = reduce_dismatching(&basic("A !<= B;")).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert!(all[0].problem.statements.is_empty());
    }

    #[test]
    fn non_dismatching_is_rejected() {
        assert!(matches!(
            reduce_dismatching(&basic("vars X, Y; X !<= Y;")),
            Err(Error::NotDismatching(_))
        ));
    }

    #[test]
    fn pre_flattening_keeps_ground_sides() {
        let b = basic("vars X; X & some r.(A & X) !<= some s.some s.B;");
        let f = pre_flatten_dismatching(&b).unwrap();
        let d = f.dissubsumptions().next().unwrap();
        assert!(d.lhs.atoms().iter().all(Atom::is_flat));
        assert_eq!(d.rhs.to_string(), "some s.some s.B");
        assert!(f.dissubsumptions().all(|s| s.lhs.is_ground() || s.rhs.is_ground()));
    }

    #[test]
    fn example_contains_role_choice() {
        let reduced: Vec<_> = reduce_dismatching(&basic(EXAMPLE)).unwrap().collect();
        assert!(!reduced.is_empty());
        let hit = reduced.iter().any(|r| {
            r.problem.subsumptions().any(|s| {
                s.lhs == Concept::var("Y")
                    && matches!(s.rhs.as_atom(), Some(Atom::Exists(r, z)) if r.as_str() == "r" && z.as_var().is_some())
            })
        });
        assert!(hit);
        for r in &reduced {
            assert!(r.problem.is_flat());
            assert!(r.trace.len() <= r.initial_measure);
            for s in r.problem.dissubsumptions() {
                assert!(!(s.lhs.is_ground() && s.rhs.as_var().is_some()));
            }
        }
    }

    #[test]
    fn measure_decreases_along_steps() {
        let b = basic("vars X, Y; some r.(A & some s.B) & C !<= Y; X !<= some r.some s.(A & B); Y <= A;");
        for r in reduce_dismatching(&b).unwrap() {
            let mut last = r.initial_measure;
            for step in &r.trace {
                assert_eq!(step.measure_before, last);
                assert!(step.measure_after < step.measure_before);
                last = step.measure_after;
            }
            assert!(r.trace.len() <= r.initial_measure);
            assert!(r.problem.is_flat());
        }
    }
}
