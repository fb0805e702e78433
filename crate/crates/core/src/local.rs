//! Local solutions of flat problems: the atom universe, assignments and the
//! substitutions they induce, and a brute-force guess-and-check oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::normalize::FlatProblem;
use crate::problem::{BasicProblem, GeneralProblem};
use crate::term::{Atom, Concept, Statement, Substitution, Symbol};

/// `At`, `Var` and `At_nv` of a flat problem, each sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomUniverse {
    pub at: Vec<Atom>,
    pub vars: Vec<Symbol>,
    pub at_nv: Vec<Atom>,
}

impl AtomUniverse {
    pub fn of_statements<'a, I: IntoIterator<Item = &'a Statement>>(statements: I) -> AtomUniverse {
        let mut at = BTreeSet::new();
        for s in statements {
            for a in s.lhs.atoms().iter().chain(s.rhs.atoms()) {
                if let Atom::Exists(_, arg) = a {
                    at.extend(arg.atoms().iter().cloned());
                }
                at.insert(a.clone());
            }
        }
        let vars = at.iter().filter_map(|a| a.as_var().cloned()).collect();
        let at_nv = at.iter().filter(|a| !a.is_var()).cloned().collect();
        AtomUniverse {
            at: at.into_iter().collect(),
            vars,
            at_nv,
        }
    }

    pub fn of(f: &FlatProblem) -> AtomUniverse {
        AtomUniverse::of_statements(&f.statements)
    }

    pub fn atom_index(&self, a: &Atom) -> Option<usize> {
        self.at.binary_search(a).ok()
    }

    pub fn var_index(&self, x: &Symbol) -> Option<usize> {
        self.vars.binary_search(x).ok()
    }

    pub fn nv_index(&self, a: &Atom) -> Option<usize> {
        self.at_nv.binary_search(a).ok()
    }

    pub fn constants(&self) -> impl Iterator<Item = &Atom> {
        self.at_nv.iter().filter(|a| a.is_constant())
    }

    pub fn existentials(&self) -> impl Iterator<Item = &Atom> {
        self.at_nv.iter().filter(|a| matches!(a, Atom::Exists(..)))
    }
}

/// A map from variables to sets of non-variable atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    sets: BTreeMap<Symbol, BTreeSet<Atom>>,
}

impl Assignment {
    /// The empty assignment for `vars`.
    pub fn empty<'a, I: IntoIterator<Item = &'a Symbol>>(vars: I) -> Assignment {
        Assignment {
            sets: vars.into_iter().map(|x| (x.clone(), BTreeSet::new())).collect(),
        }
    }

    pub fn get(&self, x: &Symbol) -> Option<&BTreeSet<Atom>> {
        self.sets.get(x)
    }

    pub fn contains(&self, x: &Symbol, a: &Atom) -> bool {
        self.sets.get(x).is_some_and(|s| s.contains(a))
    }

    /// Adds `a` to `S_x`; returns whether it was new.
    pub fn insert(&mut self, x: &Symbol, a: Atom) -> bool {
        self.sets.entry(x.clone()).or_default().insert(a)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &BTreeSet<Atom>)> {
        self.sets.iter()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Symbol> {
        self.sets.keys()
    }

    fn successors(&self, x: &Symbol) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        if let Some(s) = self.sets.get(x) {
            for a in s {
                if let Atom::Exists(_, arg) = a {
                    out.extend(arg.variables());
                }
            }
        }
        out
    }

    /// Variables in dependency order: every variable after those occurring
    /// in the atoms of its set. `None` if the dependency relation is cyclic.
    fn topological_order(&self) -> Option<Vec<Symbol>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Open,
            Done,
        }
        fn visit(
            s: &Assignment,
            x: &Symbol,
            marks: &mut BTreeMap<Symbol, Mark>,
            order: &mut Vec<Symbol>,
        ) -> bool {
            match marks.get(x) {
                Some(Mark::Done) => return true,
                Some(Mark::Open) => return false,
                None => {}
            }
            marks.insert(x.clone(), Mark::Open);
            for y in s.successors(x) {
                if !visit(s, &y, marks, order) {
                    return false;
                }
            }
            marks.insert(x.clone(), Mark::Done);
            order.push(x.clone());
            true
        }
        let mut marks = BTreeMap::new();
        let mut order = Vec::new();
        for x in self.sets.keys() {
            if !visit(self, x, &mut marks, &mut order) {
                return None;
            }
        }
        Some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Whether `x >_S y` in the transitive closure of the dependency relation.
    pub fn depends_on(&self, x: &Symbol, y: &Symbol) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<Symbol> = self.successors(x).into_iter().collect();
        while let Some(z) = stack.pop() {
            if &z == y {
                return true;
            }
            if seen.insert(z.clone()) {
                stack.extend(self.successors(&z));
            }
        }
        false
    }

    /// `sigma_S`, built bottom-up along the dependency order. Variables with
    /// an empty set are mapped to `top`.
    pub fn induced_substitution(&self) -> Result<Substitution> {
        let order = self.topological_order().ok_or(Error::CyclicAssignment)?;
        let mut sigma = Substitution::new();
        for x in order {
            let conj = Concept::conj(self.sets[&x].iter().cloned());
            let t = sigma.apply(&conj)?;
            sigma.bind(x, t)?;
        }
        Ok(sigma)
    }
}

/// Whether `sigma` solves the problem. Variables without a binding are an
/// error.
pub fn verify_solution(b: &BasicProblem, sigma: &Substitution) -> Result<bool> {
    b.is_solved_by(sigma)
}

pub fn verify_general(g: &GeneralProblem, sigma: &Substitution) -> Result<bool> {
    g.is_solved_by(sigma)
}

pub const DEFAULT_BRUTE_CAP: usize = 24;

/// Yields every acyclic assignment whose induced substitution solves the
/// problem, smallest assignments first (by number of chosen atoms, then in
/// lexicographic order of the chosen positions).
pub struct BruteForce {
    problem: FlatProblem,
    universe: AtomUniverse,
    bits: usize,
    k: usize,
    combos: Box<dyn Iterator<Item = Vec<usize>> + Send>,
    deadline: Option<Instant>,
    tried: u64,
    /// Set when the deadline cut the enumeration short.
    pub timed_out: bool,
}

impl BruteForce {
    pub fn new(f: &FlatProblem, cap: usize) -> Result<BruteForce> {
        let universe = AtomUniverse::of(f);
        let bits = universe.vars.len() * universe.at_nv.len();
        if bits > cap {
            return Err(Error::SearchSpaceTooLarge { bits, cap });
        }
        Ok(BruteForce {
            problem: f.clone(),
            universe,
            bits,
            k: 0,
            combos: Box::new((0..bits).combinations(0)),
            deadline: None,
            tried: 0,
            timed_out: false,
        })
    }

    pub fn with_deadline(mut self, deadline: Option<Instant>) -> BruteForce {
        self.deadline = deadline;
        self
    }

    pub fn universe(&self) -> &AtomUniverse {
        &self.universe
    }

    fn assignment(&self, positions: &[usize]) -> Assignment {
        let n = self.universe.at_nv.len();
        let mut s = Assignment::empty(&self.universe.vars);
        for &p in positions {
            s.insert(&self.universe.vars[p / n], self.universe.at_nv[p % n].clone());
        }
        s
    }
}

impl Iterator for BruteForce {
    type Item = (Assignment, Substitution);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let Some(positions) = self.combos.next() else {
                if self.k >= self.bits {
                    return None;
                }
                self.k += 1;
                self.combos = Box::new((0..self.bits).combinations(self.k));
                continue;
            };
            self.tried += 1;
            if self.tried.is_multiple_of(256) && self.deadline.is_some_and(|d| Instant::now() >= d) {
                self.timed_out = true;
                self.k = self.bits;
                self.combos = Box::new(std::iter::empty());
                return None;
            }
            let s = self.assignment(&positions);
            let Ok(sigma) = s.induced_substitution() else {
                continue;
            };
            if self.problem.is_solved_by(&sigma).unwrap_or(false) {
                return Some((s, sigma));
            }
        }
    }
}

pub fn brute_force_local_solve(f: &FlatProblem, cap: usize) -> Result<BruteForce> {
    BruteForce::new(f, cap)
}
