//! From general problems to flat ones: propositional abstraction, basic
//! problem enumeration, flattening and the variable-only form of
//! dissubsumptions used by the SAT encoding.

use std::collections::{BTreeSet, HashMap};

use crate::error::Result;
use crate::parse::{render_statements, FRESH_PREFIX};
use crate::problem::{BasicProblem, Formula, GeneralProblem};
use crate::term::{Atom, Concept, Signature, Statement, StatementKind, Substitution, Symbol};

/// The boolean structure of a formula with leaves replaced by literal indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Skeleton {
    Lit(usize),
    Not(Box<Skeleton>),
    And(Vec<Skeleton>),
    Or(Vec<Skeleton>),
}

impl Skeleton {
    /// Three-valued evaluation under a partial valuation of a prefix of the
    /// literals. `None` means undetermined.
    pub fn eval_partial(&self, prefix: &[bool]) -> Option<bool> {
        match self {
            Skeleton::Lit(i) => prefix.get(*i).copied(),
            Skeleton::Not(s) => s.eval_partial(prefix).map(|b| !b),
            Skeleton::And(parts) => {
                let mut all = Some(true);
                for p in parts {
                    match p.eval_partial(prefix) {
                        Some(false) => return Some(false),
                        None => all = None,
                        Some(true) => {}
                    }
                }
                all
            }
            Skeleton::Or(parts) => {
                let mut any = Some(false);
                for p in parts {
                    match p.eval_partial(prefix) {
                        Some(true) => return Some(true),
                        None => any = None,
                        Some(false) => {}
                    }
                }
                any
            }
        }
    }
}

/// Replaces each distinct subsumption leaf by a literal. Literals are
/// numbered in order of first occurrence.
pub fn propositional_abstraction(g: &GeneralProblem) -> (Skeleton, Vec<Statement>) {
    fn go(f: &Formula, lits: &mut Vec<Statement>, index: &mut HashMap<Statement, usize>) -> Skeleton {
        match f {
            Formula::Leaf(s) => {
                let i = *index.entry(s.clone()).or_insert_with(|| {
                    lits.push(s.clone());
                    lits.len() - 1
                });
                Skeleton::Lit(i)
            }
            Formula::Not(inner) => Skeleton::Not(Box::new(go(inner, lits, index))),
            Formula::And(parts) => Skeleton::And(parts.iter().map(|p| go(p, lits, index)).collect()),
            Formula::Or(parts) => Skeleton::Or(parts.iter().map(|p| go(p, lits, index)).collect()),
        }
    }
    let mut lits = Vec::new();
    let mut index = HashMap::new();
    let sk = go(&g.formula, &mut lits, &mut index);
    (sk, lits)
}

/// Lazily yields one basic problem per satisfying valuation of the
/// propositional skeleton. Valuations are explored depth first with `false`
/// before `true`, pruning partial valuations that already falsify the
/// skeleton.
pub struct BasicProblems {
    skeleton: Skeleton,
    literals: Vec<Statement>,
    signature: Signature,
    stack: Vec<Vec<bool>>,
}

impl Iterator for BasicProblems {
    type Item = BasicProblem;

    fn next(&mut self) -> Option<BasicProblem> {
        while let Some(prefix) = self.stack.pop() {
            match self.skeleton.eval_partial(&prefix) {
                Some(false) => continue,
                _ if prefix.len() < self.literals.len() => {
                    let mut t = prefix.clone();
                    t.push(true);
                    let mut f = prefix;
                    f.push(false);
                    self.stack.push(t);
                    self.stack.push(f);
                }
                _ => {
                    let statements = self.literals.iter().zip(&prefix).map(|(s, &v)| {
                        if v {
                            s.clone()
                        } else {
                            Statement::dissub(s.lhs.clone(), s.rhs.clone())
                        }
                    });
                    return Some(BasicProblem::new(self.signature.clone(), statements));
                }
            }
        }
        None
    }
}

pub fn enumerate_basic_problems(g: &GeneralProblem) -> BasicProblems {
    let (skeleton, literals) = propositional_abstraction(g);
    BasicProblems {
        skeleton,
        literals,
        signature: g.signature.clone(),
        stack: vec![Vec::new()],
    }
}

/// Generator of reserved variable names `_v1`, `_v2`, ...
#[derive(Clone, Debug)]
pub struct FreshVars {
    next: usize,
}

impl FreshVars {
    /// Starts after the largest `_vN` among `names`.
    pub fn after<'a, I: IntoIterator<Item = &'a Symbol>>(names: I) -> FreshVars {
        let max = names
            .into_iter()
            .filter_map(|n| n.as_str().strip_prefix(FRESH_PREFIX)?.parse::<usize>().ok())
            .max()
            .unwrap_or(0);
        FreshVars { next: max + 1 }
    }

    pub fn next_var(&mut self) -> Symbol {
        let s = Symbol::new(&format!("{FRESH_PREFIX}{}", self.next));
        self.next += 1;
        s
    }
}

pub fn is_fresh_name(x: &Symbol) -> bool {
    x.as_str().starts_with(FRESH_PREFIX)
}

/// A flat problem together with the bookkeeping needed to map its solutions
/// back to the problem it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatProblem {
    pub statements: BTreeSet<Statement>,
    /// Names of the statements plus those of the origin.
    pub signature: Signature,
    /// Generated variables and the terms they abbreviate, in creation order.
    /// Definitions only mention variables of the origin or earlier
    /// generated variables without definition.
    pub definitions: Vec<(Symbol, Concept)>,
    pub origin: BasicProblem,
}

impl FlatProblem {
    /// Wraps a problem whose statements are already flat.
    pub fn from_flat(b: BasicProblem) -> FlatProblem {
        FlatProblem {
            statements: b.statements.clone(),
            signature: b.signature.clone(),
            definitions: Vec::new(),
            origin: b,
        }
    }

    pub fn new<I: IntoIterator<Item = Statement>>(signature: Signature, statements: I) -> FlatProblem {
        FlatProblem::from_flat(BasicProblem::new(signature, statements))
    }

    /// Same origin and definitions, different statements.
    pub fn with_statements<I: IntoIterator<Item = Statement>>(&self, statements: I) -> FlatProblem {
        let statements: BTreeSet<Statement> = statements.into_iter().collect();
        let mut signature = self.signature.clone();
        for s in &statements {
            signature.absorb(&s.lhs);
            signature.absorb(&s.rhs);
        }
        FlatProblem {
            statements,
            signature,
            definitions: self.definitions.clone(),
            origin: self.origin.clone(),
        }
    }

    /// Variables occurring in the statements.
    pub fn variables(&self) -> BTreeSet<Symbol> {
        self.statements.iter().flat_map(Statement::variables).collect()
    }

    pub fn original_variables(&self) -> &BTreeSet<Symbol> {
        self.origin.variables()
    }

    pub fn is_flat(&self) -> bool {
        self.statements.iter().all(Statement::is_flat)
    }

    pub fn fresh_vars(&self) -> FreshVars {
        FreshVars::after(&self.signature.variables)
    }

    pub fn to_basic(&self) -> BasicProblem {
        BasicProblem::new(self.signature.clone(), self.statements.iter().cloned())
    }

    pub fn subsumptions(&self) -> impl Iterator<Item = &Statement> {
        self.statements.iter().filter(|s| s.is_sub())
    }

    pub fn dissubsumptions(&self) -> impl Iterator<Item = &Statement> {
        self.statements.iter().filter(|s| s.is_dissub())
    }

    pub fn is_solved_by(&self, sigma: &Substitution) -> Result<bool> {
        for s in &self.statements {
            if !s.holds_under(sigma)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Extends `sigma` to the generated variables by binding each to the
    /// image of the term it abbreviates. Definitions mentioning unbound
    /// variables are skipped.
    pub fn extend_substitution(&self, sigma: &Substitution) -> Substitution {
        let mut out = sigma.clone();
        for (v, def) in &self.definitions {
            if out.get(v).is_none() {
                if let Ok(t) = out.apply(def) {
                    let _ = out.bind(v.clone(), t);
                }
            }
        }
        out
    }

    /// The problem in the input grammar, with every variable declared.
    pub fn render(&self) -> String {
        let mut vars = self.variables();
        vars.extend(self.original_variables().iter().cloned());
        render_statements(&vars, &self.statements)
    }
}

/// Shared machinery for introducing abbreviation variables.
pub(crate) struct Flattener {
    pub fresh: FreshVars,
    cache: HashMap<Concept, Symbol>,
    pub definitions: Vec<(Symbol, Concept)>,
    pub out: BTreeSet<Statement>,
}

impl Flattener {
    pub fn new(fresh: FreshVars) -> Flattener {
        Flattener {
            fresh,
            cache: HashMap::new(),
            definitions: Vec::new(),
            out: BTreeSet::new(),
        }
    }

    /// Rewrites every non-flat atom `some r.C` of `c` to `some r.X` with `X`
    /// abbreviating `C`.
    pub fn term(&mut self, c: &Concept) -> Concept {
        Concept::conj(c.atoms().iter().map(|a| match a {
            Atom::Exists(r, arg) if !a.is_flat() => {
                Atom::Exists(r.clone(), Concept::atom(Atom::Var(self.abbreviate(arg))))
            }
            other => other.clone(),
        }))
    }

    /// The variable standing for `c`, adding the flat form of `X = c` the
    /// first time `c` is seen.
    pub fn abbreviate(&mut self, c: &Concept) -> Symbol {
        if let Some(v) = self.cache.get(c) {
            return v.clone();
        }
        let v = self.fresh.next_var();
        self.cache.insert(c.clone(), v.clone());
        self.definitions.push((v.clone(), c.clone()));
        let flat = self.term(c);
        let x = Concept::var(v.as_str());
        self.sub_split(flat.clone(), &x);
        self.sub_split(x, &flat);
        v
    }

    /// Adds `lhs <= D` for every top-level atom `D` of `rhs`.
    pub fn sub_split(&mut self, lhs: Concept, rhs: &Concept) {
        for d in rhs.atoms() {
            self.out.insert(Statement::sub(lhs.clone(), Concept::atom(d.clone())));
        }
    }
}

/// Flattens a basic problem by abbreviating non-flat subterms with fresh
/// variables and splitting conjunctive right-hand sides of subsumptions.
pub fn flatten(b: &BasicProblem) -> FlatProblem {
    let mut fl = Flattener::new(FreshVars::after(&b.signature.variables));
    for s in &b.statements {
        let lhs = fl.term(&s.lhs);
        let rhs = fl.term(&s.rhs);
        match s.kind {
            StatementKind::Sub => fl.sub_split(lhs, &rhs),
            StatementKind::Dissub => {
                fl.out.insert(Statement::dissub(lhs, rhs));
            }
        }
    }
    let mut signature = b.signature.clone();
    for s in &fl.out {
        signature.absorb(&s.lhs);
        signature.absorb(&s.rhs);
    }
    FlatProblem {
        statements: fl.out,
        signature,
        definitions: fl.definitions,
        origin: b.clone(),
    }
}

/// Rewrites every dissubsumption to the form `X !<= Y`. Each side that is not
/// a single variable is replaced by a fresh variable `V` together with the
/// flat subsumptions of `V = side`; for `side = top` this is just `top <= V`.
pub fn variablize_dissubsumptions(f: &FlatProblem) -> FlatProblem {
    let mut fl = Flattener::new(f.fresh_vars());
    let known: HashMap<Symbol, Concept> = f.definitions.iter().cloned().collect();
    let mut sides: HashMap<Concept, Symbol> = HashMap::new();
    let mut side = |fl: &mut Flattener, c: &Concept| -> Concept {
        if c.as_var().is_some() {
            return c.clone();
        }
        let v = sides
            .entry(c.clone())
            .or_insert_with(|| {
                let v = fl.fresh.next_var();
                let x = Concept::var(v.as_str());
                fl.out.insert(Statement::sub(c.clone(), x.clone()));
                fl.sub_split(x, c);
                fl.definitions
                    .push((v.clone(), c.replace_vars(&|y: &Symbol| known.get(y).cloned())));
                v
            })
            .clone();
        Concept::var(v.as_str())
    };
    for s in &f.statements {
        match s.kind {
            StatementKind::Sub => {
                fl.out.insert(s.clone());
            }
            StatementKind::Dissub => {
                let l = side(&mut fl, &s.lhs);
                let r = side(&mut fl, &s.rhs);
                fl.out.insert(Statement::dissub(l, r));
            }
        }
    }
    let mut g = f.with_statements(fl.out);
    g.definitions.extend(fl.definitions);
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_problem, parse_problem_with, ParseOptions};

    fn basic(text: &str) -> BasicProblem {
        parse_problem(text).unwrap().as_basic().unwrap()
    }

    fn statements(text: &str) -> BTreeSet<Statement> {
        parse_problem_with(text, ParseOptions { allow_reserved: true })
            .unwrap()
            .as_basic()
            .unwrap()
            .statements
    }

    #[test]
    fn abstraction_dedups_leaves() {
        let g = parse_problem("vars X; X <= A and (A <= X or not X <= A);").unwrap();
        let (sk, lits) = propositional_abstraction(&g);
        assert_eq!(lits.len(), 2);
        assert_eq!(
            sk,
            Skeleton::And(vec![
                Skeleton::Lit(0),
                Skeleton::Or(vec![Skeleton::Lit(1), Skeleton::Not(Box::new(Skeleton::Lit(0)))])
            ])
        );
    }

    #[test]
    fn basic_input_yields_itself() {
        let g = parse_problem("vars X, Y; X <= B; A & B & C <= X; top !<= Y;").unwrap();
        let all: Vec<_> = enumerate_basic_problems(&g).collect();
        assert_eq!(all, vec![g.as_basic().unwrap()]);
    }

    #[test]
    fn contradiction_yields_nothing() {
        let g = parse_problem("vars X; X <= A and not X <= A;").unwrap();
        assert_eq!(enumerate_basic_problems(&g).count(), 0);
    }

    #[test]
    fn disjunction_yields_three() {
        let g = parse_problem("vars X; X <= A or X <= B;").unwrap();
        let all: Vec<_> = enumerate_basic_problems(&g).collect();
        assert_eq!(all.len(), 3);
        for b in &all {
            assert_eq!(b.statements.len(), 2);
        }
    }

    #[test]
    fn flatten_abbreviates_subterms() {
        let f = flatten(&basic("vars X; X <= some r.(A & B);"));
        assert_eq!(
            f.statements,
            statements("vars X, _v1; X <= some r._v1; A & B <= _v1; _v1 <= A; _v1 <= B;")
        );
        assert_eq!(
            f.definitions,
            vec![(Symbol::new("_v1"), Concept::constant("A").and(&Concept::constant("B")))]
        );
        assert!(f.is_flat());
    }

    #[test]
    fn flatten_caches_and_nests() {
        let f = flatten(&basic("vars X; some r.some s.A <= X; X !<= some r.some s.A & some t.some s.A;"));
        assert!(f.is_flat());
        // `some s.A` gets a single abbreviation.
        assert_eq!(f.definitions.len(), 1);
    }

    #[test]
    fn flat_problem_is_unchanged() {
        let b = basic("vars X, Y; X <= B; A & B & C <= X; some r.X <= Y; top !<= Y; Y !<= some r.B;");
        let f = flatten(&b);
        assert_eq!(f.statements, b.statements);
        assert!(f.definitions.is_empty());
    }

    #[test]
    fn conjunctive_right_sides_split() {
        let f = flatten(&basic("vars X; X <= A & B; X <= top;"));
        assert_eq!(f.statements, statements("vars X; X <= A; X <= B;"));
    }

    #[test]
    fn fresh_names_continue_numbering() {
        let b = parse_problem_with("vars _v4; _v4 <= some r.(A & B);", ParseOptions { allow_reserved: true })
            .unwrap()
            .as_basic()
            .unwrap();
        let f = flatten(&b);
        assert_eq!(f.definitions[0].0, Symbol::new("_v5"));
    }

    #[test]
    fn variablize_examples() {
        let f = FlatProblem::from_flat(basic("vars X, Y; X !<= Y;"));
        assert_eq!(variablize_dissubsumptions(&f).statements, f.statements);

        let f = FlatProblem::from_flat(basic("vars Y; A !<= Y;"));
        assert_eq!(
            variablize_dissubsumptions(&f).statements,
            statements("vars Y, _v1; _v1 <= A; A <= _v1; _v1 !<= Y;")
        );

        let f = FlatProblem::from_flat(basic("vars Y; top !<= Y;"));
        assert_eq!(
            variablize_dissubsumptions(&f).statements,
            statements("vars Y, _v1; top <= _v1; _v1 !<= Y;")
        );
    }

    #[test]
    fn extension_to_generated_variables() {
        let f = flatten(&basic("vars X; X <= some r.(A & X);"));
        let sigma: Substitution = [(Symbol::new("X"), Concept::constant("B"))].into_iter().collect();
        let ext = f.extend_substitution(&sigma);
        assert_eq!(
            ext.get(&Symbol::new("_v1")),
            Some(&Concept::constant("A").and(&Concept::constant("B")))
        );
    }
}
