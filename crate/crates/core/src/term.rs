//! Canonical EL concept terms, substitutions and structural subsumption.
//!
//! A [`Concept`] is a duplicate-free, sorted conjunction of [`Atom`]s; the
//! empty conjunction is `top`. Every constructor in this module produces the
//! canonical form, so syntactic equality of two `Concept`s is structural
//! equality of their canonical forms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An interned-by-value identifier (concept name or role name).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The finite signature of a problem: constants, variables and roles.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    pub constants: BTreeSet<Symbol>,
    pub variables: BTreeSet<Symbol>,
    pub roles: BTreeSet<Symbol>,
}

impl Signature {
    /// Checks that the three name sets are pairwise disjoint and nonempty names.
    pub fn validate(&self) -> Result<()> {
        for name in self.constants.iter().chain(&self.variables).chain(&self.roles) {
            if name.as_str().is_empty() {
                return Err(Error::UnknownSymbol(String::new()));
            }
        }
        if let Some(v) = self.constants.intersection(&self.variables).next() {
            return Err(Error::DuplicateVarDecl(v.to_string()));
        }
        if let Some(r) = self
            .roles
            .iter()
            .find(|r| self.constants.contains(*r) || self.variables.contains(*r))
        {
            return Err(Error::RoleUsedAsConcept(r.to_string()));
        }
        Ok(())
    }

    /// Adds every name occurring in `c`.
    pub fn absorb(&mut self, c: &Concept) {
        for atom in c.atoms() {
            match atom {
                Atom::Const(a) => {
                    self.constants.insert(a.clone());
                }
                Atom::Var(x) => {
                    self.variables.insert(x.clone());
                }
                Atom::Exists(r, arg) => {
                    self.roles.insert(r.clone());
                    self.absorb(arg);
                }
            }
        }
    }

    pub fn is_variable(&self, name: &str) -> bool {
        self.variables.contains(&Symbol::new(name))
    }
}

/// A concept name (constant or variable) or an existential restriction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Const(Symbol),
    Var(Symbol),
    Exists(Symbol, Concept),
}

impl Atom {
    pub fn constant(name: &str) -> Atom {
        Atom::Const(Symbol::new(name))
    }

    pub fn var(name: &str) -> Atom {
        Atom::Var(Symbol::new(name))
    }

    pub fn exists(role: &str, arg: Concept) -> Atom {
        Atom::Exists(Symbol::new(role), arg)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Atom::Var(_))
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Atom::Const(_))
    }

    pub fn is_name(&self) -> bool {
        !matches!(self, Atom::Exists(..))
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match self {
            Atom::Var(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Atom::Const(_) => true,
            Atom::Var(_) => false,
            Atom::Exists(_, arg) => arg.is_ground(),
        }
    }

    /// A concept name, or `some r.N` with `N` a single concept name.
    pub fn is_flat(&self) -> bool {
        match self {
            Atom::Const(_) | Atom::Var(_) => true,
            Atom::Exists(_, arg) => matches!(arg.as_atom(), Some(a) if a.is_name()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Atom::Const(_) | Atom::Var(_) => 1,
            Atom::Exists(_, arg) => 1 + arg.size(),
        }
    }

    pub fn role_depth(&self) -> usize {
        match self {
            Atom::Const(_) | Atom::Var(_) => 0,
            Atom::Exists(_, arg) => 1 + arg.role_depth(),
        }
    }

    fn name(&self) -> Option<&Symbol> {
        match self {
            Atom::Const(n) | Atom::Var(n) => Some(n),
            Atom::Exists(..) => None,
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Atom::Const(_) => {}
            Atom::Var(x) => {
                out.insert(x.clone());
            }
            Atom::Exists(_, arg) => {
                for a in arg.atoms() {
                    a.collect_vars(out);
                }
            }
        }
    }
}

// Names before existential restrictions; names by string; restrictions by
// role, then by argument.
impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Atom::Exists(r, c), Atom::Exists(s, d)) => r.cmp(s).then_with(|| c.cmp(d)),
            (Atom::Exists(..), _) => Ordering::Greater,
            (_, Atom::Exists(..)) => Ordering::Less,
            (a, b) => a
                .name()
                .cmp(&b.name())
                .then_with(|| a.is_var().cmp(&b.is_var())),
        }
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parse::render_atom(self))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parse::render_atom(self))
    }
}

/// A canonical conjunction of atoms. The empty conjunction is `top`.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Concept {
    atoms: Vec<Atom>,
}

impl Concept {
    pub fn top() -> Concept {
        Concept { atoms: Vec::new() }
    }

    /// Builds the canonical conjunction of `atoms`.
    pub fn conj<I: IntoIterator<Item = Atom>>(atoms: I) -> Concept {
        let mut atoms: Vec<Atom> = atoms.into_iter().collect();
        atoms.sort();
        atoms.dedup();
        Concept { atoms }
    }

    pub fn atom(atom: Atom) -> Concept {
        Concept { atoms: vec![atom] }
    }

    pub fn constant(name: &str) -> Concept {
        Concept::atom(Atom::constant(name))
    }

    pub fn var(name: &str) -> Concept {
        Concept::atom(Atom::var(name))
    }

    pub fn exists(role: &str, arg: Concept) -> Concept {
        Concept::atom(Atom::exists(role, arg))
    }

    pub fn and(&self, other: &Concept) -> Concept {
        Concept::conj(self.atoms.iter().chain(&other.atoms).cloned())
    }

    /// Top-level atoms in canonical order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_top(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The single top-level atom, if there is exactly one.
    pub fn as_atom(&self) -> Option<&Atom> {
        match self.atoms.as_slice() {
            [a] => Some(a),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        self.as_atom().and_then(Atom::as_var)
    }

    pub fn is_ground(&self) -> bool {
        self.atoms.iter().all(Atom::is_ground)
    }

    pub fn variables(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for a in &self.atoms {
            a.collect_vars(&mut out);
        }
        out
    }

    /// Number of symbols: one per concept name, one per `some r.`, plus
    /// `n - 1` for a conjunction of `n` atoms; `top` counts as one.
    pub fn size(&self) -> usize {
        if self.atoms.is_empty() {
            return 1;
        }
        self.atoms.iter().map(Atom::size).sum::<usize>() + self.atoms.len() - 1
    }

    pub fn role_depth(&self) -> usize {
        self.atoms.iter().map(Atom::role_depth).max().unwrap_or(0)
    }

    /// Rebuilds the canonical form recursively. Idempotent.
    pub fn canonicalize(&self) -> Concept {
        Concept::conj(self.atoms.iter().map(|a| match a {
            Atom::Exists(r, arg) => Atom::Exists(r.clone(), arg.canonicalize()),
            other => other.clone(),
        }))
    }

    /// Replaces variables by arbitrary, possibly non-ground terms. Variables
    /// for which `map` returns `None` are kept.
    pub fn replace_vars<F>(&self, map: &F) -> Concept
    where
        F: Fn(&Symbol) -> Option<Concept>,
    {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            match a {
                Atom::Var(x) => match map(x) {
                    Some(c) => atoms.extend(c.atoms),
                    None => atoms.push(a.clone()),
                },
                Atom::Exists(r, arg) => atoms.push(Atom::Exists(r.clone(), arg.replace_vars(map))),
                Atom::Const(_) => atoms.push(a.clone()),
            }
        }
        Concept::conj(atoms)
    }
}

impl fmt::Debug for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parse::render_term(self))
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parse::render_term(self))
    }
}

/// A concept term as written, before conjunctions are flattened and sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawTerm {
    Top,
    Const(Symbol),
    Var(Symbol),
    And(Vec<RawTerm>),
    Exists(Symbol, Box<RawTerm>),
}

/// Normalizes a raw term modulo associativity, commutativity, idempotence and
/// the unit `top` of conjunction.
pub fn canonicalize(raw: &RawTerm) -> Concept {
    fn collect(raw: &RawTerm, out: &mut Vec<Atom>) {
        match raw {
            RawTerm::Top => {}
            RawTerm::Const(a) => out.push(Atom::Const(a.clone())),
            RawTerm::Var(x) => out.push(Atom::Var(x.clone())),
            RawTerm::And(parts) => parts.iter().for_each(|p| collect(p, out)),
            RawTerm::Exists(r, arg) => out.push(Atom::Exists(r.clone(), canonicalize(arg))),
        }
    }
    let mut atoms = Vec::new();
    collect(raw, &mut atoms);
    Concept::conj(atoms)
}

/// Structural subsumption between atoms; variables behave as constants.
pub fn atom_subsumes(c: &Atom, d: &Atom) -> bool {
    match (c, d) {
        (Atom::Exists(r, c1), Atom::Exists(s, d1)) => r == s && subsumes(c1, d1),
        (Atom::Exists(..), _) | (_, Atom::Exists(..)) => false,
        (a, b) => a == b,
    }
}

/// `c ⊑ d`: every top-level atom of `d` subsumes some top-level atom of `c`.
pub fn subsumes(c: &Concept, d: &Concept) -> bool {
    d.atoms()
        .iter()
        .all(|d1| c.atoms().iter().any(|c1| atom_subsumes(c1, d1)))
}

pub fn dissubsumes(c: &Concept, d: &Concept) -> bool {
    !subsumes(c, d)
}

/// The top-level atom of `d` that no atom of `c` is subsumed by, if any.
pub fn dissubsumption_witness<'a>(c: &Concept, d: &'a Concept) -> Option<&'a Atom> {
    d.atoms()
        .iter()
        .find(|d1| !c.atoms().iter().any(|c1| atom_subsumes(c1, d1)))
}

pub fn equivalent(c: &Concept, d: &Concept) -> bool {
    subsumes(c, d) && subsumes(d, c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StatementKind {
    Sub,
    Dissub,
}

/// A subsumption `lhs <= rhs` or dissubsumption `lhs !<= rhs` constraint.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Statement {
    pub kind: StatementKind,
    pub lhs: Concept,
    pub rhs: Concept,
}

impl Statement {
    pub fn sub(lhs: Concept, rhs: Concept) -> Statement {
        Statement {
            kind: StatementKind::Sub,
            lhs,
            rhs,
        }
    }

    pub fn dissub(lhs: Concept, rhs: Concept) -> Statement {
        Statement {
            kind: StatementKind::Dissub,
            lhs,
            rhs,
        }
    }

    pub fn is_sub(&self) -> bool {
        self.kind == StatementKind::Sub
    }

    pub fn is_dissub(&self) -> bool {
        self.kind == StatementKind::Dissub
    }

    pub fn is_ground(&self) -> bool {
        self.lhs.is_ground() && self.rhs.is_ground()
    }

    /// Flat shape: flat atoms everywhere, and a single right atom for
    /// subsumptions.
    pub fn is_flat(&self) -> bool {
        let atoms_flat = self
            .lhs
            .atoms()
            .iter()
            .chain(self.rhs.atoms())
            .all(Atom::is_flat);
        atoms_flat && (self.is_dissub() || self.rhs.atoms().len() == 1)
    }

    /// `|lhs| * |rhs|`.
    pub fn measure(&self) -> usize {
        self.lhs.size() * self.rhs.size()
    }

    pub fn variables(&self) -> BTreeSet<Symbol> {
        let mut vars = self.lhs.variables();
        vars.extend(self.rhs.variables());
        vars
    }

    /// Whether `sigma` solves this statement.
    pub fn holds_under(&self, sigma: &Substitution) -> Result<bool> {
        let l = sigma.apply(&self.lhs)?;
        let r = sigma.apply(&self.rhs)?;
        Ok(match self.kind {
            StatementKind::Sub => subsumes(&l, &r),
            StatementKind::Dissub => dissubsumes(&l, &r),
        })
    }
}

impl fmt::Debug for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parse::render_statement(self))
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parse::render_statement(self))
    }
}

/// A map from variables to ground concept terms.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Substitution {
    bindings: BTreeMap<Symbol, Concept>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `var` to `term`. The term must be ground.
    pub fn bind(&mut self, var: Symbol, term: Concept) -> Result<()> {
        if !term.is_ground() {
            return Err(Error::NonGroundBinding(var.to_string()));
        }
        self.bindings.insert(var, term);
        Ok(())
    }

    pub fn get(&self, var: &Symbol) -> Option<&Concept> {
        self.bindings.get(var)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Symbol> {
        self.bindings.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Concept)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Keeps only the bindings of `vars`; variables of `vars` missing from
    /// the domain are bound to `top`.
    pub fn restrict<'a, I: IntoIterator<Item = &'a Symbol>>(&self, vars: I) -> Substitution {
        let bindings = vars
            .into_iter()
            .map(|v| (v.clone(), self.get(v).cloned().unwrap_or_default()))
            .collect();
        Substitution { bindings }
    }

    pub fn apply_atom(&self, atom: &Atom) -> Result<Vec<Atom>> {
        Ok(match atom {
            Atom::Const(_) => vec![atom.clone()],
            Atom::Var(x) => self
                .get(x)
                .ok_or_else(|| Error::UnboundVariable(x.to_string()))?
                .atoms()
                .to_vec(),
            Atom::Exists(r, arg) => vec![Atom::Exists(r.clone(), self.apply(arg)?)],
        })
    }

    /// Applies the substitution homomorphically and returns the canonical
    /// result.
    pub fn apply(&self, c: &Concept) -> Result<Concept> {
        let mut atoms = Vec::with_capacity(c.atoms().len());
        for a in c.atoms() {
            atoms.extend(self.apply_atom(a)?);
        }
        Ok(Concept::conj(atoms))
    }
}

impl FromIterator<(Symbol, Concept)> for Substitution {
    fn from_iter<T: IntoIterator<Item = (Symbol, Concept)>>(iter: T) -> Self {
        Substitution {
            bindings: iter.into_iter().collect(),
        }
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.bindings.iter())
            .finish()
    }
}

/// Whether `s1(X) ≡ s2(X)` for every variable `X` of the common domain.
pub fn substitutions_equivalent(s1: &Substitution, s2: &Substitution) -> Result<bool> {
    if !s1.domain().eq(s2.domain()) {
        return Err(Error::DomainMismatch);
    }
    Ok(s1
        .iter()
        .zip(s2.iter())
        .all(|((_, c), (_, d))| equivalent(c, d)))
}
