//! Disunification problems: boolean formulas over subsumptions, and the
//! basic (conjunctive) problems they reduce to.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::term::{Concept, Signature, Statement, StatementKind, Substitution, Symbol};

/// A boolean combination of subsumption leaves. Dissubsumptions are
/// `Not(Leaf(..))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Leaf(Statement),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn sub(lhs: Concept, rhs: Concept) -> Formula {
        Formula::Leaf(Statement::sub(lhs, rhs))
    }

    pub fn dissub(lhs: Concept, rhs: Concept) -> Formula {
        Formula::Not(Box::new(Formula::sub(lhs, rhs)))
    }

    /// `lhs = rhs` expands to both subsumptions.
    pub fn equation(lhs: Concept, rhs: Concept) -> Formula {
        Formula::And(vec![
            Formula::sub(lhs.clone(), rhs.clone()),
            Formula::sub(rhs, lhs),
        ])
    }

    /// `lhs != rhs` expands to a disjunction of the two dissubsumptions.
    pub fn disequation(lhs: Concept, rhs: Concept) -> Formula {
        Formula::Or(vec![
            Formula::dissub(lhs.clone(), rhs.clone()),
            Formula::dissub(rhs, lhs),
        ])
    }

    pub fn eval(&self, sigma: &Substitution) -> Result<bool> {
        Ok(match self {
            Formula::Leaf(s) => s.holds_under(sigma)?,
            Formula::Not(f) => !f.eval(sigma)?,
            Formula::And(fs) => {
                for f in fs {
                    if !f.eval(sigma)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.eval(sigma)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    /// Leaves in left-to-right order (with repetitions).
    pub fn leaves(&self) -> Vec<&Statement> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Statement>) {
        match self {
            Formula::Leaf(s) => out.push(s),
            Formula::Not(f) => f.collect_leaves(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_leaves(out)),
        }
    }

    fn collect_literals(&self, out: &mut Vec<Statement>) -> bool {
        match self {
            Formula::Leaf(s) => {
                out.push(s.clone());
                true
            }
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Leaf(s) => {
                    out.push(Statement::dissub(s.lhs.clone(), s.rhs.clone()));
                    true
                }
                _ => false,
            },
            Formula::And(fs) => fs.iter().all(|f| f.collect_literals(out)),
            Formula::Or(_) => false,
        }
    }
}

/// A problem as parsed: a signature and a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralProblem {
    pub signature: Signature,
    pub formula: Formula,
}

impl GeneralProblem {
    pub fn variables(&self) -> &BTreeSet<Symbol> {
        &self.signature.variables
    }

    /// The conjunction of (negated) leaves, when the formula has that shape.
    pub fn as_basic(&self) -> Option<BasicProblem> {
        let mut out = Vec::new();
        self.formula
            .collect_literals(&mut out)
            .then(|| BasicProblem::new(self.signature.clone(), out))
    }

    pub fn is_solved_by(&self, sigma: &Substitution) -> Result<bool> {
        self.formula.eval(sigma)
    }
}

/// A set of subsumptions and dissubsumptions over a signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasicProblem {
    pub signature: Signature,
    pub statements: BTreeSet<Statement>,
}

impl BasicProblem {
    /// Builds the problem; the signature is extended by every name in the
    /// statements.
    pub fn new<I: IntoIterator<Item = Statement>>(mut signature: Signature, statements: I) -> Self {
        let statements: BTreeSet<Statement> = statements.into_iter().collect();
        for s in &statements {
            signature.absorb(&s.lhs);
            signature.absorb(&s.rhs);
        }
        BasicProblem {
            signature,
            statements,
        }
    }

    pub fn variables(&self) -> &BTreeSet<Symbol> {
        &self.signature.variables
    }

    pub fn subsumptions(&self) -> impl Iterator<Item = &Statement> {
        self.statements.iter().filter(|s| s.kind == StatementKind::Sub)
    }

    pub fn dissubsumptions(&self) -> impl Iterator<Item = &Statement> {
        self.statements
            .iter()
            .filter(|s| s.kind == StatementKind::Dissub)
    }

    /// No dissubsumptions at all.
    pub fn is_unification(&self) -> bool {
        self.dissubsumptions().next().is_none()
    }

    /// Every dissubsumption has a ground side.
    pub fn is_dismatching(&self) -> bool {
        self.dissubsumptions()
            .all(|s| s.lhs.is_ground() || s.rhs.is_ground())
    }

    pub fn is_solved_by(&self, sigma: &Substitution) -> Result<bool> {
        for s in &self.statements {
            if !s.holds_under(sigma)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_formula(&self) -> Formula {
        Formula::And(
            self.statements
                .iter()
                .map(|s| match s.kind {
                    StatementKind::Sub => Formula::Leaf(s.clone()),
                    StatementKind::Dissub => Formula::dissub(s.lhs.clone(), s.rhs.clone()),
                })
                .collect(),
        )
    }
}
