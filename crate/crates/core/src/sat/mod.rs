//! Local disunification by reduction to propositional satisfiability.

pub mod dimacs;
pub mod encode;
pub mod solver;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::local::Assignment;
use crate::normalize::FlatProblem;
use crate::term::Substitution;

pub use encode::{build_clauses, decode, encode_solution_as_valuation, ClauseCounts, CnfInstance, Encoding, SatVarMap};
pub use solver::{SatResult, Solver};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum SatBackend {
    #[default]
    BuiltIn,
    /// Shell command template, see [`dimacs::run_external`].
    External(String),
}

#[derive(Clone, Debug, Default)]
pub struct SatOptions {
    pub backend: SatBackend,
    pub deadline: Option<Instant>,
}

enum Backend {
    BuiltIn(Box<Solver>),
    External(String, CnfInstance),
}

/// Satisfying valuations of `Cl(f)`, decoded. After each model a clause
/// blocking its `[X <= D]` pattern is added, so the yielded assignments are
/// pairwise distinct.
pub struct ModelEnumeration {
    encoding: Encoding,
    problem: FlatProblem,
    backend: Backend,
    deadline: Option<Instant>,
    done: bool,
    pub models: usize,
}

impl ModelEnumeration {
    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    fn solve(&mut self) -> Result<SatResult> {
        match &mut self.backend {
            Backend::BuiltIn(s) => s.solve(),
            Backend::External(cmd, cnf) => dimacs::run_external(cmd, cnf, self.deadline),
        }
    }

    fn block(&mut self, model: &[bool]) {
        let map = &self.encoding.map;
        let u = &map.universe;
        let mut clause = Vec::new();
        for x in 0..u.vars.len() {
            for d in 0..u.at_nv.len() {
                let v = map.var_sub_nv(x, d);
                clause.push(if model[v as usize] { -v } else { v });
            }
        }
        if clause.is_empty() {
            self.done = true;
        }
        match &mut self.backend {
            Backend::BuiltIn(s) => {
                if !s.add_clause(&clause) {
                    self.done = true;
                }
            }
            Backend::External(_, cnf) => cnf.clauses.push(clause),
        }
    }

    fn step(&mut self) -> Result<Option<(Assignment, Substitution)>> {
        let model = match self.solve()? {
            SatResult::Unsat => return Ok(None),
            SatResult::Sat(m) => m,
        };
        if !self.encoding.cnf.satisfied_by(&model) {
            return Err(Error::InternalEncoding("solver returned a non-model".into()));
        }
        let (s, sigma) = decode(&model, &self.encoding.map)?;
        if !self.problem.is_solved_by(&sigma)? {
            return Err(Error::InternalEncoding(format!("decoded substitution does not solve the problem: {sigma:?}")));
        }
        self.block(&model);
        self.models += 1;
        Ok(Some((s, sigma)))
    }
}

impl Iterator for ModelEnumeration {
    type Item = Result<(Assignment, Substitution)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.step() {
            Ok(Some(r)) => Some(Ok(r)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Every local solution of `f` is equivalent to one of the yielded
/// substitutions. The dissubsumptions of `f` must be variablized.
pub fn enumerate_models(f: &FlatProblem, opts: &SatOptions) -> Result<ModelEnumeration> {
    let encoding = build_clauses(f)?;
    let backend = match &opts.backend {
        SatBackend::BuiltIn => {
            let mut s = Solver::new(encoding.cnf.num_vars);
            s.set_deadline(opts.deadline);
            for c in &encoding.cnf.clauses {
                s.add_clause(c);
            }
            Backend::BuiltIn(Box::new(s))
        }
        SatBackend::External(cmd) => Backend::External(cmd.clone(), encoding.cnf.clone()),
    };
    Ok(ModelEnumeration {
        encoding,
        problem: f.clone(),
        backend,
        deadline: opts.deadline,
        done: false,
        models: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::brute_force_local_solve;
    use crate::normalize::variablize_dissubsumptions;
    use crate::parse::parse_problem;
    use crate::term::substitutions_equivalent;

    fn flat(text: &str) -> FlatProblem {
        variablize_dissubsumptions(&FlatProblem::from_flat(parse_problem(text).unwrap().as_basic().unwrap()))
    }

    fn all(f: &FlatProblem) -> Vec<(Assignment, Substitution)> {
        enumerate_models(f, &SatOptions::default()).unwrap().map(Result::unwrap).collect()
    }

    #[test]
    fn example_has_no_local_solution() {
        let f = flat("vars X, Y; X <= B; A & B & C <= X; some r.X <= Y; top !<= Y; Y !<= some r.B;");
        assert!(all(&f).is_empty());
    }

    #[test]
    fn single_lower_bound() {
        let f = flat("vars X; A <= X;");
        let got: Vec<_> = all(&f).into_iter().map(|(s, _)| s).collect();
        let want: Vec<_> = brute_force_local_solve(&f, 24).unwrap().map(|(s, _)| s).collect();
        assert_eq!(got.len(), 2);
        let mut got = got;
        got.sort();
        let mut want = want;
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn matches_brute_force() {
        for text in [
            "vars X, Y; X <= A; some r.X <= Y; Y !<= some r.A;",
            "vars X, Y; A & B <= X; X !<= Y; some s.Y <= X;",
            "vars X; some r.X <= X;",
            "vars X, Y; X !<= Y; Y !<= X;",
        ] {
            let f = flat(text);
            let sat = all(&f);
            let brute: Vec<_> = brute_force_local_solve(&f, 24).unwrap().collect();
            assert_eq!(sat.is_empty(), brute.is_empty(), "{text}");
            for (_, b) in &brute {
                assert!(
                    sat.iter().any(|(_, s)| substitutions_equivalent(s, b).unwrap()),
                    "{text}: missing {b:?}"
                );
            }
        }
    }

    #[test]
    fn valuation_of_a_solution_is_a_model() {
        let f = flat("vars X, Y; X <= A; some r.X <= Y; Y !<= some r.A;");
        let e = build_clauses(&f).unwrap();
        for (_, sigma) in brute_force_local_solve(&f, 24).unwrap() {
            let m = encode_solution_as_valuation(&sigma, &f, &e.map).unwrap();
            assert!(e.cnf.satisfied_by(&m));
        }
        let mut bad = Substitution::new();
        for x in f.variables() {
            bad.bind(x, crate::term::Concept::top()).unwrap();
        }
        assert_eq!(encode_solution_as_valuation(&bad, &f, &e.map), Err(Error::NotASolution));
    }
}
