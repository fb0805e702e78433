//! Normal forms checked against exhaustive evaluation over a pool of small
//! ground substitutions.

mod common;

use el_disunify::local::{brute_force_local_solve, DEFAULT_BRUTE_CAP};
use el_disunify::normalize::{enumerate_basic_problems, flatten, variablize_dissubsumptions};
use el_disunify::problem::{BasicProblem, Formula, GeneralProblem};
use el_disunify::term::{Concept, Statement, Substitution, Symbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `top`, every ground atom of depth at most one, and all pairs of them.
fn pool() -> Vec<Concept> {
    let atoms = common::all_ground_atoms(1);
    let mut out = vec![Concept::top()];
    for (i, a) in atoms.iter().enumerate() {
        out.push(Concept::atom(a.clone()));
        for b in &atoms[i + 1..] {
            out.push(Concept::conj([a.clone(), b.clone()]));
        }
    }
    out
}

fn candidates(vars: &[Symbol], pool: &[Concept]) -> Vec<Substitution> {
    let mut out = vec![Substitution::new()];
    for x in vars {
        out = out
            .into_iter()
            .flat_map(|s| {
                pool.iter().map(move |t| {
                    let mut s = s.clone();
                    s.bind(x.clone(), t.clone()).unwrap();
                    s
                })
            })
            .collect();
    }
    out
}

fn random_statement<R: Rng>(rng: &mut R, vars: &[&str]) -> Statement {
    let (l, r) = (common::random_term(rng, 2, vars), common::random_term(rng, 2, vars));
    if rng.gen_bool(0.6) {
        Statement::sub(l, r)
    } else {
        Statement::dissub(l, r)
    }
}

fn random_formula<R: Rng>(rng: &mut R, depth: usize, vars: &[&str]) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        let s = random_statement(rng, vars);
        return Formula::sub(s.lhs.clone(), s.rhs.clone());
    }
    let kids = |rng: &mut R| (0..rng.gen_range(1..=2)).map(|_| random_formula(rng, depth - 1, vars)).collect();
    match rng.gen_range(0..3) {
        0 => Formula::Not(Box::new(random_formula(rng, depth - 1, vars))),
        1 => Formula::And(kids(rng)),
        _ => Formula::Or(kids(rng)),
    }
}

#[test]
fn flattening_preserves_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let pool = pool();
    let mut solved = 0;
    for _ in 0..60 {
        let vars = &common::VARS[..rng.gen_range(1..=2)];
        let stmts: Vec<Statement> = (0..rng.gen_range(1..=3)).map(|_| random_statement(&mut rng, vars)).collect();
        let b = BasicProblem::new(common::signature(vars), stmts);
        let f = flatten(&b);
        assert!(f.is_flat());
        let v = variablize_dissubsumptions(&f);
        assert!(v.dissubsumptions().all(|s| s.lhs.as_var().is_some() && s.rhs.as_var().is_some()));
        let xs: Vec<Symbol> = b.variables().iter().cloned().collect();
        for sigma in candidates(&xs, &pool) {
            if b.is_solved_by(&sigma).unwrap() {
                solved += 1;
                assert!(f.is_solved_by(&f.extend_substitution(&sigma)).unwrap(), "{}", f.render());
                assert!(v.is_solved_by(&v.extend_substitution(&sigma)).unwrap(), "{}", v.render());
            }
        }
        if let Ok(it) = brute_force_local_solve(&f, DEFAULT_BRUTE_CAP) {
            for (_, tau) in it {
                assert!(b.is_solved_by(&tau.restrict(&xs)).unwrap());
            }
        }
    }
    assert!(solved > 0);
}

#[test]
fn basic_problems_cover_the_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let pool = pool();
    for _ in 0..60 {
        let vars = &common::VARS[..1];
        let g = GeneralProblem {
            signature: common::signature(vars),
            formula: random_formula(&mut rng, 3, vars),
        };
        let basics: Vec<BasicProblem> = enumerate_basic_problems(&g).collect();
        for sigma in candidates(&[Symbol::new("X")], &pool) {
            let direct = g.is_solved_by(&sigma).unwrap();
            let via = basics.iter().any(|b| b.is_solved_by(&sigma).unwrap());
            assert_eq!(direct, via, "{:?}", g.formula);
        }
    }
}
