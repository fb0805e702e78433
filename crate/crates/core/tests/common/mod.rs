#![allow(dead_code)]

use std::collections::BTreeSet;

use el_disunify::local::AtomUniverse;
use el_disunify::normalize::FlatProblem;
use el_disunify::problem::BasicProblem;
use el_disunify::term::{Atom, Concept, Signature, Statement, Symbol};
use rand::seq::SliceRandom;
use rand::Rng;

pub const CONSTANTS: [&str; 2] = ["A", "B"];
pub const ROLES: [&str; 2] = ["r", "s"];
pub const VARS: [&str; 2] = ["X", "Y"];

pub fn signature(vars: &[&str]) -> Signature {
    let set = |xs: &[&str]| xs.iter().map(|x| Symbol::new(x)).collect::<BTreeSet<_>>();
    Signature {
        constants: set(&CONSTANTS),
        variables: set(vars),
        roles: set(&ROLES),
    }
}

fn pick<R: Rng>(rng: &mut R, pool: &[Atom], lo: usize, hi: usize) -> Concept {
    let n = rng.gen_range(lo..=hi);
    Concept::conj((0..n).map(|_| pool.choose(rng).unwrap().clone()))
}

/// A flat problem over two constants and two roles with at most two
/// variables and at most six non-variable atoms.
pub fn random_flat<R: Rng>(rng: &mut R) -> FlatProblem {
    loop {
        let vars = &VARS[..rng.gen_range(1..=2)];
        let mut cands: Vec<Atom> = CONSTANTS.iter().map(|c| Atom::constant(c)).collect();
        for r in ROLES {
            for c in CONSTANTS {
                cands.push(Atom::exists(r, Concept::constant(c)));
            }
            for x in vars {
                cands.push(Atom::exists(r, Concept::var(x)));
            }
        }
        cands.shuffle(rng);
        cands.truncate(rng.gen_range(1..=4));
        cands.extend(vars.iter().map(|x| Atom::var(x)));
        let mut stmts = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let lhs = if rng.gen_bool(0.1) {
                Concept::top()
            } else {
                pick(rng, &cands, 1, 2)
            };
            if rng.gen_bool(0.55) {
                stmts.push(Statement::sub(lhs, pick(rng, &cands, 1, 1)));
            } else {
                let rhs = if rng.gen_bool(0.05) {
                    Concept::top()
                } else {
                    pick(rng, &cands, 1, 2)
                };
                stmts.push(Statement::dissub(lhs, rhs));
            }
        }
        let f = FlatProblem::new(signature(vars), stmts);
        if AtomUniverse::of(&f).at_nv.len() <= 6 {
            return f;
        }
    }
}

/// A concept term of role depth at most `depth`.
pub fn random_term<R: Rng>(rng: &mut R, depth: usize, vars: &[&str]) -> Concept {
    let n = rng.gen_range(0..=2);
    Concept::conj((0..n).map(|_| random_atom(rng, depth, vars)))
}

pub fn random_atom<R: Rng>(rng: &mut R, depth: usize, vars: &[&str]) -> Atom {
    let names = CONSTANTS.len() + vars.len();
    if depth == 0 || rng.gen_bool(0.5) {
        let i = rng.gen_range(0..names);
        if i < CONSTANTS.len() {
            Atom::constant(CONSTANTS[i])
        } else {
            Atom::var(vars[i - CONSTANTS.len()])
        }
    } else {
        let r = ROLES.choose(rng).unwrap();
        Atom::exists(r, random_term(rng, depth - 1, vars))
    }
}

/// A dismatching problem: every dissubsumption has a ground side.
pub fn random_dismatching<R: Rng>(rng: &mut R) -> BasicProblem {
    let vars = &VARS[..rng.gen_range(1..=2)];
    let mut stmts = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        if rng.gen_bool(0.5) {
            stmts.push(Statement::sub(random_term(rng, 2, vars), random_term(rng, 2, vars)));
        } else {
            let g = random_term(rng, 2, &[]);
            let o = random_term(rng, 2, vars);
            if rng.gen() {
                stmts.push(Statement::dissub(g, o));
            } else {
                stmts.push(Statement::dissub(o, g));
            }
        }
    }
    BasicProblem::new(signature(vars), stmts)
}

/// Every atom of role depth at most `depth` over the two constants and roles.
pub fn all_ground_atoms(depth: usize) -> Vec<Atom> {
    let mut atoms: Vec<Atom> = CONSTANTS.iter().map(|c| Atom::constant(c)).collect();
    if depth > 0 {
        for t in all_ground_terms(depth - 1) {
            for r in ROLES {
                atoms.push(Atom::exists(r, t.clone()));
            }
        }
    }
    atoms
}

/// Every ground term of role depth at most `depth` (as sets of atoms).
pub fn all_ground_terms(depth: usize) -> Vec<Concept> {
    let atoms = all_ground_atoms(depth);
    assert!(atoms.len() < 20);
    (0u32..1 << atoms.len())
        .map(|mask| {
            Concept::conj(
                atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, a)| a.clone()),
            )
        })
        .collect()
}
