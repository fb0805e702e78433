mod common;

use el_disunify::local::{brute_force_local_solve, DEFAULT_BRUTE_CAP};
use el_disunify::normalize::variablize_dissubsumptions;
use el_disunify::sat::{build_clauses, decode, SatResult, Solver};
use el_disunify::term::{subsumes, Atom, Concept};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Decoded models: the order is acyclic, the substitution solves the
/// problem, and every `[C <= D]` bit agrees with subsumption of the images.
#[test]
fn models_agree_with_their_substitutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut models = 0;
    for _ in 0..150 {
        let f = common::random_flat(&mut rng);
        let v = variablize_dissubsumptions(&f);
        let e = build_clauses(&v).unwrap();
        let map = &e.map;
        let u = &map.universe;
        let mut s = Solver::new(e.cnf.num_vars);
        for c in &e.cnf.clauses {
            s.add_clause(c);
        }
        let brute = brute_force_local_solve(&f, DEFAULT_BRUTE_CAP).unwrap().next().is_some();
        let mut any = false;
        for _ in 0..20 {
            let SatResult::Sat(m) = s.solve().unwrap() else { break };
            any = true;
            models += 1;
            let (_, sigma) = decode(&m, map).unwrap();
            assert!(v.is_solved_by(&sigma).unwrap());
            let img: Vec<Concept> = u.at.iter().map(|a| sigma.apply(&Concept::atom(a.clone())).unwrap()).collect();
            for ci in 0..u.at.len() {
                for di in 0..u.at.len() {
                    assert_eq!(
                        m[map.sub_var(ci, di) as usize],
                        subsumes(&img[ci], &img[di]),
                        "{} <= {} in\n{}",
                        u.at[ci],
                        u.at[di],
                        v.render()
                    );
                }
            }
            let block: Vec<i32> = (0..e.cnf.num_vars as i32)
                .map(|i| i + 1)
                .filter(|&i| matches!(map.meaning(i), Some(el_disunify::sat::encode::VarMeaning::Sub(Atom::Var(_), _))))
                .map(|i| if m[i as usize] { -i } else { i })
                .collect();
            if block.is_empty() || !s.add_clause(&block) {
                break;
            }
        }
        assert_eq!(any, brute, "satisfiability differs from brute force on\n{}", f.render());
    }
    assert!(models > 100);
}
