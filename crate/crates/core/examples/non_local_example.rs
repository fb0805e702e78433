//! A disunification problem whose only solutions are not local: local
//! search comes back empty, the dismatching procedure finds a solution.

use el_disunify::engine::{local_solutions, solve_dismatching, Engine, EngineOptions};
use el_disunify::normalize::flatten;
use el_disunify::parse::{parse_problem, render_substitution};

const PROBLEM: &str = "vars X, Y;
X <= B;
A & B & C <= X;
some r.X <= Y;
top !<= Y;
Y !<= some r.B;
";

fn main() {
    let b = parse_problem(PROBLEM).unwrap().as_basic().unwrap();
    for engine in [Engine::Brute, Engine::Sat] {
        let local = local_solutions(&flatten(&b), &EngineOptions::with_engine(engine).all()).unwrap();
        println!("{engine}: {} local solutions", local.len());
    }
    let out = solve_dismatching(&b, &EngineOptions::default()).unwrap();
    for s in &out.solutions {
        print!("{}", render_substitution(&s.substitution));
    }
}
