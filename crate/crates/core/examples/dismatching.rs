//! The rule-based reduction of a dismatching problem, with the rules
//! applied on each successful branch.

use el_disunify::dismatch::reduce_dismatching;
use el_disunify::engine::{local_solutions, EngineOptions};
use el_disunify::parse::{parse_problem, render_substitution};

fn main() {
    let b = parse_problem("vars X, Y; X <= A; some r.X <= Y; Y !<= some r.(A & B);")
        .unwrap()
        .as_basic()
        .unwrap();
    let mut red = reduce_dismatching(&b).unwrap();
    println!("initial measure {}", red.initial_measure());
    for (i, r) in red.by_ref().enumerate() {
        println!("reduced problem {}:", i + 1);
        for step in &r.trace {
            println!("  {step}");
        }
        print!("{}", r.problem.render());
        let sols = local_solutions(&r.problem, &EngineOptions::default()).unwrap();
        match sols.first() {
            Some(s) => print!("first local solution:\n{}", render_substitution(&s.substitution)),
            None => println!("no local solution"),
        }
    }
    println!("{} rule applications, {} failed branches", red.applications, red.violations);
}
