//! Unification finds all ways to make two medical definitions equivalent;
//! a dissubsumption rules out the unwanted ones.

use el_disunify::engine::{solve_general, EngineOptions};
use el_disunify::parse::{parse_problem, render_substitution};

const UNIFY: &str = "vars Head_injury, Severe_finding;
Patient & some finding.(Head_injury & some severity.Severe)
  = Patient & some finding.(Severe_finding & Injury & some finding_site.Head);
";

fn count(text: &str) -> usize {
    let opts = EngineOptions {
        dedup: true,
        ..EngineOptions::default().all()
    };
    let out = solve_general(&parse_problem(text).unwrap(), &opts).unwrap();
    if let Some(first) = out.found.first() {
        print!("{}", render_substitution(&first.solution.substitution));
    }
    out.found.len()
}

fn main() {
    println!("{} unifiers", count(UNIFY));
    let restricted = format!("{UNIFY}Head_injury !<= some severity.Severe;\n");
    println!("{} with the extra dissubsumption", count(&restricted));
}
