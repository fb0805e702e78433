//! Writes the clause set of a problem in DIMACS format, with the variable
//! map, and solves it again from the text.

use el_disunify::normalize::{flatten, variablize_dissubsumptions};
use el_disunify::parse::parse_problem;
use el_disunify::sat::dimacs::{emit_dimacs, parse_dimacs};
use el_disunify::sat::{build_clauses, decode, SatResult, Solver};

fn main() {
    let b = parse_problem("vars X; some r.X <= some r.A; X !<= A & B;")
        .unwrap()
        .as_basic()
        .unwrap();
    let f = variablize_dissubsumptions(&flatten(&b));
    let e = build_clauses(&f).unwrap();
    let (cnf, varmap) = emit_dimacs(&e.cnf, &e.map);
    for line in varmap.lines().filter(|l| !l.contains(" SUB ")) {
        println!("{line}");
    }
    println!("{}", cnf.lines().next().unwrap());

    let back = parse_dimacs(&cnf).unwrap();
    let mut s = Solver::new(back.num_vars);
    for c in &back.clauses {
        s.add_clause(c);
    }
    match s.solve().unwrap() {
        SatResult::Sat(m) => println!("{:?}", decode(&m, &e.map).unwrap().1),
        SatResult::Unsat => println!("unsatisfiable"),
    }
}
