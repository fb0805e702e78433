//! All local solutions of a flat problem, enumerated with the SAT encoding.

use el_disunify::normalize::{flatten, variablize_dissubsumptions};
use el_disunify::parse::{parse_problem, render_substitution};
use el_disunify::sat::{enumerate_models, SatOptions};

fn main() {
    let b = parse_problem("vars X, Y; A & B <= X; X <= Y; Y !<= B;")
        .unwrap()
        .as_basic()
        .unwrap();
    let f = variablize_dissubsumptions(&flatten(&b));
    let mut models = enumerate_models(&f, &SatOptions::default()).unwrap();
    let c = models.encoding().counts.clone();
    println!("{} variables, {} clauses", models.encoding().cnf.num_vars, c.total());
    for (i, m) in models.by_ref().enumerate() {
        let (_, sigma) = m.unwrap();
        print!("model {}:\n{}", i + 1, render_substitution(&sigma.restrict(b.variables())));
    }
}
