//! Checking a candidate substitution against a problem with disjunctions.

use el_disunify::local::verify_general;
use el_disunify::parse::{parse_problem, parse_substitution};

fn main() {
    let g = parse_problem("vars X; X <= A or not (X <= some r.B); X !<= B;").unwrap();
    for text in ["X := A & some r.B;", "X := some r.B;", "X := B;"] {
        let sigma = parse_substitution(text, &g.signature).unwrap();
        println!("{text:<22} {}", verify_general(&g, &sigma).unwrap());
    }
}
