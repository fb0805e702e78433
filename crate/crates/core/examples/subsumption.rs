//! Structural subsumption between EL concept terms.

use std::collections::BTreeSet;

use el_disunify::parse::parse_term;
use el_disunify::term::{dissubsumption_witness, equivalent, subsumes};

fn main() {
    let none = BTreeSet::new();
    let c = parse_term("Patient & some finding.(Injury & some finding_site.Head)", &none).unwrap();
    let d = parse_term("some finding.Injury", &none).unwrap();
    let e = parse_term("some finding.(Injury & Severe)", &none).unwrap();

    println!("{c} <= {d}: {}", subsumes(&c, &d));
    println!("{c} <= {e}: {}", subsumes(&c, &e));
    if let Some(w) = dissubsumption_witness(&c, &e) {
        println!("  witness: no atom on the left is below {w}");
    }
    let dup = parse_term("A & A & some r.(B & B)", &none).unwrap();
    println!("A & A & some r.(B & B) is stored as {dup}");
    let big = parse_term("some r.(B & A) & some r.B", &none).unwrap();
    println!("{big} == some r.(A & B): {}", equivalent(&big, &parse_term("some r.(A & B)", &none).unwrap()));
}
