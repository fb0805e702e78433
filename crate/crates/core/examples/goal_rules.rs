//! The goal-oriented rule system on a flat disunification problem.

use el_disunify::goal::solve_goal_oriented;
use el_disunify::normalize::flatten;
use el_disunify::parse::{parse_problem, render_substitution};

fn main() {
    let b = parse_problem("vars X, Y; X <= A & some r.Y; Y !<= B; some r.B !<= X;")
        .unwrap()
        .as_basic()
        .unwrap();
    let f = flatten(&b);
    print!("{}", f.render());
    for (i, sol) in solve_goal_oriented(&f).enumerate() {
        let sol = sol.unwrap();
        println!("branch {}:", i + 1);
        for step in &sol.trace {
            println!("  {step}");
        }
        print!("{}", render_substitution(&sol.substitution.restrict(b.variables())));
    }
}
