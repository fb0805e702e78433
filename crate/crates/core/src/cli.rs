//! The command-line verbs as functions from text to text, so they can be
//! tested without spawning processes.
//!
//! Exit codes: 0 solution found (or check passed), 1 no solution exists (or
//! check failed), 2 no local solution but solvability is open, 3 error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use crate::engine::{solve_general, Engine, EngineOptions, Route};
use crate::error::{Error, Result};
use crate::local::{verify_general, DEFAULT_BRUTE_CAP};
use crate::normalize::{enumerate_basic_problems, flatten, is_fresh_name, variablize_dissubsumptions};
use crate::parse::{parse_problem, parse_substitution, render_statement, render_substitution};
use crate::sat::dimacs::{emit_dimacs, parse_dimacs};
use crate::sat::{build_clauses, SatBackend, SatResult, Solver};
use crate::term::Substitution;

pub const EXIT_FOUND: i32 = 0;
pub const EXIT_UNSOLVABLE: i32 = 1;
pub const EXIT_OPEN: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

pub const NO_LOCAL_SOLUTION: &str = "no local solution (general solvability not decided)";

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub engine: Engine,
    /// `None` means all solutions.
    pub max: Option<usize>,
    pub dedup: bool,
    pub verify: bool,
    pub timeout_ms: Option<u64>,
    pub sat_cmd: Option<String>,
    pub show_reduced: bool,
    pub show_internal: bool,
    pub trace: bool,
    pub force_local: bool,
    pub threads: usize,
    pub brute_cap: usize,
    pub dimacs_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            engine: Engine::Sat,
            max: Some(1),
            dedup: false,
            verify: true,
            timeout_ms: None,
            sat_cmd: None,
            show_reduced: false,
            show_internal: false,
            trace: false,
            force_local: false,
            threads: 1,
            brute_cap: DEFAULT_BRUTE_CAP,
            dimacs_out: None,
        }
    }
}

impl RunConfig {
    pub fn engine_options(&self) -> EngineOptions {
        EngineOptions {
            engine: self.engine,
            max: self.max,
            dedup: self.dedup,
            brute_cap: self.brute_cap,
            backend: match &self.sat_cmd {
                Some(c) => SatBackend::External(c.clone()),
                None => SatBackend::BuiltIn,
            },
            deadline: self.timeout_ms.map(|ms| Instant::now() + Duration::from_millis(ms)),
            threads: self.threads.max(1),
            force_local: self.force_local,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl RunOutput {
    fn error(e: &Error, stdout: String) -> RunOutput {
        RunOutput {
            code: EXIT_ERROR,
            stdout,
            stderr: format!("error: {e}\n"),
        }
    }
}

fn finish(r: Result<(i32, String)>) -> RunOutput {
    match r {
        Ok((code, stdout)) => RunOutput {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(e) => RunOutput::error(&e, String::new()),
    }
}

fn comment_block(out: &mut String, text: &str) {
    for line in text.lines() {
        let _ = writeln!(out, "# {line}");
    }
}

pub fn run_solve(cfg: &RunConfig, problem: &str) -> RunOutput {
    finish(solve_text(cfg, problem))
}

fn solve_text(cfg: &RunConfig, problem: &str) -> Result<(i32, String)> {
    let g = parse_problem(problem)?;
    let outcome = solve_general(&g, &cfg.engine_options())?;
    let mut out = String::new();
    if cfg.show_reduced {
        for (i, run) in outcome.runs.iter().enumerate() {
            for (j, f) in run.flat.iter().enumerate() {
                let _ = writeln!(out, "# problem {}.{} ({:?})", i + 1, j + 1, run.route);
                comment_block(&mut out, &f.render());
            }
        }
    }
    for (i, found) in outcome.found.iter().enumerate() {
        let sigma = &found.solution.substitution;
        if cfg.verify && !verify_general(&g, sigma)? {
            return Err(Error::InternalEncoding(format!(
                "solution {} does not solve the input problem",
                i + 1
            )));
        }
        let label = if found.route == Route::LocalOnly { " LOCAL-ONLY" } else { "" };
        let _ = writeln!(out, "solution {}{label}:", i + 1);
        out.push_str(&render_substitution(sigma));
        if cfg.show_internal {
            let internal: Substitution = found
                .solution
                .internal
                .iter()
                .filter(|(x, _)| is_fresh_name(x))
                .map(|(x, t)| (x.clone(), t.clone()))
                .collect();
            comment_block(&mut out, &render_substitution(&internal));
        }
        if cfg.trace {
            for step in &found.solution.trace {
                let _ = writeln!(out, "#   {step}");
            }
        }
        out.push('\n');
    }
    let code = if !outcome.found.is_empty() {
        EXIT_FOUND
    } else if outcome.complete() {
        out.push_str("no solution\n");
        EXIT_UNSOLVABLE
    } else {
        out.push_str(NO_LOCAL_SOLUTION);
        out.push('\n');
        EXIT_OPEN
    };
    Ok((code, out))
}

pub fn run_check(cfg: &RunConfig, problem: &str, substitution: &str) -> RunOutput {
    finish(check_text(cfg, problem, substitution))
}

fn check_text(cfg: &RunConfig, problem: &str, substitution: &str) -> Result<(i32, String)> {
    let g = parse_problem(problem)?;
    let sigma = parse_substitution(substitution, &g.signature)?;
    if let Some(x) = g.signature.variables.iter().find(|x| sigma.get(x).is_none()) {
        return Err(Error::UnboundVariable(x.to_string()));
    }
    let mut out = String::new();
    if cfg.trace {
        // Statement verdicts for conjunctions, truth values of the atomic
        // subsumptions otherwise.
        let (leaves, words) = match g.as_basic() {
            Some(b) => (b.statements.into_iter().collect(), ["holds", "fails"]),
            None => (g.formula.leaves().into_iter().cloned().collect::<Vec<_>>(), ["true", "false"]),
        };
        for s in &leaves {
            let verdict = if s.holds_under(&sigma)? { words[0] } else { words[1] };
            let _ = writeln!(out, "{verdict}: {}", render_statement(s));
        }
    }
    let ok = verify_general(&g, &sigma)?;
    out.push_str(if ok { "solution\n" } else { "not a solution\n" });
    Ok((if ok { EXIT_FOUND } else { EXIT_UNSOLVABLE }, out))
}

/// Prints the flattened form of every basic problem of the input.
pub fn run_flatten(_cfg: &RunConfig, problem: &str) -> RunOutput {
    finish(parse_problem(problem).map(|g| {
        let mut out = String::new();
        let basics: Vec<_> = enumerate_basic_problems(&g).collect();
        for (i, b) in basics.iter().enumerate() {
            if basics.len() > 1 {
                let _ = writeln!(out, "# basic problem {}", i + 1);
            }
            out.push_str(&flatten(b).render());
        }
        (EXIT_FOUND, out)
    }))
}

/// Writes the clause set of a basic problem. With `dimacs_out` the CNF goes
/// to that path and the variable map next to it with a `.varmap` suffix;
/// otherwise both go to standard output, the map as comment lines.
pub fn run_encode(cfg: &RunConfig, problem: &str) -> RunOutput {
    finish(encode_text(cfg, problem))
}

fn encode_text(cfg: &RunConfig, problem: &str) -> Result<(i32, String)> {
    let g = parse_problem(problem)?;
    let b = g.as_basic().ok_or_else(|| Error::Syntax {
        line: 1,
        col: 1,
        expected: "a conjunction of (dis)subsumptions for `encode`".into(),
    })?;
    let f = variablize_dissubsumptions(&flatten(&b));
    let e = build_clauses(&f)?;
    let (cnf, varmap) = emit_dimacs(&e.cnf, &e.map);
    match &cfg.dimacs_out {
        Some(path) => {
            std::fs::write(path, &cnf)?;
            let mut vm = path.clone().into_os_string();
            vm.push(".varmap");
            std::fs::write(&vm, &varmap)?;
            let out = format!(
                "wrote {} ({} variables, {} clauses) and {}\n",
                path.display(),
                e.cnf.num_vars,
                e.cnf.clauses.len(),
                PathBuf::from(vm).display()
            );
            Ok((EXIT_FOUND, out))
        }
        None => {
            let mut out = String::new();
            comment_block(&mut out, &varmap);
            out.push_str(&cnf);
            Ok((EXIT_FOUND, out))
        }
    }
}

/// Solves a DIMACS file with the built-in solver and prints the result in
/// the usual competition format.
pub fn run_sat_solve(cfg: &RunConfig, cnf_text: &str) -> RunOutput {
    finish(parse_dimacs(cnf_text).and_then(|cnf| {
        let mut s = Solver::new(cnf.num_vars);
        s.set_deadline(cfg.engine_options().deadline);
        for c in &cnf.clauses {
            s.add_clause(c);
        }
        Ok(match s.solve()? {
            SatResult::Unsat => (20, "s UNSATISFIABLE\n".to_string()),
            SatResult::Sat(m) => {
                let mut out = String::from("s SATISFIABLE\nv");
                for (v, &b) in m.iter().enumerate().skip(1) {
                    let _ = write!(out, " {}", if b { v as i64 } else { -(v as i64) });
                }
                out.push_str(" 0\n");
                (10, out)
            }
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "vars X, Y; X <= B; A & B & C <= X; some r.X <= Y; top !<= Y; Y !<= some r.B;";

    #[test]
    fn example_routes_through_dismatching() {
        let r = run_solve(&RunConfig::default(), EXAMPLE);
        assert_eq!(r.code, EXIT_FOUND, "{r:?}");
        assert!(r.stdout.starts_with("solution 1:\n"));
    }

    #[test]
    fn example_forced_local_is_open() {
        let cfg = RunConfig {
            force_local: true,
            ..RunConfig::default()
        };
        let r = run_solve(&cfg, EXAMPLE);
        assert_eq!(r.code, EXIT_OPEN);
        assert!(r.stdout.contains(NO_LOCAL_SOLUTION));
    }

    #[test]
    fn check_verdicts() {
        let ok = run_check(&RunConfig::default(), EXAMPLE, "X := A & B & C; Y := some r.(A & C);");
        assert_eq!(ok.code, EXIT_FOUND);
        let bad = run_check(&RunConfig::default(), EXAMPLE, "X := A & B & C; Y := some r.B;");
        assert_eq!(bad.code, EXIT_UNSOLVABLE);
        assert_eq!(run_check(&RunConfig::default(), "", "").code, EXIT_FOUND);
        assert_eq!(run_check(&RunConfig::default(), EXAMPLE, "X := A;").code, EXIT_ERROR);
    }

    #[test]
    fn unsolvable_unification() {
        let r = run_solve(&RunConfig::default(), "A <= B;");
        assert_eq!(r.code, EXIT_UNSOLVABLE);
    }

    #[test]
    fn sat_solve_output() {
        let r = run_sat_solve(&RunConfig::default(), "p cnf 2 2\n1 0\n-2 0\n");
        assert_eq!(r.stdout, "s SATISFIABLE\nv 1 -2 0\n");
        let r = run_sat_solve(&RunConfig::default(), "p cnf 1 2\n1 0\n-1 0\n");
        assert_eq!(r.stdout, "s UNSATISFIABLE\n");
    }
}
