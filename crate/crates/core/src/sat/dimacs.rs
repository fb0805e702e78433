//! DIMACS CNF text, the variable-map sidecar, and the external solver
//! protocol.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Read;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::encode::{CnfInstance, SatVarMap, VarMeaning};
use super::solver::SatResult;
use crate::error::{Error, Result};
use crate::parse::render_atom;

pub fn emit_cnf(cnf: &CnfInstance) -> String {
    let mut out = format!("p cnf {} {}\n", cnf.num_vars, cnf.clauses.len());
    for c in &cnf.clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

pub fn emit_varmap(map: &SatVarMap) -> String {
    let mut out = String::new();
    for id in 1..=map.num_vars() as i32 {
        let line = match map.meaning(id).expect("id in range") {
            VarMeaning::Sub(c, d) => format!("{id} SUB {} | {}", render_atom(&c), render_atom(&d)),
            VarMeaning::Gt(x, y) => format!("{id} GT {x} | {y}"),
            VarMeaning::P(c, x, d) => {
                format!("{id} P {} | {x} | {}", render_atom(&c), render_atom(&d))
            }
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Returns the CNF text and the variable-map text.
pub fn emit_dimacs(cnf: &CnfInstance, map: &SatVarMap) -> (String, String) {
    (emit_cnf(cnf), emit_varmap(map))
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedSolverOutput(msg.into())
}

/// Reads DIMACS CNF; comment lines are skipped and clauses may span lines.
pub fn parse_dimacs(text: &str) -> Result<CnfInstance> {
    let mut header = None;
    let mut clauses = Vec::new();
    let mut cur = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let f: Vec<&str> = rest.split_whitespace().collect();
            if f.len() != 3 || f[0] != "cnf" {
                return Err(malformed(format!("bad header `{line}`")));
            }
            let v: usize = f[1].parse().map_err(|_| malformed("bad variable count"))?;
            let c: usize = f[2].parse().map_err(|_| malformed("bad clause count"))?;
            header = Some((v, c));
            continue;
        }
        let (nv, _) = header.ok_or_else(|| malformed("clause before header"))?;
        for tok in line.split_whitespace() {
            let l: i32 = tok.parse().map_err(|_| malformed(format!("bad literal `{tok}`")))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else if l.unsigned_abs() as usize > nv {
                return Err(malformed(format!("literal {l} out of range")));
            } else {
                cur.push(l);
            }
        }
    }
    let (num_vars, nc) = header.ok_or_else(|| malformed("missing header"))?;
    if !cur.is_empty() {
        return Err(malformed("unterminated clause"));
    }
    if clauses.len() != nc {
        return Err(malformed(format!("header declares {nc} clauses, found {}", clauses.len())));
    }
    Ok(CnfInstance { num_vars, clauses })
}

/// Parses solver output in the competition format. Variables missing from
/// the `v` lines default to false.
pub fn parse_external_model(text: &str, num_vars: usize) -> Result<SatResult> {
    let mut status = None;
    let mut model = vec![false; num_vars + 1];
    let mut terminated = false;
    for line in text.lines() {
        let line = line.trim();
        if let Some(s) = line.strip_prefix("s ") {
            status = Some(match s.trim() {
                "SATISFIABLE" => true,
                "UNSATISFIABLE" => false,
                other => return Err(malformed(format!("unknown status `{other}`"))),
            });
        } else if let Some(vs) = line.strip_prefix("v ").or(if line == "v" { Some("") } else { None }) {
            for tok in vs.split_whitespace() {
                let l: i64 = tok.parse().map_err(|_| malformed(format!("bad literal `{tok}`")))?;
                if l == 0 {
                    terminated = true;
                    continue;
                }
                let v = l.unsigned_abs() as usize;
                if v > num_vars {
                    return Err(malformed(format!("literal {l} out of range")));
                }
                model[v] = l > 0;
            }
        }
    }
    match status {
        Some(true) if terminated || num_vars == 0 => Ok(SatResult::Sat(model)),
        Some(true) => Err(malformed("model not terminated by 0")),
        Some(false) => Ok(SatResult::Unsat),
        None => Err(malformed("no status line")),
    }
}

/// Runs `template` on a temporary DIMACS file. `{}` in the template is
/// replaced by the path; otherwise the path is appended.
pub fn run_external(template: &str, cnf: &CnfInstance, deadline: Option<Instant>) -> Result<SatResult> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("problem.cnf");
    std::fs::write(&path, emit_cnf(cnf))?;
    let p = path.display().to_string();
    let cmd = if template.contains("{}") {
        template.replace("{}", &p)
    } else {
        format!("{template} {p}")
    };
    let out_path = dir.path().join("stdout");
    let err_path = dir.path().join("stderr");
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&cmd)
        .stdin(Stdio::null())
        .stdout(File::create(&out_path)?)
        .stderr(File::create(&err_path)?)
        .spawn()?;
    let status = loop {
        if let Some(st) = child.try_wait()? {
            break st;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::Timeout);
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let mut text = String::new();
    File::open(&out_path)?.read_to_string(&mut text)?;
    match parse_external_model(&text, cnf.num_vars) {
        Err(_) if !text.lines().any(|l| l.starts_with("s ")) && !status.success() => {
            let mut stderr = String::new();
            File::open(&err_path)?.read_to_string(&mut stderr)?;
            Err(Error::ExternalSolver {
                status: status.to_string(),
                stderr: stderr.chars().take(400).collect(),
            })
        }
        r => r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::solver::Solver;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_clause() {
        let cnf = CnfInstance { num_vars: 1, clauses: vec![vec![1]] };
        assert_eq!(emit_cnf(&cnf), "p cnf 1 1\n1 0\n");
    }

    #[test]
    fn model_lines() {
        let r = parse_external_model("c hi\ns SATISFIABLE\nv 1 -2\nv 3 0\n", 3).unwrap();
        assert_eq!(r, SatResult::Sat(vec![false, true, false, true]));
        assert_eq!(parse_external_model("s UNSATISFIABLE\n", 3).unwrap(), SatResult::Unsat);
        assert!(parse_external_model("v 1 0\n", 1).is_err());
        assert!(parse_external_model("s SATISFIABLE\nv 9 0\n", 1).is_err());
    }

    fn solve(cnf: &CnfInstance) -> bool {
        let mut s = Solver::new(cnf.num_vars);
        for c in &cnf.clauses {
            s.add_clause(c);
        }
        matches!(s.solve().unwrap(), SatResult::Sat(_))
    }

    #[test]
    fn round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..12);
            let m = rng.gen_range(0..50);
            let clauses = (0..m)
                .map(|_| {
                    (0..rng.gen_range(1..4))
                        .map(|_| {
                            let v = rng.gen_range(1..=n) as i32;
                            if rng.gen() { v } else { -v }
                        })
                        .collect()
                })
                .collect();
            let cnf = CnfInstance { num_vars: n, clauses };
            let back = parse_dimacs(&emit_cnf(&cnf)).unwrap();
            assert_eq!(back, cnf);
            assert_eq!(solve(&back), solve(&cnf));
        }
    }

    #[test]
    fn external_command() {
        let cnf = CnfInstance { num_vars: 2, clauses: vec![vec![1], vec![-2]] };
        let r = run_external("cat {} > /dev/null; printf 's SATISFIABLE\\nv 1 -2 0\\n'", &cnf, None).unwrap();
        assert_eq!(r, SatResult::Sat(vec![false, true, false]));
        let r = run_external("echo 's UNSATISFIABLE'; exit 20; true", &cnf, None).unwrap();
        assert_eq!(r, SatResult::Unsat);
        assert!(matches!(run_external("exit 3; true", &cnf, None), Err(Error::ExternalSolver { .. })));
        let d = Some(Instant::now() + Duration::from_millis(50));
        assert_eq!(run_external("sleep 5; true", &cnf, d), Err(Error::Timeout));
    }
}
