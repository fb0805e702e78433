use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use el_disunify::cli::{self, RunConfig, RunOutput, EXIT_ERROR};
use el_disunify::engine::Engine;
use el_disunify::local::DEFAULT_BRUTE_CAP;

/// Unification, dismatching and local disunification in EL.
#[derive(Parser)]
#[command(name = "el-disunify", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Search for solutions of a problem file.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Check whether a substitution solves a problem.
    Check {
        problem: PathBuf,
        substitution: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Print the flattened problem.
    Flatten {
        problem: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Write the propositional encoding in DIMACS form.
    Encode {
        problem: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run the built-in SAT solver on a DIMACS file.
    SatSolve {
        cnf: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args)]
struct Opts {
    /// Local engine: sat, rules or brute.
    #[arg(long, default_value = "sat")]
    engine: Engine,
    /// Maximum number of solutions, or `all`.
    #[arg(long, default_value = "1")]
    max: String,
    /// Drop solutions equivalent to earlier ones.
    #[arg(long)]
    dedup: bool,
    /// Skip re-checking printed solutions.
    #[arg(long)]
    no_verify: bool,
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// External SAT solver command; `{}` is replaced by the DIMACS path.
    #[arg(long)]
    sat_cmd: Option<String>,
    /// Print the flat problems handed to the local engines.
    #[arg(long)]
    show_reduced: bool,
    /// Print bindings of generated variables.
    #[arg(long)]
    show_internal: bool,
    /// Print rule applications (solve) or per-statement verdicts (check).
    #[arg(long)]
    trace: bool,
    /// Use the local engines even for dismatching problems.
    #[arg(long)]
    force_local: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Largest brute-force search space, as a number of bits.
    #[arg(long, default_value_t = DEFAULT_BRUTE_CAP)]
    brute_cap: usize,
    /// Where `encode` writes the CNF; the variable map gets a `.varmap` suffix.
    #[arg(long)]
    dimacs_out: Option<PathBuf>,
}

impl Opts {
    fn config(&self) -> Result<RunConfig, String> {
        let max = match self.max.as_str() {
            "all" => None,
            n => Some(n.parse().map_err(|_| format!("--max: expected a number or `all`, got `{n}`"))?),
        };
        Ok(RunConfig {
            engine: self.engine,
            max,
            dedup: self.dedup,
            verify: !self.no_verify,
            timeout_ms: self.timeout_ms,
            sat_cmd: self.sat_cmd.clone(),
            show_reduced: self.show_reduced,
            show_internal: self.show_internal,
            trace: self.trace,
            force_local: self.force_local,
            threads: self.threads,
            brute_cap: self.brute_cap,
            dimacs_out: self.dimacs_out.clone(),
        })
    }
}

fn read(path: &Path) -> Result<String, String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| e.to_string())?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(verb: &Verb) -> Result<RunOutput, String> {
    Ok(match verb {
        Verb::Solve { problem, opts } => cli::run_solve(&opts.config()?, &read(problem)?),
        Verb::Check {
            problem,
            substitution,
            opts,
        } => cli::run_check(&opts.config()?, &read(problem)?, &read(substitution)?),
        Verb::Flatten { problem, opts } => cli::run_flatten(&opts.config()?, &read(problem)?),
        Verb::Encode { problem, opts } => cli::run_encode(&opts.config()?, &read(problem)?),
        Verb::SatSolve { cnf, opts } => cli::run_sat_solve(&opts.config()?, &read(cnf)?),
    })
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let out = run(&args.verb).unwrap_or_else(|e| RunOutput {
        code: EXIT_ERROR,
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    });
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
