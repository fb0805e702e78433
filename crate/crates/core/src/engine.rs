//! Uniform access to the three local engines, complete dismatching on top
//! of them, and the routing of general problems.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::dismatch::{reduce_dismatching, Reduced};
use crate::error::{Error, Result};
use crate::goal::solve_goal_oriented;
use crate::local::{brute_force_local_solve, DEFAULT_BRUTE_CAP};
use crate::normalize::{enumerate_basic_problems, flatten, variablize_dissubsumptions, FlatProblem};
use crate::problem::{BasicProblem, GeneralProblem};
use crate::sat::{enumerate_models, SatBackend, SatOptions};
use crate::term::{substitutions_equivalent, Concept, Substitution, Symbol};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Engine {
    Brute,
    Rules,
    #[default]
    Sat,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Brute => "brute",
            Engine::Rules => "rules",
            Engine::Sat => "sat",
        })
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Engine, String> {
        match s {
            "brute" => Ok(Engine::Brute),
            "rules" => Ok(Engine::Rules),
            "sat" => Ok(Engine::Sat),
            _ => Err(format!("unknown engine `{s}` (expected brute, rules or sat)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub engine: Engine,
    /// `None` means all solutions.
    pub max: Option<usize>,
    /// Drop solutions equivalent to an earlier one.
    pub dedup: bool,
    pub brute_cap: usize,
    pub backend: SatBackend,
    pub deadline: Option<Instant>,
    /// Worker threads for the reduced problems of a dismatching problem.
    pub threads: usize,
    /// Route everything through the local engines.
    pub force_local: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            engine: Engine::Sat,
            max: Some(1),
            dedup: false,
            brute_cap: DEFAULT_BRUTE_CAP,
            backend: SatBackend::BuiltIn,
            deadline: None,
            threads: 1,
            force_local: false,
        }
    }
}

impl EngineOptions {
    pub fn with_engine(engine: Engine) -> EngineOptions {
        EngineOptions {
            engine,
            ..EngineOptions::default()
        }
    }

    pub fn all(mut self) -> EngineOptions {
        self.max = None;
        self
    }

    fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::Timeout),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub substitution: Substitution,
    /// The engine's substitution, including generated variables.
    pub internal: Substitution,
    /// Rule applications that produced the solution, when the engine
    /// records them.
    pub trace: Vec<String>,
}

/// Collects solutions, dropping exact repeats (and equivalent ones when
/// asked to) and stopping at the limit.
struct Collector {
    out: Vec<Solution>,
    seen: HashSet<Substitution>,
    dedup: bool,
    max: Option<usize>,
}

impl Collector {
    fn new(opts: &EngineOptions) -> Collector {
        Collector {
            out: Vec::new(),
            seen: HashSet::new(),
            dedup: opts.dedup,
            max: opts.max,
        }
    }

    fn full(&self) -> bool {
        self.max.is_some_and(|m| self.out.len() >= m)
    }

    /// Returns false once the limit is reached.
    fn push(&mut self, s: Solution) -> Result<bool> {
        if self.full() {
            return Ok(false);
        }
        if self.seen.insert(s.substitution.clone()) {
            let mut fresh = true;
            if self.dedup {
                for o in &self.out {
                    if substitutions_equivalent(&o.substitution, &s.substitution)? {
                        fresh = false;
                        break;
                    }
                }
            }
            if fresh {
                self.out.push(s);
            }
        }
        Ok(!self.full())
    }
}

/// Restricts `sigma` to `vars`, binding the missing ones to `top`.
pub fn complete_on(sigma: &Substitution, vars: &BTreeSet<Symbol>) -> Substitution {
    let mut out = sigma.restrict(vars);
    for x in vars {
        if out.get(x).is_none() {
            out.bind(x.clone(), Concept::top()).expect("top is ground");
        }
    }
    out
}

fn for_each_local(f: &FlatProblem, opts: &EngineOptions, mut emit: impl FnMut(Solution) -> Result<bool>) -> Result<()> {
    let vars = f.variables();
    match opts.engine {
        Engine::Brute => {
            let mut it = brute_force_local_solve(f, opts.brute_cap)?.with_deadline(opts.deadline);
            for (_, sigma) in it.by_ref() {
                let s = Solution {
                    substitution: sigma.clone(),
                    internal: sigma,
                    trace: Vec::new(),
                };
                if !emit(s)? {
                    return Ok(());
                }
            }
            if it.timed_out {
                return Err(Error::Timeout);
            }
        }
        Engine::Rules => {
            for r in solve_goal_oriented(f).with_deadline(opts.deadline) {
                let g = r?;
                let s = Solution {
                    substitution: g.substitution.clone(),
                    internal: g.substitution,
                    trace: g.trace.iter().map(ToString::to_string).collect(),
                };
                if !emit(s)? {
                    return Ok(());
                }
            }
        }
        Engine::Sat => {
            let v = variablize_dissubsumptions(f);
            let sat = SatOptions {
                backend: opts.backend.clone(),
                deadline: opts.deadline,
            };
            for r in enumerate_models(&v, &sat)? {
                let (_, sigma) = r?;
                let s = Solution {
                    substitution: sigma.restrict(&vars),
                    internal: sigma,
                    trace: Vec::new(),
                };
                if !emit(s)? {
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}

/// Local solutions of `f` on its own variables. The SAT engine works on the
/// variablized problem; solutions that coincide on the variables of `f` are
/// reported once.
pub fn local_solutions(f: &FlatProblem, opts: &EngineOptions) -> Result<Vec<Solution>> {
    let mut c = Collector::new(opts);
    for_each_local(f, opts, |s| c.push(s))?;
    Ok(c.out)
}

#[derive(Clone, Debug)]
pub struct DismatchOutcome {
    /// Solutions on the variables of the input problem.
    pub solutions: Vec<Solution>,
    /// Reduced problems examined, in order.
    pub reduced: Vec<Reduced>,
    /// Failed branches of the reduction.
    pub failures: usize,
}

fn lift(b: &BasicProblem, r: &Reduced, s: Solution) -> Result<Solution> {
    let sigma = complete_on(&s.substitution, b.variables());
    if !b.is_solved_by(&sigma)? {
        return Err(Error::InternalEncoding(format!(
            "solution of a reduced problem does not solve the input: {sigma:?}"
        )));
    }
    let mut trace: Vec<String> = r.trace.iter().map(ToString::to_string).collect();
    trace.extend(s.trace);
    Ok(Solution {
        substitution: sigma,
        internal: s.internal,
        trace,
    })
}

/// Complete procedure for dismatching problems: every reduced problem is
/// handed to the chosen local engine. The result is empty iff `b` has no
/// solution (unless the limit was hit).
pub fn solve_dismatching(b: &BasicProblem, opts: &EngineOptions) -> Result<DismatchOutcome> {
    let mut reductions = reduce_dismatching(b)?;
    let mut c = Collector::new(opts);
    let mut reduced = Vec::new();
    if opts.threads > 1 {
        let all: Vec<Reduced> = reductions.by_ref().collect();
        // Without dedup each problem needs at most `max` solutions; with
        // dedup the merge below may discard some, so collect them all.
        let per = EngineOptions {
            max: if opts.dedup { None } else { opts.max },
            dedup: false,
            ..opts.clone()
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?;
        let results: Vec<Result<Vec<Solution>>> =
            pool.install(|| all.par_iter().map(|r| local_solutions(&r.problem, &per)).collect());
        for (r, sols) in all.iter().zip(results) {
            if c.full() {
                break;
            }
            reduced.push(r.clone());
            for s in sols? {
                if !c.push(lift(b, r, s)?)? {
                    break;
                }
            }
        }
    } else {
        for r in reductions.by_ref() {
            opts.check_deadline()?;
            for_each_local(&r.problem, opts, |s| c.push(lift(b, &r, s)?))?;
            reduced.push(r);
            if c.full() {
                break;
            }
        }
    }
    Ok(DismatchOutcome {
        solutions: c.out,
        reduced,
        failures: reductions.failures,
    })
}

/// How a basic problem was handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// No dissubsumptions: local solutions suffice.
    Unification,
    /// Every dissubsumption has a ground side: reduction, then local engines.
    Dismatching,
    /// Anything else: only local solutions are searched for.
    LocalOnly,
}

impl Route {
    /// Whether "no solution found" means "no solution exists".
    pub fn is_complete(self) -> bool {
        !matches!(self, Route::LocalOnly)
    }
}

#[derive(Clone, Debug)]
pub struct Found {
    pub solution: Solution,
    pub route: Route,
}

#[derive(Clone, Debug)]
pub struct BasicRun {
    pub problem: BasicProblem,
    pub route: Route,
    /// Flat problems handed to the local engines.
    pub flat: Vec<FlatProblem>,
}

#[derive(Clone, Debug)]
pub struct GeneralOutcome {
    pub found: Vec<Found>,
    pub runs: Vec<BasicRun>,
}

impl GeneralOutcome {
    /// True when every basic problem went through a complete route.
    pub fn complete(&self) -> bool {
        self.runs.iter().all(|r| r.route.is_complete())
    }
}

pub fn route_of(b: &BasicProblem, force_local: bool) -> Route {
    if b.is_unification() {
        Route::Unification
    } else if !force_local && b.is_dismatching() {
        Route::Dismatching
    } else {
        Route::LocalOnly
    }
}

/// Solves a general problem by enumerating its basic problems and routing
/// each one. Solutions are given on all declared variables, unused ones
/// bound to `top`.
pub fn solve_general(g: &GeneralProblem, opts: &EngineOptions) -> Result<GeneralOutcome> {
    let declared = g.signature.variables.clone();
    let mut c = Collector::new(opts);
    let mut routes = Vec::new();
    let mut runs = Vec::new();
    for b in enumerate_basic_problems(g) {
        opts.check_deadline()?;
        let route = route_of(&b, opts.force_local);
        let rest = EngineOptions {
            max: opts.max.map(|m| m - c.out.len()),
            ..opts.clone()
        };
        let (sols, flat) = match route {
            Route::Dismatching => {
                let d = solve_dismatching(&b, &rest)?;
                (d.solutions, d.reduced.into_iter().map(|r| r.problem).collect())
            }
            _ => {
                let f = flatten(&b);
                (local_solutions(&f, &rest)?, vec![f])
            }
        };
        for s in sols {
            let n = c.out.len();
            let sol = Solution {
                substitution: complete_on(&s.substitution, &declared),
                internal: s.internal,
                trace: s.trace,
            };
            c.push(sol)?;
            if c.out.len() > n {
                routes.push(route);
            }
        }
        runs.push(BasicRun {
            problem: b,
            route,
            flat,
        });
        if c.full() {
            break;
        }
    }
    let found = c
        .out
        .into_iter()
        .zip(routes)
        .map(|(solution, route)| Found { solution, route })
        .collect();
    Ok(GeneralOutcome { found, runs })
}
