//! The clause set whose models correspond to local solutions of a flat
//! problem whose dissubsumptions all have the form `X !<= Y`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::local::{Assignment, AtomUniverse};
use crate::normalize::FlatProblem;
use crate::term::{subsumes, Atom, Concept, StatementKind, Substitution, Symbol};

/// Meaning of a propositional variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarMeaning {
    /// `[C <= D]` for atoms `C`, `D`.
    Sub(Atom, Atom),
    /// `[X > Y]` for variables.
    Gt(Symbol, Symbol),
    /// `p_{C,X,D}`.
    P(Atom, Symbol, Atom),
}

/// Dense numbering of the variables: first `[C <= D]` over `At x At`, then
/// `[X > Y]` over `Var x Var`, then `p_{C,X,D}` over `At x Var x At_nv`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatVarMap {
    pub universe: AtomUniverse,
}

impl SatVarMap {
    pub fn new(universe: AtomUniverse) -> SatVarMap {
        SatVarMap { universe }
    }

    fn a(&self) -> usize {
        self.universe.at.len()
    }

    fn v(&self) -> usize {
        self.universe.vars.len()
    }

    fn n(&self) -> usize {
        self.universe.at_nv.len()
    }

    pub fn num_vars(&self) -> usize {
        let (a, v, n) = (self.a(), self.v(), self.n());
        a * a + v * v + a * v * n
    }

    pub fn sub_var(&self, c: usize, d: usize) -> i32 {
        (1 + c * self.a() + d) as i32
    }

    pub fn gt_var(&self, x: usize, y: usize) -> i32 {
        (1 + self.a() * self.a() + x * self.v() + y) as i32
    }

    pub fn p_var(&self, c: usize, x: usize, d: usize) -> i32 {
        let base = 1 + self.a() * self.a() + self.v() * self.v();
        (base + (c * self.v() + x) * self.n() + d) as i32
    }

    /// `[X <= D]` for a variable index and an `At_nv` index.
    pub fn var_sub_nv(&self, x: usize, d: usize) -> i32 {
        let xa = self.universe.atom_index(&Atom::Var(self.universe.vars[x].clone())).unwrap();
        let da = self.universe.atom_index(&self.universe.at_nv[d]).unwrap();
        self.sub_var(xa, da)
    }

    pub fn meaning(&self, id: i32) -> Option<VarMeaning> {
        let (a, v, n) = (self.a(), self.v(), self.n());
        let mut i = (id as usize).checked_sub(1)?;
        let u = &self.universe;
        if i < a * a {
            return Some(VarMeaning::Sub(u.at[i / a].clone(), u.at[i % a].clone()));
        }
        i -= a * a;
        if i < v * v {
            return Some(VarMeaning::Gt(u.vars[i / v].clone(), u.vars[i % v].clone()));
        }
        i -= v * v;
        if i < a * v * n {
            let (cx, d) = (i / n, i % n);
            return Some(VarMeaning::P(
                u.at[cx / v].clone(),
                u.vars[cx % v].clone(),
                u.at_nv[d].clone(),
            ));
        }
        None
    }
}

/// Number of clauses emitted per clause family.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClauseCounts {
    pub ia: usize,
    pub ib: usize,
    pub ic: usize,
    pub iia: usize,
    pub iib: usize,
    pub iic: usize,
    pub iid: usize,
    pub iie: usize,
    pub iii: usize,
    pub iv: usize,
    pub va: usize,
    pub vb: usize,
    pub vc: usize,
}

impl ClauseCounts {
    pub fn total(&self) -> usize {
        self.ia
            + self.ib
            + self.ic
            + self.iia
            + self.iib
            + self.iic
            + self.iid
            + self.iie
            + self.iii
            + self.iv
            + self.va
            + self.vb
            + self.vc
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfInstance {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfInstance {
    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        super::solver::satisfies(&self.clauses, model)
    }

    /// Indices of the clauses violated by `model`.
    pub fn violated(&self, model: &[bool]) -> Vec<usize> {
        self.clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.iter().any(|&l| model[l.unsigned_abs() as usize] == (l > 0)))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Encoding {
    pub cnf: CnfInstance,
    pub map: SatVarMap,
    pub counts: ClauseCounts,
}

/// Builds the clause set. Every dissubsumption must be `X !<= Y`.
pub fn build_clauses(f: &FlatProblem) -> Result<Encoding> {
    if let Some(s) = f
        .dissubsumptions()
        .find(|s| s.lhs.as_var().is_none() || s.rhs.as_var().is_none())
    {
        return Err(Error::NotVariablized(s.to_string()));
    }
    let u = AtomUniverse::of(f);
    let map = SatVarMap::new(u.clone());
    let mut cl: Vec<Vec<i32>> = Vec::new();
    let mut k = ClauseCounts::default();
    let at = |a: &Atom| u.atom_index(a).expect("atom of the problem");
    let (na, nv) = (u.at.len(), u.vars.len());
    let nv_idx: Vec<usize> = u.at_nv.iter().map(at).collect();
    let var_idx: Vec<usize> = u.vars.iter().map(|x| at(&Atom::Var(x.clone()))).collect();

    // Translation of the problem.
    for s in &f.statements {
        let lhs: Vec<usize> = s.lhs.atoms().iter().map(at).collect();
        match s.kind {
            StatementKind::Sub => {
                for d in s.rhs.atoms() {
                    let di = at(d);
                    if d.is_var() {
                        for &e in &nv_idx {
                            let mut c = vec![-map.sub_var(di, e)];
                            c.extend(lhs.iter().map(|&ci| map.sub_var(ci, e)));
                            cl.push(c);
                            k.ib += 1;
                        }
                    } else {
                        cl.push(lhs.iter().map(|&ci| map.sub_var(ci, di)).collect());
                        k.ia += 1;
                    }
                }
            }
            StatementKind::Dissub => {
                cl.push(vec![-map.sub_var(lhs[0], at(&s.rhs.atoms()[0]))]);
                k.ic += 1;
            }
        }
    }

    // Subsumption between non-variable atoms.
    let consts: Vec<usize> = u.constants().map(at).collect();
    let exists: Vec<(usize, &Symbol, usize)> = u
        .existentials()
        .map(|e| match e {
            Atom::Exists(r, arg) => (at(e), r, at(&arg.atoms()[0])),
            _ => unreachable!(),
        })
        .collect();
    for &a in &consts {
        cl.push(vec![map.sub_var(a, a)]);
        k.iia += 1;
    }
    for &a in &consts {
        for &b in &consts {
            if a != b {
                cl.push(vec![-map.sub_var(a, b)]);
                k.iib += 1;
            }
        }
    }
    for &(e1, r, a1) in &exists {
        for &(e2, s, a2) in &exists {
            if r != s {
                cl.push(vec![-map.sub_var(e1, e2)]);
                k.iic += 1;
            } else {
                cl.push(vec![-map.sub_var(e1, e2), map.sub_var(a1, a2)]);
                cl.push(vec![-map.sub_var(a1, a2), map.sub_var(e1, e2)]);
                k.iie += 2;
            }
        }
    }
    for &a in &consts {
        for &(e, _, _) in &exists {
            cl.push(vec![-map.sub_var(a, e)]);
            cl.push(vec![-map.sub_var(e, a)]);
            k.iid += 2;
        }
    }

    // Transitivity.
    for c1 in 0..na {
        for c2 in 0..na {
            for c3 in 0..na {
                cl.push(vec![-map.sub_var(c1, c2), -map.sub_var(c2, c3), map.sub_var(c1, c3)]);
                k.iii += 1;
            }
        }
    }

    // Dissubsumptions C !<= X.
    for c in 0..na {
        for (x, &xa) in var_idx.iter().enumerate() {
            let mut big = vec![map.sub_var(c, xa)];
            big.extend((0..nv_idx.len()).map(|d| map.p_var(c, x, d)));
            cl.push(big);
            k.iv += 1;
            for (d, &da) in nv_idx.iter().enumerate() {
                cl.push(vec![-map.p_var(c, x, d), map.sub_var(xa, da)]);
                cl.push(vec![-map.p_var(c, x, d), -map.sub_var(c, da)]);
                k.iv += 2;
            }
        }
    }

    // The order on variables.
    for x in 0..nv {
        cl.push(vec![-map.gt_var(x, x)]);
        k.va += 1;
    }
    for x in 0..nv {
        for y in 0..nv {
            for z in 0..nv {
                cl.push(vec![-map.gt_var(x, y), -map.gt_var(y, z), map.gt_var(x, z)]);
                k.vb += 1;
            }
        }
    }
    for (x, &xa) in var_idx.iter().enumerate() {
        for &(e, _, arg) in &exists {
            if let Some(y) = u.at[arg].as_var() {
                let y = u.var_index(y).unwrap();
                cl.push(vec![-map.sub_var(xa, e), map.gt_var(x, y)]);
                k.vc += 1;
            }
        }
    }

    Ok(Encoding {
        cnf: CnfInstance {
            num_vars: map.num_vars(),
            clauses: cl,
        },
        map,
        counts: k,
    })
}

/// The assignment `S_X = {D in At_nv | [X <= D] true}` and its substitution.
pub fn decode(model: &[bool], map: &SatVarMap) -> Result<(Assignment, Substitution)> {
    let u = &map.universe;
    let mut s = Assignment::empty(&u.vars);
    for x in 0..u.vars.len() {
        for d in 0..u.at_nv.len() {
            if model[map.var_sub_nv(x, d) as usize] {
                s.insert(&u.vars[x], u.at_nv[d].clone());
            }
        }
    }
    let sigma = s
        .induced_substitution()
        .map_err(|e| Error::InternalEncoding(format!("decoded assignment: {e}")))?;
    Ok((s, sigma))
}

/// `x >_sigma y`: `sigma(x)` is subsumed by `some r1. ... some rn. sigma(y)`
/// for a nonempty role word.
fn strictly_above(cx: &Concept, cy: &Concept) -> bool {
    cx.atoms().iter().any(|a| match a {
        Atom::Exists(_, arg) => subsumes(arg, cy) || strictly_above(arg, cy),
        _ => false,
    })
}

/// The valuation induced by a ground solution `sigma` of `f`.
pub fn encode_solution_as_valuation(
    sigma: &Substitution,
    f: &FlatProblem,
    map: &SatVarMap,
) -> Result<Vec<bool>> {
    if !f.is_solved_by(sigma)? {
        return Err(Error::NotASolution);
    }
    let u = &map.universe;
    let mut images = BTreeMap::new();
    for a in &u.at {
        images.insert(a, sigma.apply(&Concept::atom(a.clone()))?);
    }
    let img = |a: &Atom| &images[a];
    let mut model = vec![false; map.num_vars() + 1];
    for (ci, c) in u.at.iter().enumerate() {
        for (di, d) in u.at.iter().enumerate() {
            model[map.sub_var(ci, di) as usize] = subsumes(img(c), img(d));
        }
    }
    for (xi, x) in u.vars.iter().enumerate() {
        let sx = img(&Atom::Var(x.clone()));
        for (yi, y) in u.vars.iter().enumerate() {
            model[map.gt_var(xi, yi) as usize] = strictly_above(sx, img(&Atom::Var(y.clone())));
        }
        for (ci, c) in u.at.iter().enumerate() {
            for (ei, e) in u.at_nv.iter().enumerate() {
                model[map.p_var(ci, xi, ei) as usize] =
                    subsumes(sx, img(e)) && !subsumes(img(c), img(e));
            }
        }
    }
    Ok(model)
}
