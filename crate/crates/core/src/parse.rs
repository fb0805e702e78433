//! Text format for problems and substitutions, and canonical rendering.
//!
//! ```text
//! # comment
//! vars X, Y;
//! X <= B;
//! A & B & C <= X;
//! some r.X <= Y;
//! top !<= Y;
//! Y !<= some r.B;
//! (X = A) or not (X <= some r.(A & B));
//! ```
//!
//! Terms are `top`, names, `some r.F` and `&`-conjunctions; statements use
//! `<=`, `!<=`, `=` and `!=`; formulas combine statements with `and`, `or`,
//! `not` and parentheses. Every name not declared in the `vars` header is a
//! constant. Names starting with `_v` are reserved for generated variables.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::problem::{BasicProblem, Formula, GeneralProblem};
use crate::term::{
    canonicalize, Atom, Concept, RawTerm, Signature, Statement, StatementKind, Substitution,
    Symbol,
};

pub const FRESH_PREFIX: &str = "_v";

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Top,
    Some,
    And,
    Or,
    Not,
    Vars,
    Amp,
    Dot,
    LParen,
    RParen,
    Semi,
    Comma,
    Le,
    NotLe,
    Eq,
    NotEq,
    Assign,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Top => "`top`".into(),
            Tok::Some => "`some`".into(),
            Tok::And => "`and`".into(),
            Tok::Or => "`or`".into(),
            Tok::Not => "`not`".into(),
            Tok::Vars => "`vars`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Le => "`<=`".into(),
            Tok::NotLe => "`!<=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::NotEq => "`!=`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, expected: &str| Error::Syntax {
        line,
        col,
        expected: expected.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned {
                tok,
                line: l0,
                col: c0,
            });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'=') => push(Tok::Le, 2, &mut i, &mut col),
            ':' if chars.get(i + 1) == Some(&'=') => push(Tok::Assign, 2, &mut i, &mut col),
            '!' if chars.get(i + 1) == Some(&'=') => push(Tok::NotEq, 2, &mut i, &mut col),
            '!' if chars.get(i + 1) == Some(&'<') && chars.get(i + 2) == Some(&'=') => {
                push(Tok::NotLe, 3, &mut i, &mut col)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += i - start;
                let tok = match word.as_str() {
                    "top" => Tok::Top,
                    "some" => Tok::Some,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "vars" => Tok::Vars,
                    _ => Tok::Ident(word),
                };
                out.push(Spanned {
                    tok,
                    line: l0,
                    col: c0,
                });
            }
            _ => return Err(err(line, col, "a token")),
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept identifiers with the reserved `_v` prefix (used when reading
    /// back problems printed by this crate).
    pub allow_reserved: bool,
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    vars: BTreeSet<Symbol>,
    roles: BTreeSet<Symbol>,
    concepts: BTreeSet<Symbol>,
    opts: ParseOptions,
    // Resolution of names inside substitution terms.
    sig: Option<&'a Signature>,
}

impl<'a> Parser<'a> {
    fn new(text: &str, opts: ParseOptions, sig: Option<&'a Signature>) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            vars: BTreeSet::new(),
            roles: BTreeSet::new(),
            concepts: BTreeSet::new(),
            opts,
            sig,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> Error {
        let s = &self.toks[self.pos];
        Error::Syntax {
            line: s.line,
            col: s.col,
            expected: format!("{expected}, found {}", s.tok.describe()),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                if !self.opts.allow_reserved && s.starts_with(FRESH_PREFIX) {
                    return Err(Error::ReservedName(s));
                }
                self.bump();
                Ok(s)
            }
            _ => Err(self.error("identifier")),
        }
    }

    fn header(&mut self) -> Result<()> {
        if *self.peek() != Tok::Vars {
            return Ok(());
        }
        self.bump();
        if *self.peek() != Tok::Semi {
            loop {
                let name = Symbol::new(&self.ident()?);
                if !self.vars.insert(name.clone()) {
                    return Err(Error::DuplicateVarDecl(name.to_string()));
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Semi)
    }

    fn name(&mut self, s: String) -> Result<RawTerm> {
        let sym = Symbol::new(&s);
        if let Some(sig) = self.sig {
            if sig.variables.contains(&sym) {
                return Err(Error::NonGroundBinding(s));
            }
            if !sig.constants.contains(&sym) {
                return Err(Error::UnknownSymbol(s));
            }
            return Ok(RawTerm::Const(sym));
        }
        self.concepts.insert(sym.clone());
        Ok(if self.vars.contains(&sym) {
            RawTerm::Var(sym)
        } else {
            RawTerm::Const(sym)
        })
    }

    fn factor(&mut self) -> Result<RawTerm> {
        match self.peek().clone() {
            Tok::Top => {
                self.bump();
                Ok(RawTerm::Top)
            }
            Tok::Ident(_) => {
                let s = self.ident()?;
                self.name(s)
            }
            Tok::Some => {
                self.bump();
                let role = self.ident()?;
                let role = Symbol::new(&role);
                if let Some(sig) = self.sig {
                    if !sig.roles.contains(&role) {
                        return Err(Error::UnknownSymbol(role.to_string()));
                    }
                }
                self.roles.insert(role.clone());
                self.expect(Tok::Dot)?;
                let arg = self.factor()?;
                Ok(RawTerm::Exists(role, Box::new(arg)))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => Err(self.error("a concept term")),
        }
    }

    fn term(&mut self) -> Result<RawTerm> {
        let mut parts = vec![self.factor()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            parts.push(self.factor()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            RawTerm::And(parts)
        })
    }

    fn statement(&mut self) -> Result<Formula> {
        let lhs = canonicalize(&self.term()?);
        let op = self.bump();
        let rhs = canonicalize(&self.term()?);
        Ok(match op {
            Tok::Le => Formula::sub(lhs, rhs),
            Tok::NotLe => Formula::dissub(lhs, rhs),
            Tok::Eq => Formula::equation(lhs, rhs),
            Tok::NotEq => Formula::disequation(lhs, rhs),
            _ => {
                self.pos -= 1;
                return Err(self.error("one of `<=`, `!<=`, `=`, `!=`"));
            }
        })
    }

    fn primary(&mut self) -> Result<Formula> {
        if *self.peek() != Tok::LParen {
            return self.statement();
        }
        // `(` opens either a parenthesized term or a parenthesized formula.
        let save = (self.pos, self.roles.clone(), self.concepts.clone());
        match self.statement() {
            Ok(f) => Ok(f),
            Err(first) => {
                let reached = self.pos;
                self.pos = save.0;
                self.roles = save.1;
                self.concepts = save.2;
                self.bump();
                match self.formula().and_then(|f| self.expect(Tok::RParen).map(|_| f)) {
                    Ok(f) => Ok(f),
                    Err(second) => Err(if self.pos >= reached { second } else { first }),
                }
            }
        }
    }

    fn unary(&mut self) -> Result<Formula> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::And(parts)
        })
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut parts = vec![self.conjunction()?];
        while *self.peek() == Tok::Or {
            self.bump();
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::Or(parts)
        })
    }

    fn signature(&self) -> Result<Signature> {
        if let Some(r) = self.roles.iter().find(|r| self.concepts.contains(*r) || self.vars.contains(*r)) {
            return Err(Error::RoleUsedAsConcept(r.to_string()));
        }
        Ok(Signature {
            constants: self.concepts.difference(&self.vars).cloned().collect(),
            variables: self.vars.clone(),
            roles: self.roles.clone(),
        })
    }
}

/// Parses a problem file into a general problem. The formula is the
/// conjunction of all `;`-terminated items.
pub fn parse_problem(text: &str) -> Result<GeneralProblem> {
    parse_problem_with(text, ParseOptions::default())
}

pub fn parse_problem_with(text: &str, opts: ParseOptions) -> Result<GeneralProblem> {
    let mut p = Parser::new(text, opts, None)?;
    p.header()?;
    let mut items = Vec::new();
    while *p.peek() != Tok::Eof {
        items.push(p.formula()?);
        p.expect(Tok::Semi)?;
    }
    let formula = if items.len() == 1 {
        items.pop().unwrap()
    } else {
        Formula::And(items)
    };
    Ok(GeneralProblem {
        signature: p.signature()?,
        formula,
    })
}

/// Parses a single term; names in `vars` are variables, all others constants.
pub fn parse_term(text: &str, vars: &BTreeSet<Symbol>) -> Result<Concept> {
    let mut p = Parser::new(
        text,
        ParseOptions {
            allow_reserved: true,
        },
        None,
    )?;
    p.vars = vars.clone();
    let t = p.term()?;
    p.expect(Tok::Eof)?;
    Ok(canonicalize(&t))
}

/// Parses `X := term;` bindings against the signature of a problem. Bound
/// terms must be ground and use only constants and roles of `sig`.
pub fn parse_substitution(text: &str, sig: &Signature) -> Result<Substitution> {
    let mut p = Parser::new(
        text,
        ParseOptions {
            allow_reserved: true,
        },
        Some(sig),
    )?;
    let mut subst = Substitution::new();
    while *p.peek() != Tok::Eof {
        let var = Symbol::new(&p.ident()?);
        if !sig.variables.contains(&var) {
            return Err(Error::UnknownVariable(var.to_string()));
        }
        if subst.get(&var).is_some() {
            return Err(Error::DuplicateVarDecl(var.to_string()));
        }
        p.expect(Tok::Assign)?;
        let term = match p.term() {
            Err(Error::NonGroundBinding(_)) => return Err(Error::NonGroundBinding(var.to_string())),
            other => canonicalize(&other?),
        };
        p.expect(Tok::Semi)?;
        subst.bind(var, term)?;
    }
    Ok(subst)
}

pub fn render_atom(a: &Atom) -> String {
    match a {
        Atom::Const(n) | Atom::Var(n) => n.to_string(),
        Atom::Exists(r, arg) => format!("some {r}.{}", render_factor(arg)),
    }
}

fn render_factor(c: &Concept) -> String {
    match c.atoms() {
        [] => "top".into(),
        [a] => render_atom(a),
        _ => format!("({})", render_term(c)),
    }
}

/// Canonical rendering: `top`, or atoms in canonical order joined by ` & `.
pub fn render_term(c: &Concept) -> String {
    if c.is_top() {
        return "top".into();
    }
    c.atoms()
        .iter()
        .map(render_atom)
        .collect::<Vec<_>>()
        .join(" & ")
}

pub fn render_statement(s: &Statement) -> String {
    let op = match s.kind {
        StatementKind::Sub => "<=",
        StatementKind::Dissub => "!<=",
    };
    format!("{} {op} {}", render_term(&s.lhs), render_term(&s.rhs))
}

/// One `X := term;` line per binding, in variable order.
pub fn render_substitution(s: &Substitution) -> String {
    s.iter()
        .map(|(x, t)| format!("{x} := {};\n", render_term(t)))
        .collect()
}

/// Renders a set of statements as a problem file with a `vars` header.
pub fn render_statements<'a, I>(vars: &BTreeSet<Symbol>, statements: I) -> String
where
    I: IntoIterator<Item = &'a Statement>,
{
    let mut out = String::new();
    if !vars.is_empty() {
        let names: Vec<&str> = vars.iter().map(Symbol::as_str).collect();
        out.push_str(&format!("vars {};\n", names.join(", ")));
    }
    for s in statements {
        out.push_str(&render_statement(s));
        out.push_str(";\n");
    }
    out
}

pub fn render_basic_problem(b: &BasicProblem) -> String {
    render_statements(b.variables(), &b.statements)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> BTreeSet<Symbol> {
        names.iter().map(|n| Symbol::new(n)).collect()
    }

    #[test]
    fn parses_subsumption() {
        let g = parse_problem("vars X; X <= B;").unwrap();
        assert_eq!(
            g.formula,
            Formula::sub(Concept::var("X"), Concept::constant("B"))
        );
        assert!(g.signature.constants.contains(&Symbol::new("B")));
    }

    #[test]
    fn dissubsumption_is_negated_leaf() {
        let g = parse_problem("vars X,Y; X !<= Y;").unwrap();
        assert_eq!(g.formula, Formula::dissub(Concept::var("X"), Concept::var("Y")));
    }

    #[test]
    fn equations_and_disequations_expand() {
        let g = parse_problem("vars X; A = X;").unwrap();
        let (a, x) = (Concept::constant("A"), Concept::var("X"));
        assert_eq!(
            g.formula,
            Formula::And(vec![
                Formula::sub(a.clone(), x.clone()),
                Formula::sub(x.clone(), a.clone())
            ])
        );
        let g = parse_problem("vars X; A != X;").unwrap();
        assert_eq!(
            g.formula,
            Formula::Or(vec![
                Formula::dissub(a.clone(), x.clone()),
                Formula::dissub(x, a)
            ])
        );
    }

    #[test]
    fn formulas_with_parentheses() {
        let g = parse_problem("vars X; (A & B) <= X or not (X <= some r.(A & B));").unwrap();
        match g.formula {
            Formula::Or(parts) => {
                assert_eq!(parts.len(), 2);
                assert!(matches!(parts[1], Formula::Not(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
        let g = parse_problem("vars X; ((X <= A) and (A <= X));").unwrap();
        assert!(matches!(g.formula, Formula::And(_)));
    }

    #[test]
    fn comments_and_multiple_items() {
        let g = parse_problem("# header\nvars X;\nX <= A; # trailing\nA <= X;\n").unwrap();
        assert!(matches!(g.formula, Formula::And(ref v) if v.len() == 2));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_problem("vars X; X <= ;"),
            Err(Error::Syntax { line: 1, col: 14, .. })
        ));
        assert_eq!(
            parse_problem("vars X, X; X <= A;"),
            Err(Error::DuplicateVarDecl("X".into()))
        );
        assert_eq!(
            parse_problem("vars X; some A.X <= A;"),
            Err(Error::RoleUsedAsConcept("A".into()))
        );
        assert_eq!(
            parse_problem("vars _v1; _v1 <= A;"),
            Err(Error::ReservedName("_v1".into()))
        );
        assert!(parse_problem_with(
            "vars _v1; _v1 <= A;",
            ParseOptions {
                allow_reserved: true
            }
        )
        .is_ok());
        assert!(matches!(
            parse_problem("X <= A; vars X;"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn substitutions() {
        let g = parse_problem("vars X, Y; X <= A & B & C; Y <= some r.A;").unwrap();
        let s = parse_substitution("X := A & B & C;\nY := some r.(A & C);", &g.signature).unwrap();
        let abc = Concept::conj(["A", "B", "C"].map(Atom::constant));
        assert_eq!(s.get(&Symbol::new("X")), Some(&abc));
        assert_eq!(
            s.get(&Symbol::new("Y")),
            Some(&Concept::exists(
                "r",
                Concept::constant("A").and(&Concept::constant("C"))
            ))
        );
        let s = parse_substitution("X := top;", &g.signature).unwrap();
        assert_eq!(s.get(&Symbol::new("X")), Some(&Concept::top()));

        assert_eq!(
            parse_substitution("X := Y;", &g.signature),
            Err(Error::NonGroundBinding("X".into()))
        );
        assert_eq!(
            parse_substitution("Z := A;", &g.signature),
            Err(Error::UnknownVariable("Z".into()))
        );
        assert_eq!(
            parse_substitution("X := D;", &g.signature),
            Err(Error::UnknownSymbol("D".into()))
        );
    }

    #[test]
    fn rendering() {
        assert_eq!(render_term(&Concept::top()), "top");
        let t = Concept::constant("A").and(&Concept::exists("r", Concept::constant("B")));
        assert_eq!(render_term(&t), "A & some r.B");
        let t = Concept::exists("r", Concept::constant("A").and(&Concept::constant("B")));
        assert_eq!(render_term(&t), "some r.(A & B)");
        let t = Concept::exists("r", Concept::exists("s", Concept::top()));
        assert_eq!(render_term(&t), "some r.some s.top");
        assert_eq!(parse_term("some r.some s.top", &vars(&[])).unwrap(), t);
    }
}
