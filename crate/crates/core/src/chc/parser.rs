//! Prolog-style concrete syntax for CHC programs.
//!
//! ```text
//! clause   := head (":-" item ("," item)*)? "."
//! head     := atom | "false"
//! item     := atom | "true" | expr relop expr
//! atom     := lowerident ("(" expr ("," expr)* ")")?
//! relop    := "=" | "=<" | "<=" | "<" | ">=" | ">"
//! expr     := linear terms over variables, integers and n/m literals
//! ```
//!
//! `%` starts a comment running to the end of the line. Clauses get the
//! identifiers `c1, c2, ...` in source order.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{Atom, Clause, ClauseId, Pred, Program, ProgramError, Var};
use crate::lra::{rat, LinConstraint, LinExpr, LinRow, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("`false` in a body position at {line}:{col}")]
    FalseInBody { line: usize, col: usize },
    #[error(transparent)]
    Program(#[from] ProgramError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Lower(String),
    Upper(String),
    Int(BigInt),
    Neck,
    Dot,
    Comma,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| ParseError::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            let tok = if c.is_ascii_lowercase() {
                Tok::Lower(word)
            } else {
                Tok::Upper(word)
            };
            (tok, j - start)
        } else if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[start..j].iter().collect();
            (Tok::Int(digits.parse().unwrap()), j - start)
        } else {
            match (c, next) {
                (':', Some('-')) => (Tok::Neck, 2),
                ('=', Some('<')) => (Tok::Le, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('=', _) => (Tok::Eq, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('.', _) => (Tok::Dot, 1),
                (',', _) => (Tok::Comma, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('/', _) => (Tok::Slash, 1),
                _ => return Err(err(line, col, format!("unexpected character {c:?}"))),
            }
        };
        out.push(Token {
            tok,
            line: tline,
            col: tcol,
        });
        advance(len, &mut i, &mut col);
    }
    Ok(out)
}

/// A parsed linear term: `lin + constant`.
#[derive(Clone, Debug, Default)]
struct Term {
    lin: LinExpr,
    constant: Rat,
}

impl Term {
    fn constant(c: Rat) -> Self {
        Term {
            lin: LinExpr::zero(),
            constant: c,
        }
    }

    fn var(v: Var) -> Self {
        Term {
            lin: LinExpr::var(v),
            constant: Rat::zero(),
        }
    }

    fn add(mut self, other: &Term, sign: &Rat) -> Term {
        self.lin.add_scaled(&other.lin, sign);
        self.constant += &other.constant * sign;
        self
    }

    fn scale(&self, k: &Rat) -> Term {
        Term {
            lin: self.lin.scaled(k),
            constant: &self.constant * k,
        }
    }

    fn as_var(&self) -> Option<&Var> {
        if self.constant.is_zero() && self.lin.len() == 1 {
            let (v, c) = self.lin.terms().next().unwrap();
            if c.is_one() {
                return Some(v);
            }
        }
        None
    }
}

enum Item {
    Atom(String, Vec<Term>),
    Row(LinRow),
    True,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.eof)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn clause(&mut self) -> Result<(Atom, Vec<Term>, Vec<Item>), ParseError> {
        let (line, col) = self.here();
        let (name, args) = match self.bump() {
            Some(Tok::Lower(name)) => {
                let args = self.atom_args()?;
                (name, args)
            }
            _ => {
                self.pos -= 1;
                return self.error("expected a clause head");
            }
        };
        if name == Pred::FALSE_NAME && !args.is_empty() {
            return Err(ParseError::Syntax {
                line,
                col,
                msg: "`false` takes no arguments".into(),
            });
        }
        let head = Atom::new(Pred::new(&name), Vec::new());
        let mut items = Vec::new();
        if self.peek() == Some(&Tok::Neck) {
            self.pos += 1;
            loop {
                items.push(self.item()?);
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    _ => break,
                }
            }
        }
        self.expect(Tok::Dot, "`.` or `,`")?;
        Ok((head, args, items))
    }

    fn atom_args(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                args.push(self.expr()?);
                match self.bump() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RParen) => break,
                    _ => {
                        self.pos -= 1;
                        return self.error("expected `,` or `)` in argument list");
                    }
                }
            }
        }
        Ok(args)
    }

    fn item(&mut self) -> Result<Item, ParseError> {
        let (line, col) = self.here();
        if let Some(Tok::Lower(name)) = self.peek().cloned() {
            self.pos += 1;
            if name == "true" && self.peek() != Some(&Tok::LParen) {
                return Ok(Item::True);
            }
            if name == Pred::FALSE_NAME {
                return Err(ParseError::FalseInBody { line, col });
            }
            let args = self.atom_args()?;
            return Ok(Item::Atom(name, args));
        }
        let lhs = self.expr()?;
        let rel = match self.bump() {
            Some(t @ (Tok::Eq | Tok::Le | Tok::Lt | Tok::Ge | Tok::Gt)) => t,
            _ => {
                self.pos -= 1;
                return self.error("expected a relation (=, =<, <, >=, >)");
            }
        };
        let rhs = self.expr()?;
        // lhs - rhs rel 0
        let diff = lhs.add(&rhs, &rat(-1));
        let k = -diff.constant;
        let row = match rel {
            Tok::Eq => LinRow::eq(diff.lin, k),
            Tok::Le => LinRow::le(diff.lin, k),
            Tok::Lt => LinRow::lt(diff.lin, k),
            Tok::Ge => LinRow::ge(diff.lin, k),
            Tok::Gt => LinRow::gt(diff.lin, k),
            _ => unreachable!(),
        };
        Ok(Item::Row(row))
    }

    fn expr(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.product()?;
        loop {
            let sign = match self.peek() {
                Some(Tok::Plus) => rat(1),
                Some(Tok::Minus) => rat(-1),
                _ => return Ok(acc),
            };
            self.pos += 1;
            let t = self.product()?;
            acc = acc.add(&t, &sign);
        }
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let f = self.factor()?;
            acc = if acc.lin.is_zero() {
                f.scale(&acc.constant)
            } else if f.lin.is_zero() {
                acc.scale(&f.constant)
            } else {
                return self.error("non-linear product");
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Term, ParseError> {
        match self.bump() {
            Some(Tok::Minus) => Ok(self.factor()?.scale(&rat(-1))),
            Some(Tok::Int(n)) => {
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    match self.bump() {
                        Some(Tok::Int(d)) if !d.is_zero() => Ok(Term::constant(Rat::new(n, d))),
                        _ => {
                            self.pos -= 1;
                            self.error("expected a nonzero integer denominator")
                        }
                    }
                } else {
                    Ok(Term::constant(Rat::from_integer(n)))
                }
            }
            Some(Tok::Upper(v)) => Ok(Term::var(Var::new(v))),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => {
                self.pos -= 1;
                self.error("expected a variable, number or `(`")
            }
        }
    }
}

struct FreshVars {
    used: BTreeSet<String>,
    next: usize,
}

impl FreshVars {
    fn fresh(&mut self) -> Var {
        loop {
            self.next += 1;
            let name = format!("_F{}", self.next);
            if self.used.insert(name.clone()) {
                return Var::new(name);
            }
        }
    }
}

/// Turns argument terms into distinct variables, adding equalities for
/// non-variable or repeated arguments.
fn atom_from_terms(
    pred: Pred,
    args: Vec<Term>,
    fresh: &mut FreshVars,
    rows: &mut Vec<LinRow>,
) -> Atom {
    let mut seen = BTreeSet::new();
    let mut vars = Vec::with_capacity(args.len());
    for t in args {
        match t.as_var() {
            Some(v) if seen.insert(v.clone()) => vars.push(v.clone()),
            _ => {
                let f = fresh.fresh();
                // f - lin = constant
                let mut lin = t.lin.scaled(&rat(-1));
                lin.add_term(f.clone(), rat(1));
                rows.push(LinRow::eq(lin, t.constant.clone()));
                seen.insert(f.clone());
                vars.push(f);
            }
        }
    }
    Atom::new(pred, vars)
}

fn term_vars(t: &Term, out: &mut BTreeSet<String>) {
    out.extend(t.lin.vars().map(|v| v.name().to_string()));
}

/// Parses a whole program.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let toks = lex(text)?;
    let eof = toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1));
    let mut p = Parser { toks, pos: 0, eof };
    let mut clauses = Vec::new();
    while p.peek().is_some() {
        let (head, head_args, items) = p.clause()?;
        let mut used = BTreeSet::new();
        for t in &head_args {
            term_vars(t, &mut used);
        }
        for it in &items {
            match it {
                Item::Atom(_, args) => args.iter().for_each(|t| term_vars(t, &mut used)),
                Item::Row(r) => used.extend(r.vars().map(|v| v.name().to_string())),
                Item::True => {}
            }
        }
        let mut fresh = FreshVars { used, next: 0 };
        let mut rows = Vec::new();
        let mut extra = Vec::new();
        let head = atom_from_terms(head.pred, head_args, &mut fresh, &mut extra);
        let mut body = Vec::new();
        for it in items {
            match it {
                Item::Atom(name, args) => body.push(atom_from_terms(
                    Pred::new(name),
                    args,
                    &mut fresh,
                    &mut extra,
                )),
                Item::Row(r) => rows.push(r),
                Item::True => {}
            }
        }
        rows.extend(extra);
        let id = ClauseId::numbered(clauses.len() + 1);
        clauses.push(Clause {
            id: id.clone(),
            origin: id,
            head,
            constraint: LinConstraint::new(rows),
            body,
        });
    }
    Ok(Program::new(clauses)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIB: &str = "\
fib(A, B) :- A>=0, A=<1, B=1.
fib(A, B) :- A>1, A2=A-2,
           A1=A-1, B=B1+B2, fib(A1,B1), fib(A2,B2).
false :- A>5, B<A, fib(A,B).
";

    #[test]
    fn parses_fib() {
        let p = parse_program(FIB).unwrap();
        assert_eq!(p.len(), 3);
        let c2 = p.clause_by_id(&ClauseId::new("c2")).unwrap();
        assert_eq!(c2.body.len(), 2);
        let c3 = p.clause_by_id(&ClauseId::new("c3")).unwrap();
        assert!(c3.is_integrity());
        assert_eq!(c3.to_string(), "false :- A>5, B<A, fib(A,B).");
        assert!(p.clause_by_id(&ClauseId::new("c9")).is_err());
    }

    #[test]
    fn empty_input_is_empty_program() {
        assert!(parse_program("").unwrap().is_empty());
        assert!(parse_program("  % only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn repeated_argument_is_split() {
        let p = parse_program("p(A,A).").unwrap();
        let c = &p.clauses()[0];
        assert_eq!(c.head.args.len(), 2);
        assert_ne!(c.head.args[0], c.head.args[1]);
        assert_eq!(c.constraint.len(), 1);
        assert_eq!(c.to_string(), "p(A,_F1) :- _F1=A.");
    }

    #[test]
    fn constant_arguments_become_equalities() {
        let p = parse_program("p(0, X+1) :- q(X).").unwrap();
        let c = &p.clauses()[0];
        assert_eq!(c.head.args.len(), 2);
        assert_eq!(c.constraint.len(), 2);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_program("p(X) :- X >.") {
            Err(ParseError::Syntax {
                line: 1, col: 12, ..
            }) => {}
            other => panic!("{other:?}"),
        }
        match parse_program("p(X).\nq(X) :- false.") {
            Err(ParseError::FalseInBody { line: 2, col: 9 }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_program("p(X). q :- p(X,Y)."),
            Err(ParseError::Program(ProgramError::ArityMismatch { .. }))
        ));
        assert!(matches!(
            parse_program("p(X) :- X*X = 1."),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn rationals_and_negative_literals() {
        let p = parse_program("p(X) :- X >= -1/2, 2*X =< 3.").unwrap();
        let printed = p.to_string();
        let again = parse_program(&printed).unwrap();
        assert_eq!(again.to_string(), printed);
    }
}
