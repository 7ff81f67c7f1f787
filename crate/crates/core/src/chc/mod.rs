//! Constrained Horn clauses: variables, atoms, clauses and programs.
//!
//! A clause `H :- phi, B1, ..., Bk.` is stored with its constraint `phi`
//! and body atoms separately. The distinguished head `false` is an ordinary
//! zero-ary atom whose predicate is [`Pred::falsum`]; it never occurs in a
//! body.

mod parser;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lra::LinConstraint;

pub use parser::{parse_program, ParseError};

/// A clause variable. Names are arbitrary strings; the parser only produces
/// uppercase- or underscore-initial names.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Self {
        Var(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Appends `suffix` to the variable name.
    pub fn suffixed(&self, suffix: &str) -> Var {
        Var::new(format!("{}{}", self.0, suffix))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A predicate symbol.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pred(Arc<str>);

impl Pred {
    pub const FALSE_NAME: &'static str = "false";

    pub fn new(name: impl AsRef<str>) -> Self {
        Pred(Arc::from(name.as_ref()))
    }

    /// The distinguished predicate `false`.
    pub fn falsum() -> Self {
        Pred::new(Self::FALSE_NAME)
    }

    pub fn is_false(&self) -> bool {
        &*self.0 == Self::FALSE_NAME
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A clause identifier such as `c3`.
///
/// Ordering is natural: a shared prefix is compared first, then the trailing
/// decimal index numerically, so `c2 < c10`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ClauseId(Arc<str>);

impl ClauseId {
    pub fn new(name: impl AsRef<str>) -> Self {
        ClauseId(Arc::from(name.as_ref()))
    }

    /// The identifier `c<index>`.
    pub fn numbered(index: usize) -> Self {
        ClauseId::new(format!("c{index}"))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    fn split(&self) -> (&str, Option<u64>) {
        let s: &str = &self.0;
        let digits = s.len() - s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        if digits == 0 || digits > 18 {
            return (s, None);
        }
        let (prefix, num) = s.split_at(s.len() - digits);
        (prefix, num.parse().ok())
    }
}

impl Ord for ClauseId {
    fn cmp(&self, other: &Self) -> Ordering {
        let (pa, na) = self.split();
        let (pb, nb) = other.split();
        pa.cmp(pb)
            .then_with(|| na.cmp(&nb))
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ClauseId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `p(X1, ..., Xn)` with pairwise distinct argument variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom {
    pub pred: Pred,
    pub args: Vec<Var>,
}

impl Atom {
    pub fn new(pred: Pred, args: Vec<Var>) -> Self {
        Atom { pred, args }
    }

    pub fn falsum() -> Self {
        Atom::new(Pred::falsum(), Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Applies a variable substitution; unmapped variables are kept.
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self
                .args
                .iter()
                .map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// `head :- constraint, body[0], ..., body[k-1]`.
///
/// `origin` is the identifier of the clause in the originally parsed program
/// this clause was derived from; for parsed programs it equals `id`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Clause {
    pub id: ClauseId,
    pub origin: ClauseId,
    pub head: Atom,
    pub constraint: LinConstraint,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn is_integrity(&self) -> bool {
        self.head.pred.is_false()
    }

    /// Every variable occurring anywhere in the clause.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out: BTreeSet<Var> = self.head.args.iter().cloned().collect();
        for b in &self.body {
            out.extend(b.args.iter().cloned());
        }
        out.extend(self.constraint.vars());
        out
    }

    /// Constraint variables that appear in no atom of the clause.
    pub fn local_vars(&self) -> BTreeSet<Var> {
        let mut atoms: BTreeSet<&Var> = self.head.args.iter().collect();
        for b in &self.body {
            atoms.extend(b.args.iter());
        }
        self.constraint
            .vars()
            .into_iter()
            .filter(|v| !atoms.contains(v))
            .collect()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        let rows = self.constraint.rows();
        if !rows.is_empty() || !self.body.is_empty() {
            f.write_str(" :- ")?;
            let mut first = true;
            for row in rows {
                if !first {
                    f.write_str(", ")?;
                }
                first = false;
                write!(f, "{row}")?;
            }
            for atom in &self.body {
                if !first {
                    f.write_str(", ")?;
                }
                first = false;
                write!(f, "{atom}")?;
            }
        }
        f.write_str(".")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("duplicate clause identifier {0}")]
    DuplicateId(ClauseId),
    #[error("predicate {pred} used with arities {first} and {second}")]
    ArityMismatch {
        pred: Pred,
        first: usize,
        second: usize,
    },
    #[error("`false` occurs in the body of clause {0}")]
    FalseInBody(ClauseId),
    #[error("`false` must have no arguments (clause {0})")]
    FalseWithArgs(ClauseId),
    #[error("unknown clause identifier {0}")]
    UnknownClause(ClauseId),
}

/// An ordered set of clauses with unique identifiers.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Program {
    clauses: Vec<Clause>,
    predicates: BTreeSet<Pred>,
    arities: BTreeMap<Pred, usize>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Result<Self, ProgramError> {
        let mut ids = BTreeSet::new();
        let mut arities: BTreeMap<Pred, usize> = BTreeMap::new();
        let mut check = |atom: &Atom| -> Result<(), ProgramError> {
            match arities.get(&atom.pred) {
                Some(&a) if a != atom.arity() => Err(ProgramError::ArityMismatch {
                    pred: atom.pred.clone(),
                    first: a,
                    second: atom.arity(),
                }),
                Some(_) => Ok(()),
                None => {
                    arities.insert(atom.pred.clone(), atom.arity());
                    Ok(())
                }
            }
        };
        for c in &clauses {
            if !ids.insert(c.id.clone()) {
                return Err(ProgramError::DuplicateId(c.id.clone()));
            }
            if c.head.pred.is_false() && !c.head.args.is_empty() {
                return Err(ProgramError::FalseWithArgs(c.id.clone()));
            }
            check(&c.head)?;
            for b in &c.body {
                if b.pred.is_false() {
                    return Err(ProgramError::FalseInBody(c.id.clone()));
                }
                check(b)?;
            }
        }
        let predicates = arities.keys().filter(|p| !p.is_false()).cloned().collect();
        Ok(Program {
            clauses,
            predicates,
            arities,
        })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Predicate symbols of the program, excluding `false`.
    pub fn predicates(&self) -> &BTreeSet<Pred> {
        &self.predicates
    }

    pub fn arity(&self, pred: &Pred) -> Option<usize> {
        if pred.is_false() {
            return Some(0);
        }
        self.arities.get(pred).copied()
    }

    pub fn clause_by_id(&self, id: &ClauseId) -> Result<&Clause, ProgramError> {
        self.clauses
            .iter()
            .find(|c| &c.id == id)
            .ok_or_else(|| ProgramError::UnknownClause(id.clone()))
    }

    /// The argument tuple of the first occurrence of `pred` (heads before
    /// bodies within a clause, clauses in source order). Used as the variable
    /// tuple of that predicate's entry in an interpretation.
    pub fn canonical_args(&self, pred: &Pred) -> Option<Vec<Var>> {
        if pred.is_false() {
            return Some(Vec::new());
        }
        for c in &self.clauses {
            if &c.head.pred == pred {
                return Some(c.head.args.clone());
            }
            if let Some(b) = c.body.iter().find(|b| &b.pred == pred) {
                return Some(b.args.clone());
            }
        }
        None
    }

    /// Rewrites every strict row `e < b` into `e <= b - 1` after scaling to
    /// integer coefficients. Sound only for integer-valued variables.
    pub fn strict_to_nonstrict(&self) -> Program {
        let clauses = self
            .clauses
            .iter()
            .map(|c| Clause {
                constraint: c.constraint.strict_to_nonstrict(),
                ..c.clone()
            })
            .collect();
        Program {
            clauses,
            predicates: self.predicates.clone(),
            arities: self.arities.clone(),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
