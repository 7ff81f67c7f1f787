use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Rat;
use crate::chc::Var;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Relation of a row `expr rel rhs`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Rel {
    Le,
    Lt,
    Eq,
}

impl Rel {
    pub fn is_strict(self) -> bool {
        self == Rel::Lt
    }
}

/// A linear combination of variables with nonzero rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct LinExpr {
    coeffs: BTreeMap<Var, Rat>,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn var(v: Var) -> Self {
        let mut e = LinExpr::zero();
        e.add_term(v, rat(1));
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Var, Rat)>) -> Self {
        let mut e = LinExpr::zero();
        for (v, c) in terms {
            e.add_term(v, c);
        }
        e
    }

    pub fn add_term(&mut self, v: Var, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(v);
        match entry {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    /// `self += factor * other`
    pub fn add_scaled(&mut self, other: &LinExpr, factor: &Rat) {
        if factor.is_zero() {
            return;
        }
        for (v, c) in &other.coeffs {
            self.add_term(v.clone(), c * factor);
        }
    }

    pub fn scaled(&self, factor: &Rat) -> LinExpr {
        let mut e = LinExpr::zero();
        e.add_scaled(self, factor);
        e
    }

    pub fn coeff(&self, v: &Var) -> Option<&Rat> {
        self.coeffs.get(v)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Var, &Rat)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn remove(&mut self, v: &Var) -> Option<Rat> {
        self.coeffs.remove(v)
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> LinExpr {
        LinExpr::from_terms(
            self.coeffs
                .iter()
                .map(|(v, c)| (map.get(v).cloned().unwrap_or_else(|| v.clone()), c.clone())),
        )
    }

    pub fn eval(&self, value: impl Fn(&Var) -> Rat) -> Rat {
        self.coeffs
            .iter()
            .fold(Rat::zero(), |acc, (v, c)| acc + c * value(v))
    }
}

/// One linear row `expr rel rhs`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LinRow {
    pub expr: LinExpr,
    pub rel: Rel,
    pub rhs: Rat,
}

impl LinRow {
    pub fn new(expr: LinExpr, rel: Rel, rhs: Rat) -> Self {
        LinRow { expr, rel, rhs }
    }

    pub fn le(expr: LinExpr, rhs: Rat) -> Self {
        LinRow::new(expr, Rel::Le, rhs)
    }

    pub fn lt(expr: LinExpr, rhs: Rat) -> Self {
        LinRow::new(expr, Rel::Lt, rhs)
    }

    pub fn eq(expr: LinExpr, rhs: Rat) -> Self {
        LinRow::new(expr, Rel::Eq, rhs)
    }

    /// `expr >= rhs`, stored as `-expr <= -rhs`.
    pub fn ge(expr: LinExpr, rhs: Rat) -> Self {
        LinRow::le(expr.scaled(&rat(-1)), -rhs)
    }

    /// `expr > rhs`, stored as `-expr < -rhs`.
    pub fn gt(expr: LinExpr, rhs: Rat) -> Self {
        LinRow::lt(expr.scaled(&rat(-1)), -rhs)
    }

    /// The unsatisfiable row `0 <= -1`.
    pub fn falsum() -> Self {
        LinRow::le(LinExpr::zero(), rat(-1))
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.expr.vars()
    }

    /// For a row without variables, whether it holds.
    pub fn constant_truth(&self) -> Option<bool> {
        if !self.expr.is_zero() {
            return None;
        }
        let zero = Rat::zero();
        Some(match self.rel {
            Rel::Le => zero <= self.rhs,
            Rel::Lt => zero < self.rhs,
            Rel::Eq => zero == self.rhs,
        })
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> LinRow {
        LinRow::new(self.expr.rename(map), self.rel, self.rhs.clone())
    }

    /// Rows whose disjunction is the complement of this row.
    pub fn negation(&self) -> Vec<LinRow> {
        let neg = self.expr.scaled(&rat(-1));
        match self.rel {
            Rel::Le => vec![LinRow::lt(neg, -self.rhs.clone())],
            Rel::Lt => vec![LinRow::le(neg, -self.rhs.clone())],
            Rel::Eq => vec![
                LinRow::lt(self.expr.clone(), self.rhs.clone()),
                LinRow::lt(neg, -self.rhs.clone()),
            ],
        }
    }

    /// Equalities become two non-strict inequalities; inequalities are kept.
    pub fn split(&self) -> Vec<LinRow> {
        match self.rel {
            Rel::Eq => vec![
                LinRow::le(self.expr.clone(), self.rhs.clone()),
                LinRow::le(self.expr.scaled(&rat(-1)), -self.rhs.clone()),
            ],
            _ => vec![self.clone()],
        }
    }

    /// The same half-space (or hyperplane) scaled to coprime integer
    /// coefficients. Equalities are oriented so the first coefficient is
    /// positive.
    pub fn normalized(&self) -> LinRow {
        if self.expr.is_zero() {
            return match self.constant_truth() {
                Some(true) => LinRow::le(LinExpr::zero(), Rat::zero()),
                _ => LinRow::falsum(),
            };
        }
        let mut denom_lcm = BigInt::one();
        for (_, c) in self.expr.terms() {
            denom_lcm = denom_lcm.lcm(c.denom());
        }
        let mut num_gcd = BigInt::zero();
        for (_, c) in self.expr.terms() {
            let n = (c * Rat::from_integer(denom_lcm.clone())).to_integer();
            num_gcd = num_gcd.gcd(&n);
        }
        let mut factor = Rat::new(denom_lcm, num_gcd);
        if self.rel == Rel::Eq {
            let first = self.expr.terms().next().map(|(_, c)| c.is_negative());
            if first == Some(true) {
                factor = -factor;
            }
        }
        LinRow::new(self.expr.scaled(&factor), self.rel, &self.rhs * &factor)
    }

    pub fn holds(&self, value: impl Fn(&Var) -> Rat) -> bool {
        let lhs = self.expr.eval(value);
        match self.rel {
            Rel::Le => lhs <= self.rhs,
            Rel::Lt => lhs < self.rhs,
            Rel::Eq => lhs == self.rhs,
        }
    }
}

fn write_rat(f: &mut fmt::Formatter<'_>, q: &Rat) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

/// Writes `sum |c| * v` over the given terms, all with positive sign.
fn write_sum(f: &mut fmt::Formatter<'_>, terms: &[(&Var, Rat)]) -> fmt::Result {
    for (i, (v, c)) in terms.iter().enumerate() {
        if i > 0 {
            f.write_str("+")?;
        }
        if !c.is_one() {
            write_rat(f, c)?;
            f.write_str("*")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

fn write_constant_tail(f: &mut fmt::Formatter<'_>, c: &Rat) -> fmt::Result {
    if c.is_positive() {
        f.write_str("+")?;
        write_rat(f, c)
    } else if c.is_negative() {
        f.write_str("-")?;
        write_rat(f, &-c)
    } else {
        Ok(())
    }
}

impl fmt::Display for LinRow {
    /// Positive terms go left, negative terms right, in the surface syntax of
    /// the clause parser (`=<`, `<`, `=`, `>=`, `>`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pos: Vec<(&Var, Rat)> = self
            .expr
            .terms()
            .filter(|(_, c)| c.is_positive())
            .map(|(v, c)| (v, c.clone()))
            .collect();
        let neg: Vec<(&Var, Rat)> = self
            .expr
            .terms()
            .filter(|(_, c)| c.is_negative())
            .map(|(v, c)| (v, -c))
            .collect();
        let (op, flipped) = match self.rel {
            Rel::Le => ("=<", ">="),
            Rel::Lt => ("<", ">"),
            Rel::Eq => ("=", "="),
        };
        if pos.is_empty() && neg.is_empty() {
            f.write_str("0")?;
            f.write_str(op)?;
            return write_rat(f, &self.rhs);
        }
        if pos.is_empty() {
            // -N rel rhs  <=>  N flipped -rhs
            write_sum(f, &neg)?;
            f.write_str(flipped)?;
            return write_rat(f, &-self.rhs.clone());
        }
        write_sum(f, &pos)?;
        f.write_str(op)?;
        if neg.is_empty() {
            write_rat(f, &self.rhs)
        } else {
            write_sum(f, &neg)?;
            write_constant_tail(f, &self.rhs)
        }
    }
}

/// A conjunction of linear rows.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct LinConstraint {
    rows: Vec<LinRow>,
}

impl LinConstraint {
    pub fn new(rows: Vec<LinRow>) -> Self {
        LinConstraint { rows }
    }

    /// The empty conjunction.
    pub fn top() -> Self {
        LinConstraint::default()
    }

    pub fn falsum() -> Self {
        LinConstraint::new(vec![LinRow::falsum()])
    }

    pub fn rows(&self) -> &[LinRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<LinRow> {
        self.rows
    }

    pub fn push(&mut self, row: LinRow) {
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn and(&self, other: &LinConstraint) -> LinConstraint {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        LinConstraint { rows }
    }

    pub fn conjoin<'a>(parts: impl IntoIterator<Item = &'a LinConstraint>) -> LinConstraint {
        LinConstraint {
            rows: parts
                .into_iter()
                .flat_map(|c| c.rows.iter().cloned())
                .collect(),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.rows.iter().flat_map(|r| r.vars().cloned()).collect()
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> LinConstraint {
        LinConstraint {
            rows: self.rows.iter().map(|r| r.rename(map)).collect(),
        }
    }

    pub fn holds(&self, value: impl Fn(&Var) -> Rat + Copy) -> bool {
        self.rows.iter().all(|r| r.holds(value))
    }

    /// Integer tightening `e < b  ~>  e <= b - 1` on integer-scaled rows.
    pub fn strict_to_nonstrict(&self) -> LinConstraint {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                if r.rel != Rel::Lt {
                    return r.clone();
                }
                let mut scale = BigInt::one();
                for (_, c) in r.expr.terms() {
                    scale = scale.lcm(c.denom());
                }
                scale = scale.lcm(r.rhs.denom());
                let s = Rat::from_integer(scale);
                LinRow::le(r.expr.scaled(&s), &r.rhs * &s - rat(1))
            })
            .collect();
        LinConstraint { rows }
    }
}

impl From<Vec<LinRow>> for LinConstraint {
    fn from(rows: Vec<LinRow>) -> Self {
        LinConstraint::new(rows)
    }
}

impl fmt::Display for LinConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows.is_empty() {
            return f.write_str("true");
        }
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}
