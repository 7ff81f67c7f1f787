//! Exact feasibility of conjunctions of linear rows.
//!
//! General simplex in the style of Dutertre and de Moura: every non-unit row
//! gets a slack variable `s = expr`, rows become bounds on variables, and
//! strict bounds are handled with [`DeltaRat`] values. Pivoting follows
//! Bland's rule, which makes the check terminate.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::delta::DeltaRat;
use super::linear::{LinConstraint, LinExpr, LinRow, Rel};
use super::Rat;
use crate::chc::Var;

/// A satisfying assignment over delta-rationals.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Witness {
    assignment: BTreeMap<Var, DeltaRat>,
}

impl Witness {
    pub fn get(&self, v: &Var) -> Option<&DeltaRat> {
        self.assignment.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &DeltaRat)> {
        self.assignment.iter()
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Witness {
        Witness {
            assignment: self
                .assignment
                .iter()
                .map(|(v, d)| (map.get(v).cloned().unwrap_or_else(|| v.clone()), d.clone()))
                .collect(),
        }
    }

    /// Instantiates the infinitesimal with a positive rational small enough
    /// that every row of `c` holds under the resulting rational assignment.
    /// Variables of `c` without a witness value are taken as zero.
    pub fn concretize(&self, c: &LinConstraint) -> BTreeMap<Var, Rat> {
        let value = |v: &Var| self.assignment.get(v).cloned().unwrap_or_default();
        let mut eps = Rat::one();
        for row in c.rows() {
            let mut lhs = DeltaRat::zero();
            for (v, k) in row.expr.terms() {
                lhs = &lhs + &value(v).scale(k);
            }
            if lhs.real < row.rhs && lhs.delta.is_positive() {
                let bound = (&row.rhs - &lhs.real) / (&lhs.delta * Rat::from_integer(2.into()));
                if bound < eps {
                    eps = bound;
                }
            }
        }
        let mut out: BTreeMap<Var, Rat> = self
            .assignment
            .iter()
            .map(|(v, d)| (v.clone(), d.at(&eps)))
            .collect();
        for v in c.vars() {
            out.entry(v).or_insert_with(Rat::zero);
        }
        out
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SatResult {
    Sat(Witness),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn witness(self) -> Option<Witness> {
        match self {
            SatResult::Sat(w) => Some(w),
            SatResult::Unsat => None,
        }
    }
}

/// Decides satisfiability of `c` over the rationals.
pub fn is_sat(c: &LinConstraint) -> SatResult {
    match Tableau::build(c.rows()) {
        None => SatResult::Unsat,
        Some(mut t) => {
            if t.check() {
                SatResult::Sat(t.witness())
            } else {
                SatResult::Unsat
            }
        }
    }
}

/// Shorthand for `is_sat(c).is_sat()`.
pub fn sat(c: &LinConstraint) -> bool {
    is_sat(c).is_sat()
}

/// True iff every model of `premise` satisfies every row of `conclusion`.
pub fn entails(premise: &LinConstraint, conclusion: &LinConstraint) -> bool {
    conclusion
        .rows()
        .iter()
        .all(|row| entails_row(premise, row))
}

pub fn entails_row(premise: &LinConstraint, row: &LinRow) -> bool {
    if row.constant_truth() == Some(true) {
        return true;
    }
    row.negation().into_iter().all(|neg| {
        let mut probe = premise.clone();
        probe.push(neg);
        !sat(&probe)
    })
}

/// A countermodel of `premise => conclusion`, if one exists.
pub fn entailment_countermodel(
    premise: &LinConstraint,
    conclusion: &LinConstraint,
) -> Option<Witness> {
    for row in conclusion.rows() {
        for neg in row.negation() {
            let mut probe = premise.clone();
            probe.push(neg);
            if let SatResult::Sat(w) = is_sat(&probe) {
                return Some(w);
            }
        }
    }
    None
}

struct TabRow {
    basic: usize,
    coeffs: Vec<Rat>,
}

struct Tableau {
    vars: Vec<Var>,
    lower: Vec<Option<DeltaRat>>,
    upper: Vec<Option<DeltaRat>>,
    value: Vec<DeltaRat>,
    rows: Vec<TabRow>,
}

fn tighten_lower(slot: &mut Option<DeltaRat>, b: DeltaRat) {
    if slot.as_ref().is_none_or(|cur| &b > cur) {
        *slot = Some(b);
    }
}

fn tighten_upper(slot: &mut Option<DeltaRat>, b: DeltaRat) {
    if slot.as_ref().is_none_or(|cur| &b < cur) {
        *slot = Some(b);
    }
}

impl Tableau {
    /// Returns `None` when the rows are trivially inconsistent.
    fn build(input: &[LinRow]) -> Option<Tableau> {
        let mut index: BTreeMap<Var, usize> = BTreeMap::new();
        for row in input {
            for v in row.vars() {
                let next = index.len();
                index.entry(v.clone()).or_insert(next);
            }
        }
        let n = index.len();
        let mut vars: Vec<Var> = vec![Var::new(""); n];
        for (v, &i) in &index {
            vars[i] = v.clone();
        }

        // Rows with the same expression (up to positive/negative scaling) share
        // one slack variable.
        let mut slack_of: BTreeMap<LinExpr, usize> = BTreeMap::new();
        let mut slack_exprs: Vec<LinExpr> = Vec::new();
        let mut lower: Vec<Option<DeltaRat>> = vec![None; n];
        let mut upper: Vec<Option<DeltaRat>> = vec![None; n];

        for row in input {
            if let Some(truth) = row.constant_truth() {
                if truth {
                    continue;
                }
                return None;
            }
            let lead = row.expr.terms().next().map(|(_, c)| c.clone()).unwrap();
            let unit = row.expr.scaled(&(Rat::one() / &lead));
            let bound = &row.rhs / &lead;
            let target = if unit.len() == 1 {
                index[unit.vars().next().unwrap()]
            } else {
                match slack_of.get(&unit) {
                    Some(&s) => s,
                    None => {
                        let s = n + slack_exprs.len();
                        slack_of.insert(unit.clone(), s);
                        slack_exprs.push(unit);
                        lower.push(None);
                        upper.push(None);
                        s
                    }
                }
            };
            let flip = lead.is_negative();
            match (row.rel, flip) {
                (Rel::Eq, _) => {
                    tighten_lower(&mut lower[target], DeltaRat::real(bound.clone()));
                    tighten_upper(&mut upper[target], DeltaRat::real(bound));
                }
                (Rel::Le, false) => tighten_upper(&mut upper[target], DeltaRat::real(bound)),
                (Rel::Le, true) => tighten_lower(&mut lower[target], DeltaRat::real(bound)),
                (Rel::Lt, false) => {
                    tighten_upper(&mut upper[target], DeltaRat::new(bound, -Rat::one()))
                }
                (Rel::Lt, true) => {
                    tighten_lower(&mut lower[target], DeltaRat::new(bound, Rat::one()))
                }
            }
        }

        let total = n + slack_exprs.len();
        for i in 0..total {
            if let (Some(l), Some(u)) = (&lower[i], &upper[i]) {
                if l > u {
                    return None;
                }
            }
        }

        let mut value = vec![DeltaRat::zero(); total];
        for i in 0..n {
            let zero = DeltaRat::zero();
            value[i] = match (&lower[i], &upper[i]) {
                (Some(l), _) if l > &zero => l.clone(),
                (_, Some(u)) if u < &zero => u.clone(),
                _ => zero,
            };
        }
        let mut rows = Vec::with_capacity(slack_exprs.len());
        for (k, e) in slack_exprs.iter().enumerate() {
            let mut coeffs = vec![Rat::zero(); total];
            let mut val = DeltaRat::zero();
            for (v, c) in e.terms() {
                let j = index[v];
                coeffs[j] = c.clone();
                val = &val + &value[j].scale(c);
            }
            value[n + k] = val;
            rows.push(TabRow {
                basic: n + k,
                coeffs,
            });
        }
        Some(Tableau {
            vars,
            lower,
            upper,
            value,
            rows,
        })
    }

    fn below_lower(&self, i: usize) -> bool {
        self.lower[i].as_ref().is_some_and(|l| &self.value[i] < l)
    }

    fn above_upper(&self, i: usize) -> bool {
        self.upper[i].as_ref().is_some_and(|u| &self.value[i] > u)
    }

    fn can_increase(&self, j: usize) -> bool {
        self.upper[j].as_ref().is_none_or(|u| &self.value[j] < u)
    }

    fn can_decrease(&self, j: usize) -> bool {
        self.lower[j].as_ref().is_none_or(|l| &self.value[j] > l)
    }

    fn check(&mut self) -> bool {
        loop {
            let violated = self
                .rows
                .iter()
                .enumerate()
                .filter(|(_, r)| self.below_lower(r.basic) || self.above_upper(r.basic))
                .min_by_key(|(_, r)| r.basic)
                .map(|(k, r)| (k, r.basic));
            let Some((r, b)) = violated else {
                return true;
            };
            let increase = self.below_lower(b);
            let coeffs = &self.rows[r].coeffs;
            let entering = (0..coeffs.len()).find(|&j| {
                let a = &coeffs[j];
                if a.is_zero() || j == b {
                    return false;
                }
                if increase == a.is_positive() {
                    self.can_increase(j)
                } else {
                    self.can_decrease(j)
                }
            });
            let Some(j) = entering else {
                return false;
            };
            let target = if increase {
                self.lower[b].clone().unwrap()
            } else {
                self.upper[b].clone().unwrap()
            };
            self.pivot_and_update(r, j, target);
        }
    }

    fn pivot_and_update(&mut self, r: usize, j: usize, target: DeltaRat) {
        let b = self.rows[r].basic;
        let a = self.rows[r].coeffs[j].clone();
        let theta = (&target - &self.value[b]).scale(&(Rat::one() / &a));
        self.value[b] = target;
        self.value[j] = &self.value[j] + &theta;
        for (k, row) in self.rows.iter().enumerate() {
            if k != r && !row.coeffs[j].is_zero() {
                let delta = theta.scale(&row.coeffs[j]);
                self.value[row.basic] = &self.value[row.basic] + &delta;
            }
        }
        self.pivot(r, j);
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let b = self.rows[r].basic;
        let a = self.rows[r].coeffs[j].clone();
        let inv = Rat::one() / &a;
        let mut new_coeffs: Vec<Rat> = self.rows[r].coeffs.iter().map(|c| -(c * &inv)).collect();
        new_coeffs[j] = Rat::zero();
        new_coeffs[b] = inv;
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let c = std::mem::take(&mut row.coeffs[j]);
            if c.is_zero() {
                continue;
            }
            for (dst, src) in row.coeffs.iter_mut().zip(&new_coeffs) {
                if !src.is_zero() {
                    *dst += &c * src;
                }
            }
        }
        self.rows[r] = TabRow {
            basic: j,
            coeffs: new_coeffs,
        };
    }

    fn witness(&self) -> Witness {
        Witness {
            assignment: self
                .vars
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), self.value[i].clone()))
                .collect(),
        }
    }
}
