//! Variable elimination by substitution (equalities) and Fourier–Motzkin
//! (inequalities).

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;

use super::linear::{LinConstraint, LinExpr, LinRow, Rel};
use crate::chc::Var;

/// Row count above which intermediate results are pruned with exact
/// redundancy checks.
const PRUNE_THRESHOLD: usize = 24;

/// Eliminates every variable not in `keep`. The result is equivalent to the
/// existential closure of `c` over the eliminated variables.
pub fn project(c: &LinConstraint, keep: &BTreeSet<Var>) -> LinConstraint {
    let mut rows: Vec<LinRow> = c.rows().to_vec();
    loop {
        if rows.iter().any(|r| r.constant_truth() == Some(false)) {
            return LinConstraint::falsum();
        }
        let candidates: BTreeSet<Var> = rows
            .iter()
            .flat_map(|r| r.vars().cloned())
            .filter(|v| !keep.contains(v))
            .collect();
        if candidates.is_empty() {
            break;
        }
        // Prefer a variable with an equality; otherwise the one producing the
        // fewest combined rows.
        let with_eq = candidates.iter().find(|v| {
            rows.iter()
                .any(|r| r.rel == Rel::Eq && r.expr.coeff(v).is_some())
        });
        rows = match with_eq {
            Some(v) => substitute(rows, v),
            None => {
                let v = candidates
                    .iter()
                    .min_by_key(|v| {
                        let (mut p, mut n) = (0usize, 0usize);
                        for r in &rows {
                            match r.expr.coeff(v) {
                                Some(c) if c.is_positive() => p += 1,
                                Some(_) => n += 1,
                                None => {}
                            }
                        }
                        p * n
                    })
                    .unwrap()
                    .clone();
                eliminate(rows, &v)
            }
        };
        rows = dedupe(rows);
        if rows.len() > PRUNE_THRESHOLD {
            rows = prune(rows);
        }
    }
    LinConstraint::new(dedupe(rows))
}

/// Solves an equality containing `v` for `v` and substitutes it everywhere.
fn substitute(rows: Vec<LinRow>, v: &Var) -> Vec<LinRow> {
    let pos = rows
        .iter()
        .position(|r| r.rel == Rel::Eq && r.expr.coeff(v).is_some())
        .unwrap();
    let mut rows = rows;
    let eq = rows.swap_remove(pos);
    let a = eq.expr.coeff(v).unwrap().clone();
    rows.into_iter()
        .map(|r| match r.expr.coeff(v).cloned() {
            None => r,
            Some(b) => {
                // r - (b/a) * eq
                let factor = -(b / &a);
                let mut expr = r.expr.clone();
                expr.add_scaled(&eq.expr, &factor);
                expr.remove(v);
                LinRow::new(expr, r.rel, &r.rhs + &eq.rhs * &factor)
            }
        })
        .collect()
}

/// One Fourier–Motzkin step on inequality rows (no equality mentions `v`).
fn eliminate(rows: Vec<LinRow>, v: &Var) -> Vec<LinRow> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for r in rows {
        match r.expr.coeff(v).cloned() {
            None => out.push(r),
            Some(c) if c.is_positive() => pos.push((c, r)),
            Some(c) => neg.push((-c, r)),
        }
    }
    for (cp, p) in &pos {
        for (cn, n) in &neg {
            // cn * p + cp * n cancels v.
            let mut expr = p.expr.scaled(cn);
            expr.add_scaled(&n.expr, cp);
            expr.remove(v);
            let rel = if p.rel == Rel::Lt || n.rel == Rel::Lt {
                Rel::Lt
            } else {
                Rel::Le
            };
            out.push(LinRow::new(expr, rel, &p.rhs * cn + &n.rhs * cp));
        }
    }
    out
}

/// Normalizes rows, drops trivially true ones and keeps only the tightest
/// bound per left-hand side.
pub(crate) fn dedupe(rows: Vec<LinRow>) -> Vec<LinRow> {
    let mut best: BTreeMap<LinExpr, LinRow> = BTreeMap::new();
    let mut eqs: Vec<LinRow> = Vec::new();
    let mut order: Vec<LinExpr> = Vec::new();
    for r in rows {
        if r.constant_truth() == Some(true) {
            continue;
        }
        if r.constant_truth() == Some(false) {
            return vec![LinRow::falsum()];
        }
        let n = r.normalized();
        if n.rel == Rel::Eq {
            if !eqs.contains(&n) {
                eqs.push(n);
            }
            continue;
        }
        let key = n.expr.clone();
        match best.get(&key) {
            None => {
                order.push(key.clone());
                best.insert(key, n);
            }
            Some(cur) => {
                let tighter = n.rhs < cur.rhs || (n.rhs == cur.rhs && n.rel == Rel::Lt);
                if tighter {
                    best.insert(key, n);
                }
            }
        }
    }
    let mut out = eqs;
    out.extend(order.into_iter().map(|k| best.remove(&k).unwrap()));
    out
}

/// Removes rows entailed by the remaining ones.
fn prune(rows: Vec<LinRow>) -> Vec<LinRow> {
    let mut kept = rows;
    let mut i = 0;
    while i < kept.len() {
        let row = kept[i].clone();
        let rest: Vec<LinRow> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, r)| r.clone())
            .collect();
        if super::simplex::entails_row(&LinConstraint::new(rest), &row) {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    kept
}
