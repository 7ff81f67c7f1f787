//! Tree interpolants of infeasible AND-trees and the automata built from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::chc::{Atom, Pred, Program, Var};
use crate::derivations::{feasible, AndTree, Feasibility};
use crate::exec;
use crate::fta::{enumerate, FtaError, State, Transition, TreeAutomaton};
use crate::lra::{entails, interpolate, sat, LinConstraint, Polyhedron};
use crate::model::InterpretationModel;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeInterpolationError {
    #[error("the AND-tree is satisfiable")]
    Feasible,
    #[error("the interpolant has {found} labels but the tree has {expected} nodes")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("the labels do not form a tree interpolant")]
    Invalid,
}

/// One formula per AND-tree node, over that node's atom arguments.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TreeInterpolant {
    atoms: Vec<Atom>,
    labels: Vec<LinConstraint>,
}

impl TreeInterpolant {
    /// Labels given explicitly, one per node in preorder.
    pub fn from_labels(
        tree: &AndTree,
        labels: Vec<LinConstraint>,
    ) -> Result<Self, TreeInterpolationError> {
        if labels.len() != tree.len() {
            return Err(TreeInterpolationError::ShapeMismatch {
                expected: tree.len(),
                found: labels.len(),
            });
        }
        Ok(TreeInterpolant {
            atoms: tree.nodes().iter().map(|n| n.atom.clone()).collect(),
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The label of node `i` (1-based).
    pub fn label(&self, i: usize) -> &LinConstraint {
        &self.labels[i - 1]
    }

    pub fn labels(&self) -> &[LinConstraint] {
        &self.labels
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }
}

/// Computes a tree interpolant one node at a time in reverse preorder. Each
/// node's label separates its own constraint and its children's labels from
/// the rest of the tree, where subtrees already labelled are represented by
/// their labels. The root is labelled `false`.
pub fn tree_interpolant(tree: &AndTree) -> Result<TreeInterpolant, TreeInterpolationError> {
    if sat(&tree.formula()) {
        return Err(TreeInterpolationError::Feasible);
    }
    let n = tree.len();
    let mut labels: Vec<Option<LinConstraint>> = vec![None; n];
    if n > 0 {
        labels[0] = Some(LinConstraint::falsum());
    }
    for i in (2..=n).rev() {
        let node = &tree.nodes()[i - 1];
        let mut own = node.constraint.clone();
        for &c in &node.children {
            own = own.and(labels[c - 1].as_ref().expect("children are labelled first"));
        }
        let end = *tree.subtree(i).expect("valid node").end();
        let mut rest = LinConstraint::conjoin(tree.nodes()[..i - 1].iter().map(|m| &m.constraint));
        for m in &tree.nodes()[end..] {
            if m.parent.is_some_and(|p| p < i) {
                rest = rest.and(
                    labels[m.index - 1]
                        .as_ref()
                        .expect("later nodes are labelled"),
                );
            }
        }
        let label = interpolate(&own, &rest).map_err(|_| TreeInterpolationError::Feasible)?;
        labels[i - 1] = Some(label);
    }
    TreeInterpolant::from_labels(tree, labels.into_iter().map(Option::unwrap).collect())
}

/// Whether the root label is unsatisfiable, every node's constraint together
/// with its children's labels entails its label, and every label mentions
/// only its node's atom arguments.
pub fn check_tree_interpolant(
    tree: &AndTree,
    ti: &TreeInterpolant,
) -> Result<bool, TreeInterpolationError> {
    if ti.len() != tree.len() {
        return Err(TreeInterpolationError::ShapeMismatch {
            expected: tree.len(),
            found: ti.len(),
        });
    }
    if tree.is_empty() {
        return Ok(true);
    }
    if sat(ti.label(1)) {
        return Ok(false);
    }
    let ok = exec::all(tree.nodes(), |node| {
        let label = ti.label(node.index);
        let args: BTreeSet<&Var> = node.atom.args.iter().collect();
        if !label.vars().iter().all(|v| args.contains(v)) {
            return false;
        }
        let mut premise = node.constraint.clone();
        for &c in &node.children {
            premise = premise.and(ti.label(c));
        }
        entails(&premise, label)
    });
    Ok(ok)
}

/// `(atom label, node index) -> formula`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InterpolantMapping {
    entries: Vec<(Atom, usize, LinConstraint)>,
}

impl InterpolantMapping {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<(&Atom, &LinConstraint)> {
        self.entries
            .iter()
            .find(|(_, j, _)| *j == i)
            .map(|(a, _, f)| (a, f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, usize, &LinConstraint)> {
        self.entries.iter().map(|(a, i, f)| (a, *i, f))
    }
}

impl fmt::Display for InterpolantMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (atom, i, formula) in &self.entries {
            let args: Vec<&str> = atom.args.iter().map(Var::name).collect();
            writeln!(f, "{}^{}({}) -> {}", atom.pred, i, args.join(","), formula)?;
        }
        Ok(())
    }
}

pub fn interpolant_mapping(ti: &TreeInterpolant) -> InterpolantMapping {
    InterpolantMapping {
        entries: ti
            .atoms
            .iter()
            .zip(&ti.labels)
            .enumerate()
            .map(|(k, (a, l))| (a.clone(), k + 1, l.clone()))
            .collect(),
    }
}

/// Canonical argument tuple `X1,...,Xn` used by [`conjunctive_mapping`].
pub fn canonical_tuple(arity: usize) -> Vec<Var> {
    (1..=arity).map(|k| Var::new(format!("X{k}"))).collect()
}

/// Renames `formula` from `from` to `to`; other variables get `tag` prefixes
/// so that they stay apart from everything else.
fn transport(formula: &LinConstraint, from: &[Var], to: &[Var], tag: &str) -> LinConstraint {
    let mut map: BTreeMap<Var, Var> = from.iter().cloned().zip(to.iter().cloned()).collect();
    for v in formula.vars() {
        map.entry(v.clone())
            .or_insert_with(|| Var::new(format!("#{tag}:{v}")));
    }
    formula.rename(&map)
}

/// Per predicate, the conjunction of the labels of all its nodes, over the
/// tuple `X1,...,Xn`. The `false` node is left out.
pub fn conjunctive_mapping(ti: &TreeInterpolant) -> InterpretationModel {
    let mut grouped: BTreeMap<&Pred, LinConstraint> = BTreeMap::new();
    for (k, (atom, label)) in ti.atoms.iter().zip(&ti.labels).enumerate() {
        if atom.pred.is_false() {
            continue;
        }
        let tuple = canonical_tuple(atom.arity());
        let moved = transport(label, &atom.args, &tuple, &format!("n{}", k + 1));
        let slot = grouped.entry(&atom.pred).or_insert_with(LinConstraint::top);
        *slot = slot.and(&moved);
    }
    let mut m = InterpretationModel::new();
    for (pred, c) in grouped {
        let args = canonical_tuple(
            ti.atoms
                .iter()
                .find(|a| &a.pred == pred)
                .map(Atom::arity)
                .unwrap_or(0),
        );
        m.insert(pred.clone(), args, Polyhedron::from_constraint(&c));
    }
    m
}

/// Whether every clause's body, with each atom replaced by its entry in `m`,
/// entails the head's entry (`false` for integrity constraints).
pub fn is_model(p: &Program, m: &InterpretationModel) -> bool {
    exec::all(p.clauses(), |c| {
        let mut body = c.constraint.clone();
        for (i, b) in c.body.iter().enumerate() {
            body = body.and(&m.gamma(b, &format!("b{i}")));
        }
        let head = if c.is_integrity() {
            LinConstraint::falsum()
        } else {
            m.gamma(&c.head, "h")
        };
        entails(&body, &head)
    })
}

fn state_of(atom: &Atom, index: usize) -> State {
    if atom.pred.is_false() {
        State::new("error")
    } else {
        State::new(format!("{}^{}", atom.pred, index))
    }
}

/// One state per node (`p^j`, or `error` for the root). For each clause and
/// each choice of nodes matching its head and body predicates there is a
/// transition exactly when the clause constraint and the body nodes' labels
/// entail the head node's label.
pub fn interpolant_automaton(
    p: &Program,
    tree: &AndTree,
    ti: &TreeInterpolant,
) -> Result<TreeAutomaton, TreeInterpolationError> {
    if !check_tree_interpolant(tree, ti)? {
        return Err(TreeInterpolationError::Invalid);
    }
    let mut by_pred: BTreeMap<&Pred, Vec<usize>> = BTreeMap::new();
    for n in tree.nodes() {
        by_pred.entry(&n.atom.pred).or_default().push(n.index);
    }
    // (clause position, head node, body nodes)
    let mut jobs: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for (ci, c) in p.clauses().iter().enumerate() {
        let Some(heads) = by_pred.get(&c.head.pred) else {
            continue;
        };
        let pools: Vec<&Vec<usize>> = match c
            .body
            .iter()
            .map(|b| by_pred.get(&b.pred))
            .collect::<Option<Vec<_>>>()
        {
            Some(pools) => pools,
            None => continue,
        };
        for &h in heads {
            let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
            for pool in &pools {
                combos = combos
                    .into_iter()
                    .flat_map(|prefix| {
                        pool.iter().map(move |&j| {
                            let mut next = prefix.clone();
                            next.push(j);
                            next
                        })
                    })
                    .collect();
            }
            jobs.extend(combos.into_iter().map(|body| (ci, h, body)));
        }
    }
    let atoms = ti.atoms();
    let keep = exec::map(&jobs, |(ci, h, body)| {
        let c = &p.clauses()[*ci];
        let mut premise = c.constraint.clone();
        for (m, (&j, b)) in body.iter().zip(&c.body).enumerate() {
            premise = premise.and(&transport(
                ti.label(j),
                &atoms[j - 1].args,
                &b.args,
                &format!("b{m}"),
            ));
        }
        let conclusion = transport(ti.label(*h), &atoms[*h - 1].args, &c.head.args, "h");
        entails(&premise, &conclusion)
    });
    let transitions: Vec<Transition> = jobs
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|((ci, h, body), _)| {
            let c = &p.clauses()[*ci];
            Transition::new(
                c.id.clone(),
                body.iter().map(|&j| state_of(&atoms[j - 1], j)).collect(),
                state_of(&atoms[*h - 1], *h),
            )
        })
        .collect();
    let alphabet = p
        .clauses()
        .iter()
        .map(|c| (c.id.clone(), c.body.len()))
        .collect();
    let states: Vec<State> = atoms
        .iter()
        .enumerate()
        .map(|(k, a)| state_of(a, k + 1))
        .collect();
    let finals = atoms
        .first()
        .filter(|a| a.pred.is_false())
        .map(|a| state_of(a, 1));
    Ok(TreeAutomaton::new(states, finals, alphabet, transitions)
        .expect("clause transitions respect their own arities"))
}

/// Whether every term of `a` up to `depth` is an infeasible derivation of `p`.
/// Terms that are not derivations of `p` at all count as infeasible.
pub fn check_soundness(p: &Program, a: &TreeAutomaton, depth: usize) -> Result<bool, FtaError> {
    let terms: Vec<_> = enumerate(a, depth)?.into_iter().collect();
    Ok(exec::all(&terms, |t| {
        !matches!(feasible(p, t), Ok(Feasibility::Feasible(_)))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::parse_program;
    use crate::derivations::and_tree;

    #[test]
    fn two_node_tree() {
        let p = parse_program("false :- X>0, p(X). p(X) :- X<0.").unwrap();
        let tree = and_tree(&p, &"c1(c2)".parse().unwrap()).unwrap();
        let ti = tree_interpolant(&tree).unwrap();
        assert!(check_tree_interpolant(&tree, &ti).unwrap());
        assert!(!sat(&ti.label(2).and(&tree.node(1).unwrap().constraint)));
        let a = interpolant_automaton(&p, &tree, &ti).unwrap();
        assert!(a.accepts(&"c1(c2)".parse().unwrap()));
    }

    #[test]
    fn weakened_root_fails_the_check() {
        let p = parse_program("false :- X>0, p(X). p(X) :- X<0.").unwrap();
        let tree = and_tree(&p, &"c1(c2)".parse().unwrap()).unwrap();
        let bad =
            TreeInterpolant::from_labels(&tree, vec![LinConstraint::top(), LinConstraint::top()])
                .unwrap();
        assert!(!check_tree_interpolant(&tree, &bad).unwrap());
    }

    #[test]
    fn feasible_tree_has_no_interpolant() {
        let p = parse_program("false :- X>0, p(X). p(X) :- X>1.").unwrap();
        let tree = and_tree(&p, &"c1(c2)".parse().unwrap()).unwrap();
        assert_eq!(
            tree_interpolant(&tree),
            Err(TreeInterpolationError::Feasible)
        );
    }
}
