//! AND-trees of trace terms and their formulas.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::chc::{Atom, ClauseId, Pred, Program, Var};
use crate::fta::TraceTerm;
use crate::lra::{is_sat, LinConstraint, SatResult, Witness};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DerivationError {
    #[error("{0} is not a clause of the program")]
    UnknownClause(ClauseId),
    #[error("clause {clause} has {expected} body atoms but the term gives it {found} children")]
    ArityMismatch {
        clause: ClauseId,
        expected: usize,
        found: usize,
    },
    #[error("clause {clause} defines {found} where {expected} is required")]
    PredicateMismatch {
        clause: ClauseId,
        expected: Pred,
        found: Pred,
    },
    #[error("the root clause {0} is not an integrity constraint")]
    NotRootedAtFalse(ClauseId),
    #[error("node {0} does not exist")]
    InvalidNode(usize),
}

/// A node of an AND-tree: an instance of one clause.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AndNode {
    pub index: usize,
    pub atom: Atom,
    pub clause: ClauseId,
    pub constraint: LinConstraint,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Nodes are numbered from 1 in preorder, children in body order. The
/// variables of node `i`'s clause instance carry the suffix `_n<i>`, except
/// head arguments, which are those of the parent's body atom.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AndTree {
    nodes: Vec<AndNode>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Witness),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// The AND-tree of a trace rooted at an integrity constraint.
pub fn and_tree(p: &Program, t: &TraceTerm) -> Result<AndTree, DerivationError> {
    let root = p
        .clause_by_id(&t.symbol)
        .map_err(|_| DerivationError::UnknownClause(t.symbol.clone()))?;
    if !root.is_integrity() {
        return Err(DerivationError::NotRootedAtFalse(t.symbol.clone()));
    }
    and_tree_rooted(p, t)
}

/// As [`and_tree`] but accepts any root clause; the root atom is the
/// renamed head.
pub fn and_tree_rooted(p: &Program, t: &TraceTerm) -> Result<AndTree, DerivationError> {
    let mut nodes = Vec::with_capacity(t.size());
    build(p, t, None, None, &mut nodes)?;
    Ok(AndTree { nodes })
}

fn build(
    p: &Program,
    t: &TraceTerm,
    parent: Option<usize>,
    atom: Option<&Atom>,
    nodes: &mut Vec<AndNode>,
) -> Result<usize, DerivationError> {
    let clause = p
        .clause_by_id(&t.symbol)
        .map_err(|_| DerivationError::UnknownClause(t.symbol.clone()))?;
    if clause.body.len() != t.children.len() {
        return Err(DerivationError::ArityMismatch {
            clause: t.symbol.clone(),
            expected: clause.body.len(),
            found: t.children.len(),
        });
    }
    if let Some(a) = atom {
        if a.pred != clause.head.pred {
            return Err(DerivationError::PredicateMismatch {
                clause: t.symbol.clone(),
                expected: a.pred.clone(),
                found: clause.head.pred.clone(),
            });
        }
    }
    let index = nodes.len() + 1;
    let suffix = format!("_n{index}");
    let mut map: BTreeMap<Var, Var> = clause
        .vars()
        .into_iter()
        .map(|v| {
            let renamed = v.suffixed(&suffix);
            (v, renamed)
        })
        .collect();
    if let Some(a) = atom {
        for (h, x) in clause.head.args.iter().zip(&a.args) {
            map.insert(h.clone(), x.clone());
        }
    }
    nodes.push(AndNode {
        index,
        atom: clause.head.rename(&map),
        clause: clause.id.clone(),
        constraint: clause.constraint.rename(&map),
        parent,
        children: Vec::new(),
    });
    for (child, body_atom) in t.children.iter().zip(&clause.body) {
        let instance = body_atom.rename(&map);
        let c = build(p, child, Some(index), Some(&instance), nodes)?;
        nodes[index - 1].children.push(c);
    }
    Ok(index)
}

impl AndTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[AndNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Result<&AndNode, DerivationError> {
        i.checked_sub(1)
            .and_then(|k| self.nodes.get(k))
            .ok_or(DerivationError::InvalidNode(i))
    }

    /// Indices of the subtree rooted at `i`: a contiguous preorder range.
    pub fn subtree(&self, i: usize) -> Result<std::ops::RangeInclusive<usize>, DerivationError> {
        let mut last = self.node(i)?.index;
        while let Some(&c) = self.nodes[last - 1].children.last() {
            last = c;
        }
        Ok(i..=last)
    }

    /// F(T): every node's constraint.
    pub fn formula(&self) -> LinConstraint {
        LinConstraint::conjoin(self.nodes.iter().map(|n| &n.constraint))
    }

    /// F(T_i): the constraints of the subtree rooted at `i`.
    pub fn subtree_formula(&self, i: usize) -> Result<LinConstraint, DerivationError> {
        let range = self.subtree(i)?;
        Ok(LinConstraint::conjoin(
            self.nodes[range.start() - 1..*range.end()]
                .iter()
                .map(|n| &n.constraint),
        ))
    }

    /// G(T_i): the constraints of every node outside the subtree at `i`.
    pub fn context_formula(&self, i: usize) -> Result<LinConstraint, DerivationError> {
        let range = self.subtree(i)?;
        Ok(LinConstraint::conjoin(
            self.nodes
                .iter()
                .filter(|n| !range.contains(&n.index))
                .map(|n| &n.constraint),
        ))
    }

    /// Clause identifiers rebuilt into a term.
    pub fn term(&self) -> TraceTerm {
        fn go(t: &AndTree, i: usize) -> TraceTerm {
            let n = &t.nodes[i - 1];
            TraceTerm::new(
                n.clause.clone(),
                n.children.iter().map(|&c| go(t, c)).collect(),
            )
        }
        go(self, 1)
    }
}

impl fmt::Display for AndTree {
    /// One line per node, indented by depth: `index: atom [clause] constraint`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut depth = vec![0usize; self.nodes.len() + 1];
        for n in &self.nodes {
            if let Some(p) = n.parent {
                depth[n.index] = depth[p] + 1;
            }
            writeln!(
                f,
                "{:indent$}{}: {} [{}] {}",
                "",
                n.index,
                n.atom,
                n.clause,
                n.constraint,
                indent = 2 * depth[n.index]
            )?;
        }
        Ok(())
    }
}

/// Whether the trace's AND-tree formula is satisfiable.
pub fn feasible(p: &Program, t: &TraceTerm) -> Result<Feasibility, DerivationError> {
    let tree = and_tree_rooted(p, t)?;
    Ok(match is_sat(&tree.formula()) {
        SatResult::Sat(w) => Feasibility::Feasible(w),
        SatResult::Unsat => Feasibility::Infeasible,
    })
}
