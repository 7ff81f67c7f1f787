use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use super::{FtaError, State, TraceTerm, TreeAutomaton};

/// Largest depth accepted by [`enumerate`].
pub const ENUMERATE_BOUND: usize = 6;

/// The least accepted term under [`TraceTerm::cmp_minimal`], or `None` when
/// the language is empty.
///
/// Computes the least term reaching each state by fixpoint iteration. The
/// order is monotone in subterms, so least terms compose from least terms.
pub fn find_accepted(a: &TreeAutomaton) -> Option<TraceTerm> {
    let mut best: BTreeMap<&State, TraceTerm> = BTreeMap::new();
    loop {
        let mut changed = false;
        for t in a.transitions() {
            let Some(children) = t
                .args
                .iter()
                .map(|q| best.get(q).cloned())
                .collect::<Option<Vec<_>>>()
            else {
                continue;
            };
            let candidate = TraceTerm::new(t.symbol.clone(), children);
            let better = match best.get(&t.target) {
                None => true,
                Some(old) => candidate.cmp_minimal(old) == Ordering::Less,
            };
            if better {
                best.insert(&t.target, candidate);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    a.finals()
        .iter()
        .filter_map(|q| best.get(q))
        .min_by(|x, y| x.cmp_minimal(y))
        .cloned()
}

/// Every accepted term of depth at most `maxdepth`.
pub fn enumerate(a: &TreeAutomaton, maxdepth: usize) -> Result<BTreeSet<TraceTerm>, FtaError> {
    if maxdepth > ENUMERATE_BOUND {
        return Err(FtaError::DepthBoundExceeded {
            requested: maxdepth,
            bound: ENUMERATE_BOUND,
        });
    }
    // reach[q]: terms of depth <= d that reach q.
    let mut reach: BTreeMap<&State, BTreeSet<TraceTerm>> = BTreeMap::new();
    for _ in 0..maxdepth {
        let mut next: BTreeMap<&State, BTreeSet<TraceTerm>> = BTreeMap::new();
        for t in a.transitions() {
            let pools: Vec<Vec<&TraceTerm>> = t
                .args
                .iter()
                .map(|q| reach.get(q).map(|s| s.iter().collect()).unwrap_or_default())
                .collect();
            let out = next.entry(&t.target).or_default();
            let mut acc = Vec::with_capacity(pools.len());
            product(&pools, &mut acc, &mut |children| {
                out.insert(TraceTerm::new(
                    t.symbol.clone(),
                    children.iter().map(|c| (*c).clone()).collect(),
                ));
            });
        }
        reach = next;
    }
    Ok(a.finals()
        .iter()
        .filter_map(|q| reach.get(q))
        .flatten()
        .cloned()
        .collect())
}

fn product<'a>(
    pools: &[Vec<&'a TraceTerm>],
    acc: &mut Vec<&'a TraceTerm>,
    f: &mut impl FnMut(&[&'a TraceTerm]),
) {
    match pools.split_first() {
        None => f(acc),
        Some((head, rest)) => {
            for x in head {
                acc.push(x);
                product(rest, acc, f);
                acc.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib_like() -> TreeAutomaton {
        "finals: false\nc1 -> fib\nc2(fib,fib) -> fib\nc3(fib) -> false\n"
            .parse()
            .unwrap()
    }

    #[test]
    fn least_term_is_shallowest() {
        assert_eq!(find_accepted(&fib_like()).unwrap().to_string(), "c3(c1)");
    }

    #[test]
    fn enumeration_by_depth() {
        let a = fib_like();
        assert!(enumerate(&a, 0).unwrap().is_empty());
        let d2: Vec<String> = enumerate(&a, 2)
            .unwrap()
            .iter()
            .map(|t| t.to_string())
            .collect();
        assert_eq!(d2, vec!["c3(c1)"]);
        assert_eq!(enumerate(&a, 3).unwrap().len(), 2);
        assert_eq!(enumerate(&a, 4).unwrap().len(), 5);
        assert!(matches!(
            enumerate(&a, 7),
            Err(FtaError::DepthBoundExceeded { requested: 7, .. })
        ));
    }

    #[test]
    fn empty_language_has_no_witness() {
        let a: TreeAutomaton = "finals: f\nc1(f) -> f\n".parse().unwrap();
        assert!(find_accepted(&a).is_none());
    }
}
