//! Test-side oracles and generators shared by the integration suites.
//!
//! The oracles here deliberately avoid the library's solver and automaton
//! algorithms: satisfiability is decided by plain Fourier–Motzkin
//! elimination and tree languages by brute-force term generation.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rahit::chc::{parse_program, ClauseId, Program, Var};
use rahit::fta::{State, TraceTerm, Transition, TreeAutomaton};
use rahit::lra::{LinConstraint, LinExpr, LinRow, Rat, Rel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

/// Every corpus program, by file stem, in name order.
pub fn corpus() -> Vec<(String, Program)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "chc"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|path| {
            let text = std::fs::read_to_string(&path).unwrap();
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            let p = parse_program(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, p)
        })
        .collect()
}

pub fn corpus_program(name: &str) -> Program {
    corpus()
        .into_iter()
        .find(|(n, _)| n == name)
        .unwrap_or_else(|| panic!("no corpus program {name}"))
        .1
}

pub fn term(s: &str) -> TraceTerm {
    s.parse().unwrap()
}

// ---------------------------------------------------------------------------
// Fourier–Motzkin oracle

/// `sum <= rhs` or `sum < rhs`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct OracleRow {
    coeffs: BTreeMap<String, Rat>,
    strict: bool,
    rhs: Rat,
}

/// Scales a row so its largest absolute coefficient is 1, for deduplication.
fn scale_row(mut r: OracleRow) -> OracleRow {
    let m = r
        .coeffs
        .values()
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(Rat::one);
    if !m.is_zero() && !m.is_one() {
        for c in r.coeffs.values_mut() {
            *c = &*c / &m;
        }
        r.rhs = &r.rhs / &m;
    }
    r
}

/// `sum = rhs`.
#[derive(Clone, Debug)]
struct OracleEq {
    coeffs: BTreeMap<String, Rat>,
    rhs: Rat,
}

/// Eliminates `x` from `coeffs`/`rhs` using the equality `eq`.
fn substitute(coeffs: &mut BTreeMap<String, Rat>, rhs: &mut Rat, x: &str, eq: &OracleEq) {
    let Some(k) = coeffs.remove(x) else { return };
    let f = &k / &eq.coeffs[x];
    for (v, c) in &eq.coeffs {
        if v != x {
            *coeffs.entry(v.clone()).or_insert_with(Rat::zero) -= c * &f;
        }
    }
    coeffs.retain(|_, c| !c.is_zero());
    *rhs -= &eq.rhs * &f;
}

fn constant_holds(r: &OracleRow) -> bool {
    if r.strict {
        r.rhs.is_positive()
    } else {
        !r.rhs.is_negative()
    }
}

/// Satisfiability over the reals: Gaussian substitution of equalities, then
/// Fourier–Motzkin elimination of the cheapest variable at each step.
pub fn fm_sat_rows(rows: &[LinRow]) -> bool {
    let mut eqs: Vec<OracleEq> = Vec::new();
    let mut ineqs: Vec<OracleRow> = Vec::new();
    for r in rows {
        let coeffs: BTreeMap<String, Rat> = r
            .expr
            .terms()
            .map(|(v, c)| (v.name().to_string(), c.clone()))
            .collect();
        let rhs = r.rhs.clone();
        match r.rel {
            Rel::Eq => eqs.push(OracleEq { coeffs, rhs }),
            Rel::Le => ineqs.push(OracleRow {
                coeffs,
                strict: false,
                rhs,
            }),
            Rel::Lt => ineqs.push(OracleRow {
                coeffs,
                strict: true,
                rhs,
            }),
        }
    }
    while let Some(eq) = eqs.pop() {
        let Some(x) = eq.coeffs.keys().next().cloned() else {
            if !eq.rhs.is_zero() {
                return false;
            }
            continue;
        };
        for e in eqs.iter_mut() {
            substitute(&mut e.coeffs, &mut e.rhs, &x, &eq);
        }
        for r in ineqs.iter_mut() {
            substitute(&mut r.coeffs, &mut r.rhs, &x, &eq);
        }
    }
    let mut rows: BTreeSet<OracleRow> = ineqs.into_iter().map(scale_row).collect();
    loop {
        if rows
            .iter()
            .any(|r| r.coeffs.is_empty() && !constant_holds(r))
        {
            return false;
        }
        rows.retain(|r| !r.coeffs.is_empty());
        let mut counts: BTreeMap<&String, (usize, usize)> = BTreeMap::new();
        for r in &rows {
            for (v, c) in &r.coeffs {
                let e = counts.entry(v).or_default();
                if c.is_positive() {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        let Some(x) = counts
            .iter()
            .min_by_key(|(_, (p, n))| p * n)
            .map(|(v, _)| (*v).clone())
        else {
            return true;
        };
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut rest = BTreeSet::new();
        for r in rows {
            match r.coeffs.get(&x) {
                Some(c) if c.is_positive() => pos.push(r),
                Some(_) => neg.push(r),
                None => {
                    rest.insert(r);
                }
            }
        }
        for p in &pos {
            for n in &neg {
                let a = p.coeffs[&x].clone();
                let b = -n.coeffs[&x].clone();
                let mut coeffs: BTreeMap<String, Rat> = BTreeMap::new();
                for (v, c) in &p.coeffs {
                    *coeffs.entry(v.clone()).or_insert_with(Rat::zero) += c * &b;
                }
                for (v, c) in &n.coeffs {
                    *coeffs.entry(v.clone()).or_insert_with(Rat::zero) += c * &a;
                }
                coeffs.retain(|_, c| !c.is_zero());
                rest.insert(scale_row(OracleRow {
                    coeffs,
                    strict: p.strict || n.strict,
                    rhs: &p.rhs * &b + &n.rhs * &a,
                }));
            }
        }
        rows = rest;
    }
}

pub fn fm_sat(c: &LinConstraint) -> bool {
    fm_sat_rows(c.rows())
}

/// The rows whose disjunction is the complement of `r`.
fn complement(r: &LinRow) -> Vec<LinRow> {
    let neg = r.expr.scaled(&-Rat::one());
    match r.rel {
        Rel::Le => vec![LinRow::new(neg, Rel::Lt, -r.rhs.clone())],
        Rel::Lt => vec![LinRow::new(neg, Rel::Le, -r.rhs.clone())],
        Rel::Eq => vec![
            LinRow::new(r.expr.clone(), Rel::Lt, r.rhs.clone()),
            LinRow::new(neg, Rel::Lt, -r.rhs.clone()),
        ],
    }
}

/// `premise ⊨ conclusion` decided with the elimination oracle.
pub fn fm_entails(premise: &LinConstraint, conclusion: &LinConstraint) -> bool {
    conclusion.rows().iter().all(|row| {
        complement(row).into_iter().all(|neg| {
            let mut rows = premise.rows().to_vec();
            rows.push(neg);
            !fm_sat_rows(&rows)
        })
    })
}

// ---------------------------------------------------------------------------
// Random linear systems

pub fn var(name: &str) -> Var {
    Var::new(name)
}

pub fn random_row(rng: &mut impl Rng, vars: &[Var]) -> LinRow {
    let mut expr = LinExpr::zero();
    while expr.is_zero() {
        for v in vars {
            if rng.gen_bool(0.6) {
                expr.add_term(v.clone(), Rat::from_integer(rng.gen_range(-3..=3).into()));
            }
        }
    }
    let rhs = Rat::from_integer(rng.gen_range(-5..=5).into());
    let rel = match rng.gen_range(0..5) {
        0 => Rel::Eq,
        1 | 2 => Rel::Lt,
        _ => Rel::Le,
    };
    LinRow::new(expr, rel, rhs)
}

pub fn random_system(rng: &mut impl Rng, vars: &[Var], max_rows: usize) -> LinConstraint {
    let n = rng.gen_range(1..=max_rows);
    LinConstraint::new((0..n).map(|_| random_row(rng, vars)).collect())
}

// ---------------------------------------------------------------------------
// Brute-force tree languages

/// The fixed alphabet of random automata: two constants, one unary and one
/// binary symbol.
pub fn small_alphabet() -> BTreeMap<ClauseId, usize> {
    [("c1", 0), ("c2", 0), ("c3", 1), ("c4", 2)]
        .into_iter()
        .map(|(s, k)| (ClauseId::new(s), k))
        .collect()
}

/// All terms over `alphabet` of depth at most `depth`.
pub fn all_terms(alphabet: &BTreeMap<ClauseId, usize>, depth: usize) -> Vec<TraceTerm> {
    let mut terms: Vec<TraceTerm> = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::new();
        for (s, &k) in alphabet {
            let mut tuples: Vec<Vec<TraceTerm>> = vec![Vec::new()];
            for _ in 0..k {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        terms.iter().map(move |x| {
                            let mut t = t.clone();
                            t.push(x.clone());
                            t
                        })
                    })
                    .collect();
            }
            next.extend(tuples.into_iter().map(|ch| TraceTerm::new(s.clone(), ch)));
        }
        terms = next;
    }
    terms
}

/// States reachable by `t`, by direct recursion over the transition list.
pub fn oracle_run(a: &TreeAutomaton, t: &TraceTerm) -> BTreeSet<State> {
    let kids: Vec<BTreeSet<State>> = t.children.iter().map(|c| oracle_run(a, c)).collect();
    let mut out = BTreeSet::new();
    for tr in a.transitions() {
        if tr.symbol == t.symbol
            && tr.args.len() == kids.len()
            && tr.args.iter().zip(&kids).all(|(q, s)| s.contains(q))
        {
            out.insert(tr.target.clone());
        }
    }
    out
}

pub fn oracle_accepts(a: &TreeAutomaton, t: &TraceTerm) -> bool {
    oracle_run(a, t).iter().any(|q| a.finals().contains(q))
}

pub fn oracle_language(a: &TreeAutomaton, universe: &[TraceTerm]) -> BTreeSet<TraceTerm> {
    universe
        .iter()
        .filter(|t| oracle_accepts(a, t))
        .cloned()
        .collect()
}

/// A random automaton over [`small_alphabet`] with at most `max_states`
/// states and `max_transitions` transitions.
pub fn random_fta(rng: &mut impl Rng, max_states: usize, max_transitions: usize) -> TreeAutomaton {
    let n = rng.gen_range(1..=max_states);
    let states: Vec<State> = (0..n).map(|i| State::new(format!("q{i}"))).collect();
    let alphabet = small_alphabet();
    let symbols: Vec<(&ClauseId, &usize)> = alphabet.iter().collect();
    let m = rng.gen_range(1..=max_transitions);
    let mut transitions = Vec::new();
    for k in 0..m {
        // The first transitions are leaves so that the language is rarely empty.
        let (s, &arity) = if k < 2 {
            symbols[rng.gen_range(0..2)]
        } else {
            symbols[rng.gen_range(0..symbols.len())]
        };
        let args = (0..arity)
            .map(|_| states[rng.gen_range(0..n)].clone())
            .collect();
        transitions.push(Transition::new(
            s.clone(),
            args,
            states[rng.gen_range(0..n)].clone(),
        ));
    }
    let mut finals: Vec<State> = states
        .iter()
        .filter(|_| rng.gen_bool(0.4))
        .cloned()
        .collect();
    if finals.is_empty() {
        finals.push(states[0].clone());
    }
    TreeAutomaton::new(states, finals, alphabet, transitions).unwrap()
}

// ---------------------------------------------------------------------------
// Random derivation trees

/// A program with one clause per node of a random tree, together with the
/// term of that tree. Clause `c<i>` is node `i` in preorder; the root is an
/// integrity constraint. Each clause mentions at most `max_vars` variables.
pub fn random_tree_program(
    rng: &mut impl Rng,
    max_nodes: usize,
    max_vars: usize,
) -> (Program, TraceTerm) {
    // Random shape with at most two children per node, renumbered so that
    // node numbers follow preorder.
    let n = rng.gen_range(1..=max_nodes);
    let mut raw: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for i in 2..=n {
        let open: Vec<usize> = (1..i).filter(|&j| raw[j].len() < 2).collect();
        let p = open[rng.gen_range(0..open.len())];
        raw[p].push(i);
    }
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![1usize];
    while let Some(j) = stack.pop() {
        order.push(j);
        stack.extend(raw[j].iter().rev());
    }
    let mut renumber = vec![0usize; n + 1];
    for (k, &j) in order.iter().enumerate() {
        renumber[j] = k + 1;
    }
    let mut parent = vec![0usize; n + 1];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for j in 1..=n {
        for &c in &raw[j] {
            children[renumber[j]].push(renumber[c]);
            parent[renumber[c]] = renumber[j];
        }
    }
    // Binary arity only for only children, so a clause has at most four
    // atom arguments plus one local variable.
    let arity: Vec<usize> = (0..=n)
        .map(|i| match i {
            0 | 1 => 0,
            _ if children[parent[i]].len() > 1 => 1,
            _ => rng.gen_range(1..=2),
        })
        .collect();
    let mut text = String::new();
    for i in 1..=n {
        let mut vars: Vec<String> = Vec::new();
        let head = if i == 1 {
            "false".to_string()
        } else {
            let args: Vec<String> = (0..arity[i]).map(|k| format!("H{k}")).collect();
            vars.extend(args.iter().cloned());
            format!("p{i}({})", args.join(","))
        };
        let mut body_atoms = Vec::new();
        for (m, &c) in children[i].iter().enumerate() {
            let args: Vec<String> = (0..arity[c]).map(|k| format!("B{m}_{k}")).collect();
            vars.extend(args.iter().cloned());
            body_atoms.push(format!("p{c}({})", args.join(",")));
        }
        if vars.len() < max_vars && rng.gen_bool(0.3) {
            vars.push("L".to_string());
        }
        let vs: Vec<Var> = vars.iter().map(Var::new).collect();
        let mut items: Vec<String> = Vec::new();
        if !vs.is_empty() {
            let rows = random_system(rng, &vs, 3);
            items.extend(rows.rows().iter().map(|r| r.to_string()));
        }
        items.extend(body_atoms);
        if items.is_empty() {
            text.push_str(&format!("{head}.\n"));
        } else {
            text.push_str(&format!("{head} :- {}.\n", items.join(", ")));
        }
    }
    let p = parse_program(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    fn build(i: usize, children: &[Vec<usize>]) -> TraceTerm {
        TraceTerm::new(
            ClauseId::numbered(i),
            children[i].iter().map(|&c| build(c, children)).collect(),
        )
    }
    (p, build(1, &children))
}
