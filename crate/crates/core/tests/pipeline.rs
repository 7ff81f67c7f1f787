//! Properties of derivations, interpolation, analysis, refinement and the
//! loop, on the corpus and on random derivation trees.

mod common;

use std::collections::BTreeSet;
use std::time::Duration;

use proptest::prelude::*;

use rahit::absint::{analyze, has_false, is_prefixpoint, DEFAULT_WIDEN_DELAY};
use rahit::chc::{parse_program, ClauseId, Program, Var};
use rahit::derivations::{and_tree, and_tree_rooted, feasible};
use rahit::driver::{
    to_original, verify, verify_with, Engine, Options, Step, UnknownReason, Verdict,
};
use rahit::fta::{
    determinise, difference, enumerate, singleton_fta, trace_fta, TraceTerm, TreeAutomaton,
};
use rahit::lra::{entails, sat};
use rahit::tree_interpolation::{check_tree_interpolant, interpolant_automaton, tree_interpolant};

use common::*;

fn oracle_feasible(p: &Program, t: &TraceTerm) -> bool {
    and_tree_rooted(p, t).is_ok_and(|tree| fm_sat(&tree.formula()))
}

/// Rewrites every symbol of `t` with `f`.
fn relabel(t: &TraceTerm, f: impl Fn(&ClauseId) -> ClauseId) -> TraceTerm {
    t.map_symbols(&mut |id: &ClauseId| -> Result<_, ()> { Ok(f(id)) })
        .unwrap()
}

/// Depth-4 language of `a` minus that of `b`.
fn removed(a: &TreeAutomaton, b: &TreeAutomaton) -> BTreeSet<TraceTerm> {
    let kept = enumerate(b, 4).unwrap();
    enumerate(a, 4)
        .unwrap()
        .into_iter()
        .filter(|t| !kept.contains(t))
        .collect()
}

fn options(engine: Engine) -> Options {
    Options {
        engine,
        max_iter: 6,
        ..Options::default()
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[test]
fn printing_is_a_parse_fixpoint() {
    for (name, p) in corpus() {
        let once = p.to_string();
        let twice = parse_program(&once).unwrap().to_string();
        assert_eq!(once, twice, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_programs_round_trip(seed in any::<u64>()) {
        let (p, _) = random_tree_program(&mut rng(seed), 8, 5);
        let text = p.to_string();
        let back = parse_program(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        prop_assert_eq!(back.len(), p.len());
    }

    #[test]
    fn trees_decompose_at_every_node(seed in any::<u64>()) {
        let (p, t) = random_tree_program(&mut rng(seed), 6, 4);
        let tree = and_tree(&p, &t).unwrap();
        prop_assert_eq!(tree.len(), t.size());
        let whole = tree.formula();
        for node in tree.nodes() {
            let inside = tree.subtree_formula(node.index).unwrap();
            let outside = tree.context_formula(node.index).unwrap();
            let joined = inside.and(&outside);
            prop_assert!(fm_entails(&whole, &joined) && fm_entails(&joined, &whole));
            let args: BTreeSet<Var> = node.atom.args.iter().cloned().collect();
            let shared: BTreeSet<Var> = inside.vars().intersection(&outside.vars()).cloned().collect();
            prop_assert!(shared.is_subset(&args), "node {} shares {:?}", node.index, shared);
            let clause = p.clause_by_id(&node.clause).unwrap();
            prop_assert_eq!(node.children.len(), clause.body.len());
        }
    }

    #[test]
    fn infeasible_subtrees_make_the_tree_infeasible(seed in any::<u64>()) {
        let (p, t) = random_tree_program(&mut rng(seed), 6, 4);
        let tree = and_tree(&p, &t).unwrap();
        let any_dead = tree
            .nodes()
            .iter()
            .any(|n| !fm_sat(&tree.subtree_formula(n.index).unwrap()));
        if any_dead {
            prop_assert!(!feasible(&p, &t).unwrap().is_feasible());
        }
        prop_assert_eq!(feasible(&p, &t).unwrap().is_feasible(), fm_sat(&tree.formula()));
    }
}

// ---------------------------------------------------------------------------
// Tree interpolants

#[test]
fn random_infeasible_trees_have_valid_interpolants() {
    let mut rng = rng(0x7069_7065);
    let mut checked = 0;
    while checked < 60 {
        let (p, t) = random_tree_program(&mut rng, 7, 4);
        let tree = and_tree(&p, &t).unwrap();
        if sat(&tree.formula()) {
            assert!(tree_interpolant(&tree).is_err());
            continue;
        }
        let ti = tree_interpolant(&tree).unwrap();
        assert!(check_tree_interpolant(&tree, &ti).unwrap(), "{p}");
        assert!(!fm_sat(ti.label(1)));
        for node in tree.nodes() {
            let mut premise = node.constraint.clone();
            for &c in &node.children {
                premise = premise.and(ti.label(c));
            }
            assert!(
                fm_entails(&premise, ti.label(node.index)),
                "{p}: node {}",
                node.index
            );
        }
        let a = interpolant_automaton(&p, &tree, &ti).unwrap();
        assert!(a.accepts(&t), "{p}: {t} not in its own automaton");
        checked += 1;
    }
}

#[test]
fn refuted_corpus_traces_are_in_their_automata() {
    for (name, p) in corpus() {
        for t in enumerate(&trace_fta(&p), 3).unwrap() {
            if oracle_feasible(&p, &t) {
                continue;
            }
            let tree = and_tree(&p, &t).unwrap();
            let ti = tree_interpolant(&tree).unwrap();
            let a = interpolant_automaton(&p, &tree, &ti).unwrap();
            assert!(a.accepts(&t), "{name}: {t}");
            for u in enumerate(&a, 4).unwrap() {
                assert!(!oracle_feasible(&p, &u), "{name}: {u} from {t} is feasible");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Abstract interpretation

#[test]
fn analysis_terminates_for_every_delay() {
    let mut rng = rng(0x6162_7369);
    let mut programs: Vec<Program> = corpus().into_iter().map(|(_, p)| p).collect();
    programs.extend((0..20).map(|_| random_tree_program(&mut rng, 6, 4).0));
    for p in &programs {
        for delay in 0..=5 {
            let m = analyze(p, delay);
            assert!(is_prefixpoint(p, &m), "delay {delay} on\n{p}");
        }
    }
}

#[test]
fn analysis_covers_feasible_derivations() {
    let mut checked = 0;
    for (name, p) in corpus() {
        let m = analyze(&p, DEFAULT_WIDEN_DELAY);
        for t in enumerate(&trace_fta(&p), 4).unwrap() {
            let tree = and_tree(&p, &t).unwrap();
            let whole = tree.formula();
            if !fm_sat(&whole) {
                continue;
            }
            assert!(has_false(&m), "{name}: feasible {t} but no false entry");
            for node in tree.nodes() {
                assert!(
                    entails(&whole, &m.gamma(&node.atom, "s")),
                    "{name}: {t} node {}",
                    node.index
                );
            }
            checked += 1;
        }
        // Non-false-rooted derivations too.
        for c in p
            .clauses()
            .iter()
            .filter(|c| c.body.is_empty() && !c.is_integrity())
        {
            let fact = TraceTerm::leaf(c.id.clone());
            let tree = and_tree_rooted(&p, &fact).unwrap();
            assert!(
                entails(&tree.formula(), &m.gamma(&tree.nodes()[0].atom, "s")),
                "{name}"
            );
        }
    }
    assert!(checked > 0);
}

// ---------------------------------------------------------------------------
// Refinement and the loop

#[test]
fn refinement_preserves_constraints_and_feasibility() {
    let mut steps = 0;
    for (name, p) in corpus() {
        for engine in [Engine::Rahit, Engine::Rahft] {
            verify_with(&p, &options(engine), |_, current, s| {
                let Step::Refined { refined, .. } = s else {
                    return;
                };
                steps += 1;
                let q = &refined.program;
                for c in q.clauses() {
                    let source = current.clause_by_id(&refined.id_map[&c.id]).unwrap();
                    assert_eq!(c.constraint, source.constraint, "{name}");
                    assert_eq!(c.head.args, source.head.args, "{name}");
                    assert_eq!(c.body.len(), source.body.len(), "{name}");
                    assert_eq!(c.origin, source.origin, "{name}");
                }
                for t in enumerate(&trace_fta(q), 4).unwrap() {
                    let erased = relabel(&t, |id| refined.id_map[id].clone());
                    assert_eq!(
                        oracle_feasible(q, &t),
                        oracle_feasible(current, &erased),
                        "{name}: {t} / {erased}"
                    );
                }
            });
        }
    }
    assert!(steps > 0);
}

#[test]
fn refuted_traces_do_not_come_back() {
    for (name, p) in corpus() {
        for engine in [Engine::Rahit, Engine::Rahft] {
            verify_with(&p, &options(engine), |_, current, s| {
                let Step::Refined { trace, refined, .. } = s else {
                    return;
                };
                let refuted = to_original(current, trace).unwrap();
                let q = &refined.program;
                for t in enumerate(&trace_fta(q), trace.depth()).unwrap() {
                    let original = to_original(q, &t).unwrap();
                    assert_ne!(original, refuted, "{name}/{engine}");
                }
            });
        }
    }
}

#[test]
fn interpolant_removal_dominates_trace_removal() {
    let mut steps = 0;
    for (name, p) in corpus() {
        verify_with(&p, &options(Engine::Rahit), |_, _, s| {
            let Step::Refined {
                trace,
                model_fta,
                difference: kept,
                ..
            } = s
            else {
                return;
            };
            steps += 1;
            let by_rahit = removed(model_fta, kept);
            let by_rahft = removed(
                model_fta,
                &determinise(&difference(model_fta, &singleton_fta(trace)).unwrap()),
            );
            assert!(by_rahit.contains(trace), "{name}: {trace}");
            assert!(by_rahit.is_superset(&by_rahft), "{name}: {trace}");
        });
    }
    assert!(steps > 0);
}

#[test]
fn unsafe_verdicts_replay_on_the_input() {
    let mut unsafe_count = 0;
    let mut rng = rng(0x756e_7361);
    let mut programs: Vec<(String, Program)> = corpus();
    programs
        .extend((0..20).map(|i| (format!("random {i}"), random_tree_program(&mut rng, 5, 3).0)));
    for (name, p) in programs {
        for engine in [Engine::Rahit, Engine::Rahft] {
            let out = verify(&p, &options(engine));
            if let Verdict::Unsafe { trace, witness } = &out.verdict {
                unsafe_count += 1;
                assert!(oracle_feasible(&p, trace), "{name}: {trace}");
                let tree = and_tree(&p, trace).unwrap();
                let values = witness.concretize(&tree.formula());
                let value = |v: &Var| values.get(v).cloned().unwrap_or_default();
                assert!(tree.formula().holds(value), "{name}: witness");
            }
        }
    }
    assert!(unsafe_count >= 4);
}

#[test]
fn corpus_verdicts() {
    let expected = [
        ("countdown", "SAFE"),
        ("counter_unsafe", "UNSAFE"),
        ("fib", "SAFE"),
        ("modes", "SAFE"),
        ("two_facts", "SAFE"),
        ("unsafe_simple", "UNSAFE"),
    ];
    for (name, label) in expected {
        let p = corpus_program(name);
        for engine in [Engine::Rahit, Engine::Rahft] {
            assert_eq!(
                verify(&p, &options(engine)).verdict.label(),
                label,
                "{name}/{engine}"
            );
        }
    }
}

#[test]
fn one_interpolant_refinement_proves_modes() {
    let p = corpus_program("modes");
    let mut removed_terms = BTreeSet::new();
    let mut refuted = None;
    let out = verify_with(&p, &options(Engine::Rahit), |_, _, s| {
        if let Step::Refined {
            trace,
            model_fta,
            difference,
            ..
        } = s
        {
            removed_terms = removed(model_fta, difference);
            refuted = Some(trace.clone());
        }
    });
    assert_eq!(out.verdict, Verdict::Safe);
    assert_eq!(out.stats.iterations, 1);
    let t = refuted.unwrap();
    assert!(removed_terms.contains(&t));
    assert!(removed_terms.len() > 1, "only {t} removed");
    for u in &removed_terms {
        assert!(!oracle_feasible(&p, u), "{u} is feasible");
    }
    let rahft = verify(&p, &options(Engine::Rahft));
    assert_eq!(rahft.verdict, Verdict::Safe);
    assert!(rahft.stats.iterations > out.stats.iterations);
}

#[test]
fn zero_timeout_is_reported() {
    let p = corpus_program("modes");
    let out = verify(
        &p,
        &Options {
            timeout: Some(Duration::ZERO),
            ..Options::default()
        },
    );
    assert_eq!(out.verdict, Verdict::Unknown(UnknownReason::Timeout));
}
