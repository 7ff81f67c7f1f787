//! The abstraction-refinement loop.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::absint::{analyze, has_false, DEFAULT_WIDEN_DELAY};
use crate::chc::{ClauseId, Program};
use crate::derivations::{and_tree, feasible, Feasibility};
use crate::fta::{
    determinise, difference, find_accepted, model_fta, singleton_fta, TraceTerm, TreeAutomaton,
};
use crate::lra::Witness;
use crate::model::InterpretationModel;
use crate::refinement::{generate_clauses, Refined};
use crate::tree_interpolation::{interpolant_automaton, tree_interpolant};
use crate::Error;

/// How a refuted trace is generalised before removal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Remove the language of the trace's interpolant automaton.
    Rahit,
    /// Remove the trace alone.
    Rahft,
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rahit" => Ok(Engine::Rahit),
            "rahft" => Ok(Engine::Rahft),
            other => Err(format!("unknown engine {other:?}")),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Rahit => "rahit",
            Engine::Rahft => "rahft",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub engine: Engine,
    pub max_iter: usize,
    pub widen_delay: usize,
    pub timeout: Option<Duration>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            engine: Engine::Rahit,
            max_iter: 20,
            widen_delay: DEFAULT_WIDEN_DELAY,
            timeout: Some(Duration::from_secs(300)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnknownReason {
    IterationLimit,
    Timeout,
    Internal(String),
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnknownReason::IterationLimit => f.write_str("iteration limit reached"),
            UnknownReason::Timeout => f.write_str("timeout"),
            UnknownReason::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Safe,
    /// A feasible trace over the input program's clause ids.
    Unsafe {
        trace: TraceTerm,
        witness: Witness,
    },
    Unknown(UnknownReason),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Safe => "SAFE",
            Verdict::Unsafe { .. } => "UNSAFE",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }
}

/// Sizes recorded for one refinement.
#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct IterationStats {
    pub clauses: usize,
    pub trace: String,
    pub model_fta_transitions: usize,
    pub remover_states: usize,
    pub remover_transitions: usize,
    pub difference_states: usize,
    pub refined_clauses: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Stats {
    pub iterations: usize,
    pub times_ms: BTreeMap<&'static str, f64>,
    pub per_iteration: Vec<IterationStats>,
}

impl Stats {
    fn time<R>(&mut self, phase: &'static str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let out = f();
        *self.times_ms.entry(phase).or_default() += start.elapsed().as_secs_f64() * 1e3;
        out
    }
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "iterations: {}", self.iterations)?;
        for (phase, ms) in &self.times_ms {
            writeln!(f, "time {phase}: {ms:.1} ms")?;
        }
        for (i, it) in self.per_iteration.iter().enumerate() {
            writeln!(
                f,
                "iteration {}: {} clauses, trace {}, remover {} states/{} transitions, refined to {} clauses",
                i + 1,
                it.clauses,
                it.trace,
                it.remover_states,
                it.remover_transitions,
                it.refined_clauses
            )?;
        }
        Ok(())
    }
}

/// The result of one pass of the loop on one program.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum Step {
    Safe {
        model: InterpretationModel,
    },
    /// `trace` is over the analysed program's ids.
    Unsafe {
        model: InterpretationModel,
        trace: TraceTerm,
        witness: Witness,
    },
    Refined {
        model: InterpretationModel,
        trace: TraceTerm,
        model_fta: TreeAutomaton,
        remover: TreeAutomaton,
        difference: TreeAutomaton,
        refined: Refined,
    },
}

/// Analyses `p` and, when a trace to `false` survives, either reports it or
/// removes it (with its generalisation) from the program.
pub fn step(p: &Program, engine: Engine, widen_delay: usize) -> Result<Step, Error> {
    step_timed(p, engine, widen_delay, &mut Stats::default(), None)
}

fn step_timed(
    p: &Program,
    engine: Engine,
    widen_delay: usize,
    stats: &mut Stats,
    deadline: Option<Instant>,
) -> Result<Step, Error> {
    let model = stats.time("analyze", || analyze(p, widen_delay));
    if !has_false(&model) {
        return Ok(Step::Safe { model });
    }
    let model_fta = stats.time("model_fta", || model_fta(p, &model));
    let Some(trace) = stats.time("search", || find_accepted(&model_fta)) else {
        return Ok(Step::Safe { model });
    };
    if let Feasibility::Feasible(witness) = stats.time("feasibility", || feasible(p, &trace))? {
        return Ok(Step::Unsafe {
            model,
            trace,
            witness,
        });
    }
    check_deadline(deadline)?;
    let remover = match engine {
        Engine::Rahft => singleton_fta(&trace),
        Engine::Rahit => stats.time("interpolation", || -> Result<_, Error> {
            let tree = and_tree(p, &trace)?;
            let ti = tree_interpolant(&tree)?;
            Ok(interpolant_automaton(p, &tree, &ti)?)
        })?,
    };
    check_deadline(deadline)?;
    let difference = stats.time("automata", || -> Result<_, Error> {
        Ok(determinise(&difference(&model_fta, &remover)?))
    })?;
    check_deadline(deadline)?;
    let refined = stats.time("generate", || generate_clauses(p, &difference))?;
    Ok(Step::Refined {
        model,
        trace,
        model_fta,
        remover,
        difference,
        refined,
    })
}

fn check_deadline(deadline: Option<Instant>) -> Result<(), Error> {
    match deadline {
        Some(d) if Instant::now() >= d => Err(Error::Timeout),
        _ => Ok(()),
    }
}

/// The verdict and statistics of a run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub verdict: Verdict,
    pub stats: Stats,
    /// The last program analysed.
    pub program: Program,
}

pub fn verify(p: &Program, options: &Options) -> Outcome {
    verify_with(p, options, |_, _, _| {})
}

/// As [`verify`], calling `observe(iteration, program, step)` after each pass.
pub fn verify_with(
    p: &Program,
    options: &Options,
    mut observe: impl FnMut(usize, &Program, &Step),
) -> Outcome {
    let deadline = options.timeout.map(|t| Instant::now() + t);
    let mut stats = Stats::default();
    let mut current = p.clone();
    let verdict = loop {
        let outcome = step_timed(
            &current,
            options.engine,
            options.widen_delay,
            &mut stats,
            deadline,
        );
        let s = match outcome {
            Ok(s) => s,
            Err(Error::Timeout) => break Verdict::Unknown(UnknownReason::Timeout),
            Err(e) => break Verdict::Unknown(UnknownReason::Internal(e.to_string())),
        };
        observe(stats.iterations, &current, &s);
        match s {
            Step::Safe { .. } => break Verdict::Safe,
            Step::Unsafe { trace, .. } => break replay(p, &current, &trace),
            Step::Refined {
                trace,
                model_fta,
                remover,
                difference,
                refined,
                ..
            } => {
                stats.per_iteration.push(IterationStats {
                    clauses: current.len(),
                    trace: trace.to_string(),
                    model_fta_transitions: model_fta.transitions().len(),
                    remover_states: remover.states().len(),
                    remover_transitions: remover.transitions().len(),
                    difference_states: difference.states().len(),
                    refined_clauses: refined.program.len(),
                });
                if stats.iterations == options.max_iter {
                    break Verdict::Unknown(UnknownReason::IterationLimit);
                }
                stats.iterations += 1;
                current = refined.program;
                if check_deadline(deadline).is_err() {
                    break Verdict::Unknown(UnknownReason::Timeout);
                }
            }
        }
    };
    Outcome {
        verdict,
        stats,
        program: current,
    }
}

/// Rewrites a trace of a refined program to the input program's ids.
pub fn to_original(current: &Program, trace: &TraceTerm) -> Result<TraceTerm, Error> {
    trace.map_symbols(&mut |id: &ClauseId| -> Result<ClauseId, Error> {
        Ok(current.clause_by_id(id)?.origin.clone())
    })
}

fn replay(original: &Program, current: &Program, trace: &TraceTerm) -> Verdict {
    let mapped = match to_original(current, trace) {
        Ok(t) => t,
        Err(e) => return Verdict::Unknown(UnknownReason::Internal(e.to_string())),
    };
    match feasible(original, &mapped) {
        Ok(Feasibility::Feasible(witness)) => Verdict::Unsafe {
            trace: mapped,
            witness,
        },
        Ok(Feasibility::Infeasible) => Verdict::Unknown(UnknownReason::Internal(format!(
            "trace {mapped} does not replay on the input program"
        ))),
        Err(e) => Verdict::Unknown(UnknownReason::Internal(e.to_string())),
    }
}
