//! Explicit-state reachability checking over timed-step boundaries.
//!
//! The reachable state space is explored breadth first, so the trace
//! attached to a verdict is a shortest one: a counterexample for a failing
//! `A[]` query, a witness for a holding `E<>` query.

mod random;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::engine::{CExpr, EngineError, Executable, RuntimeState, StepTrace};
use crate::model::check_predicate;
use crate::query::{Query, QueryMode};

pub use random::{random_search, RandomSearch};

/// Default bound on explored states; `STATEPAT_STATE_LIMIT` overrides it.
pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

pub fn default_state_limit() -> usize {
    std::env::var("STATEPAT_STATE_LIMIT")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_STATE_LIMIT)
}

/// Which sets of in-events the environment may inject per timed step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvPolicy {
    /// No event, or exactly one.
    #[default]
    OneOrNone,
    /// Any subset of the in-events.
    Subset,
    /// No events at all.
    Closed,
}

impl EnvPolicy {
    /// Environment choices in exploration order. Every choice is sorted.
    pub fn choices(self, in_events: usize) -> Vec<Vec<usize>> {
        match self {
            EnvPolicy::Closed => vec![vec![]],
            EnvPolicy::OneOrNone => std::iter::once(vec![]).chain((0..in_events).map(|e| vec![e])).collect(),
            EnvPolicy::Subset => {
                assert!(in_events < 16, "subset policy supports at most 15 in-events");
                (0u32..1 << in_events)
                    .map(|mask| (0..in_events).filter(|e| mask & (1 << e) != 0).collect())
                    .collect()
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvPolicy::OneOrNone => "one-or-none",
            EnvPolicy::Subset => "subset",
            EnvPolicy::Closed => "closed",
        }
    }
}

impl fmt::Display for EnvPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "one-or-none" => Ok(EnvPolicy::OneOrNone),
            "subset" => Ok(EnvPolicy::Subset),
            "closed" => Ok(EnvPolicy::Closed),
            _ => Err(format!("unknown environment policy `{s}` (one-or-none, subset, closed)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("state limit of {limit} states exceeded")]
    StateLimit { limit: usize },
    #[error("invalid query: {0}")]
    Query(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// The explored state space.
#[derive(Debug, Clone)]
pub struct StateGraph {
    policy: EnvPolicy,
    states: Vec<RuntimeState>,
    /// BFS tree edge into each state: predecessor and environment choice.
    parent: Vec<Option<(usize, usize)>>,
    choices: Vec<Vec<usize>>,
    transitions: usize,
    depth: usize,
    frontier_peak: usize,
    elapsed: Duration,
}

impl StateGraph {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Largest number of discovered but unexpanded states.
    pub fn frontier_peak(&self) -> usize {
        self.frontier_peak
    }

    pub fn policy(&self) -> EnvPolicy {
        self.policy
    }

    pub fn states(&self) -> &[RuntimeState] {
        &self.states
    }

    /// Environment choices leading from the initial state to state `i`.
    pub fn path_to(&self, mut i: usize) -> Vec<Vec<usize>> {
        let mut env = Vec::new();
        while let Some((p, c)) = self.parent[i] {
            env.push(self.choices[c].clone());
            i = p;
        }
        env.reverse();
        env
    }
}

/// Explores every state reachable from the initial one under `policy`.
pub fn explore(exec: &Executable, policy: EnvPolicy, limit: usize) -> Result<StateGraph, VerifyError> {
    let choices = policy.choices(exec.in_event_count());
    let init = exec.init_session();
    let mut index = HashMap::new();
    index.insert(init.key(), 0usize);
    let mut g = StateGraph {
        policy,
        states: vec![init],
        parent: vec![None],
        choices,
        transitions: 0,
        depth: 0,
        frontier_peak: 1,
        elapsed: Duration::ZERO,
    };
    let started = Instant::now();
    let mut level_end = 1;
    let mut i = 0;
    while i < g.states.len() {
        if i == level_end {
            g.depth += 1;
            level_end = g.states.len();
        }
        for c in 0..g.choices.len() {
            let mut next = g.states[i].clone();
            exec.timed_step_in_place(&mut next, &g.choices[c], false)?;
            g.transitions += 1;
            let key = next.key();
            if index.contains_key(&key) {
                continue;
            }
            if g.states.len() >= limit {
                return Err(VerifyError::StateLimit { limit });
            }
            index.insert(key, g.states.len());
            g.states.push(next);
            g.parent.push(Some((i, c)));
        }
        i += 1;
        g.frontier_peak = g.frontier_peak.max(g.states.len() - i);
    }
    g.elapsed = started.elapsed();
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub states: usize,
    pub transitions: usize,
    pub depth: usize,
    pub frontier_peak: usize,
    /// Exploration wall time; the only non-deterministic field.
    pub wall_ms: u64,
}

/// A concrete run: the in-events injected at each timed step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub env: Vec<Vec<usize>>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.env.len()
    }

    pub fn is_empty(&self) -> bool {
        self.env.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationResult {
    pub query: String,
    pub holds: bool,
    /// Counterexample or witness, when one exists.
    pub trace: Option<Trace>,
    pub stats: Stats,
}

pub(crate) fn compile_query(exec: &Executable, q: &Query) -> Result<CExpr, VerifyError> {
    check_predicate(exec.model(), &q.pred).map_err(VerifyError::Query)?;
    Ok(exec.compile_predicate(&q.pred))
}

/// Decides `q` on an explored state graph.
pub fn check_on(exec: &Executable, g: &StateGraph, q: &Query) -> Result<VerificationResult, VerifyError> {
    let pred = compile_query(exec, q)?;
    // First state in BFS order where the predicate is true (E<>) or false (A[]).
    let want = q.mode == QueryMode::ExistsEventually;
    let hit = g.states.iter().position(|s| exec.holds(&pred, s) == want);
    let holds = hit.is_some() == want;
    Ok(VerificationResult {
        query: q.to_string(),
        holds,
        trace: hit.map(|i| Trace { env: g.path_to(i) }),
        stats: Stats {
            states: g.state_count(),
            transitions: g.transitions,
            depth: g.depth,
            frontier_peak: g.frontier_peak,
            wall_ms: g.elapsed.as_millis() as u64,
        },
    })
}

/// Explores the model and decides `q`.
pub fn check_query(
    exec: &Executable,
    q: &Query,
    policy: EnvPolicy,
    limit: usize,
) -> Result<VerificationResult, VerifyError> {
    compile_query(exec, q)?;
    let g = explore(exec, policy, limit)?;
    check_on(exec, &g, q)
}

/// Re-executes a trace from the initial state, returning the per-step
/// records and the final state.
pub fn replay(exec: &Executable, trace: &Trace) -> Result<(Vec<StepTrace>, RuntimeState), EngineError> {
    let mut s = exec.init_session();
    let mut steps = Vec::with_capacity(trace.len());
    for env in &trace.env {
        let t = exec.timed_step_in_place(&mut s, env, true)?.expect("recording requested");
        steps.push(t);
    }
    Ok((steps, s))
}

/// Whether `q`'s predicate holds in `s`.
pub fn eval_predicate(exec: &Executable, q: &Query, s: &RuntimeState) -> Result<bool, VerifyError> {
    let pred = compile_query(exec, q)?;
    Ok(exec.holds(&pred, s))
}
