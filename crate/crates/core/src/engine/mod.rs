//! Deterministic interpreter for prioritized synchronous statecharts.
//!
//! One *execution cycle* visits the charts in ascending priority-ID order.
//! Each chart fires at most one transition: the first outgoing transition of
//! its active state, in declaration order, whose trigger is present and whose
//! guard holds. An event raised during a cycle is visible only to charts that
//! have not run yet in that cycle and is discarded when the cycle ends.
//!
//! One *timed step* is one second of model time. It runs the cycles the
//! applied patterns call for (see [`Executable::schedule`]), then advances the
//! clock and the per-chart timers. Environment events are offered to the
//! normal-phase cycles only.

mod compile;
mod trace;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::model::{validate_model, BinOp, Diagnostic, Model, Native};
use crate::patterns::runtime::{ContractError, PatternRuntime};
pub(crate) use compile::CExpr;
use compile::{CAction, CChart, CTrigger, Names};
pub use trace::{format_step, format_trace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("model is invalid:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    InvalidModel(Vec<Diagnostic>),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("`{0}` is not an in-event and cannot be injected")]
    NotAnInEvent(String),
    #[error("runtime contract violated: {0}")]
    Contract(#[from] ContractError),
}

/// Which pattern phase a cycle belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "index")]
pub enum Phase {
    Normal,
    /// Zero-time re-delivery cycle, numbered from 1.
    Logic(u32),
}

/// Everything a chart did in one cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChartRecord {
    pub chart: usize,
    /// Index of the fired transition in the chart's declaration list.
    pub fired: Option<usize>,
    /// Events raised or queued by the fired transition.
    pub raised: Vec<usize>,
    /// Variable valuation after the chart ran.
    pub vars: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleRecord {
    pub phase: Phase,
    /// 1-based execution-order sub-cycle when the order pattern is applied.
    pub slot: Option<u32>,
    pub charts: Vec<ChartRecord>,
}

impl CycleRecord {
    pub fn fired(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.charts.iter().filter_map(|c| c.fired.map(|t| (c.chart, t)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepTrace {
    /// 1-based step number (the clock value after the step).
    pub step: u64,
    /// Injected in-events, as event indices.
    pub env: Vec<usize>,
    pub cycles: Vec<CycleRecord>,
}

/// Complete execution snapshot at a timed-step boundary.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuntimeState {
    /// Active state index per chart, in chart order.
    pub active: Vec<usize>,
    pub vars: Vec<i64>,
    /// Whole steps spent in the active state, saturated at the chart's
    /// largest `after` duration.
    pub timers: Vec<u32>,
    pub pattern: PatternRuntime,
    pub clock: u64,
}

/// Hashable identity of a [`RuntimeState`] without the clock, which only
/// ever grows and carries no behavior.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateKey {
    active: Vec<usize>,
    vars: Vec<i64>,
    timers: Vec<u32>,
    pattern: PatternRuntime,
}

impl RuntimeState {
    pub fn key(&self) -> StateKey {
        StateKey {
            active: self.active.clone(),
            vars: self.vars.clone(),
            timers: self.timers.clone(),
            pattern: self.pattern.clone(),
        }
    }
}

/// A validated model lowered for execution.
#[derive(Debug, Clone)]
pub struct Executable {
    model: Arc<Model>,
    charts: Vec<CChart>,
    phases: u32,
    slots: u32,
    capacity: usize,
}

struct Cycle<'a> {
    env: &'a [usize],
    raised_now: Vec<(usize, usize)>,
}

impl Executable {
    pub fn new(model: Model) -> Result<Self, EngineError> {
        Self::from_arc(Arc::new(model))
    }

    pub fn from_arc(model: Arc<Model>) -> Result<Self, EngineError> {
        let diags = validate_model(&model);
        if !diags.is_empty() {
            return Err(EngineError::InvalidModel(diags));
        }
        let names = Names { model: &model };
        let charts = model.charts.iter().map(|c| names.chart(c)).collect();
        let phases = if model.patterns.twc { model.charts.len() as u32 } else { 1 };
        let slots = if model.patterns.ceo { model.user_charts().count().max(1) as u32 } else { 1 };
        let capacity = model.raise_action_count() * phases as usize;
        Ok(Executable { model, charts, phases, slots, capacity })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn model_arc(&self) -> &Arc<Model> {
        &self.model
    }

    /// `(phases, slots)`: one timed step runs `phases` pattern phases (one
    /// normal, the rest logic), each made of `slots` execution-order
    /// sub-cycles.
    pub fn schedule(&self) -> (u32, u32) {
        (self.phases, self.slots)
    }

    pub fn queue_capacity(&self) -> usize {
        self.capacity
    }

    pub fn chart_count(&self) -> usize {
        self.charts.len()
    }

    pub fn in_event_index(&self, name: &str) -> Result<usize, EngineError> {
        let idx = self
            .model
            .events()
            .position(|e| e.name == name)
            .ok_or_else(|| EngineError::UnknownEvent(name.to_string()))?;
        if idx >= self.model.interface.in_events.len() {
            return Err(EngineError::NotAnInEvent(name.to_string()));
        }
        Ok(idx)
    }

    pub fn event_name(&self, idx: usize) -> &str {
        &self.model.events().nth(idx).expect("event index in range").name
    }

    pub fn in_event_count(&self) -> usize {
        self.model.interface.in_events.len()
    }

    pub fn init_session(&self) -> RuntimeState {
        let m = &self.model;
        let order = if m.patterns.ceo {
            m.effective_order().into_iter().map(i64::from).collect()
        } else {
            Vec::new()
        };
        RuntimeState {
            active: self.charts.iter().map(|c| c.initial).collect(),
            vars: m.interface.variables.iter().map(|v| v.initial).collect(),
            timers: vec![0; self.charts.len()],
            pattern: PatternRuntime::new(self.capacity, order),
            clock: 0,
        }
    }

    /// Runs one execution cycle in place. `env` lists the in-events offered
    /// to this cycle.
    pub fn run_cycle(
        &self,
        s: &mut RuntimeState,
        env: &[usize],
        phase: Phase,
        slot: Option<u32>,
        record: bool,
    ) -> Result<Option<CycleRecord>, EngineError> {
        let mut cycle = Cycle { env, raised_now: Vec::new() };
        let mut rec = record.then(|| CycleRecord { phase, slot, charts: Vec::with_capacity(self.charts.len()) });
        for ci in 0..self.charts.len() {
            let (fired, raised) = self.run_chart(s, ci, &mut cycle, record)?;
            if let Some(r) = rec.as_mut() {
                r.charts.push(ChartRecord { chart: ci, fired, raised, vars: s.vars.clone() });
            }
        }
        Ok(rec)
    }

    fn run_chart(
        &self,
        s: &mut RuntimeState,
        ci: usize,
        cycle: &mut Cycle<'_>,
        record: bool,
    ) -> Result<(Option<usize>, Vec<usize>), EngineError> {
        let chart = &self.charts[ci];
        for t in &chart.outgoing[s.active[ci]] {
            let triggered = match t.trigger {
                CTrigger::None => true,
                CTrigger::Event(e) => {
                    cycle.env.contains(&e) || cycle.raised_now.iter().any(|&(r, _)| r == e)
                }
                CTrigger::After(k) => s.timers[ci] >= k,
            };
            if !triggered {
                continue;
            }
            if let Some(g) = &t.guard {
                if eval(g, &mut ReadOnly(s))? == 0 {
                    continue;
                }
            }
            let mut raised = Vec::new();
            for a in &t.actions {
                match a {
                    CAction::Assign(v, e) => {
                        let value = eval(e, s)?;
                        let decl = &self.model.interface.variables[*v];
                        s.vars[*v] = value.clamp(decl.min, decl.max);
                    }
                    CAction::Raise(e) => {
                        cycle.raised_now.push((*e, ci));
                        if record {
                            raised.push(*e);
                        }
                    }
                    CAction::Native(n, args) => {
                        if *n == Native::TwcPush && record {
                            if let Some(CExpr::Int(id)) = args.first() {
                                raised.push(*id as usize - 1);
                            }
                        }
                        call_native(*n, args, s)?;
                    }
                }
            }
            s.active[ci] = t.target;
            s.timers[ci] = 0;
            return Ok((Some(t.decl), raised));
        }
        Ok((None, Vec::new()))
    }

    /// Advances `s` by one timed step, offering `env` to the normal phase.
    pub fn timed_step_in_place(
        &self,
        s: &mut RuntimeState,
        env: &[usize],
        record: bool,
    ) -> Result<Option<StepTrace>, EngineError> {
        let mut trace = record.then(|| StepTrace {
            step: s.clock + 1,
            env: env.to_vec(),
            cycles: Vec::with_capacity((self.phases * self.slots) as usize),
        });
        let ceo = self.model.patterns.ceo;
        for p in 0..self.phases {
            let phase = if p == 0 { Phase::Normal } else { Phase::Logic(p) };
            let offered: &[usize] = if p == 0 { env } else { &[] };
            for k in 0..self.slots {
                let slot = ceo.then_some(k + 1);
                let rec = self.run_cycle(s, offered, phase, slot, record)?;
                if let (Some(t), Some(r)) = (trace.as_mut(), rec) {
                    t.cycles.push(r);
                }
            }
        }
        s.clock += 1;
        for (t, c) in s.timers.iter_mut().zip(&self.charts) {
            *t = (*t + 1).min(c.timer_cap);
        }
        Ok(trace)
    }

    pub fn timed_step(
        &self,
        s: &RuntimeState,
        env: &[usize],
    ) -> Result<(RuntimeState, StepTrace), EngineError> {
        let mut next = s.clone();
        let trace = self.timed_step_in_place(&mut next, env, true)?.expect("recording requested");
        Ok((next, trace))
    }

    /// Evaluates a boolean query predicate (compiled with
    /// [`Executable::compile_predicate`]) on a state.
    pub(crate) fn holds(&self, pred: &CExpr, s: &RuntimeState) -> bool {
        eval(pred, &mut ReadOnly(s)).map(|v| v != 0).unwrap_or(false)
    }

    pub(crate) fn compile_predicate(&self, pred: &crate::model::Expr) -> CExpr {
        Names { model: &self.model }.expr(pred)
    }

    pub fn active_state_name(&self, s: &RuntimeState, chart: usize) -> &str {
        &self.model.charts[chart].states[s.active[chart]].name
    }
}

fn truth(b: bool) -> i64 {
    b as i64
}

/// Read access to a state plus native dispatch. Guards and predicates are
/// evaluated through [`ReadOnly`], which rejects mutating natives.
pub(crate) trait Store {
    fn state(&self) -> &RuntimeState;
    fn native(&mut self, n: Native, args: [i64; 2]) -> Result<i64, EngineError>;
}

impl Store for RuntimeState {
    fn state(&self) -> &RuntimeState {
        self
    }

    fn native(&mut self, n: Native, [a, b]: [i64; 2]) -> Result<i64, EngineError> {
        let rt = &mut self.pattern;
        Ok(match n {
            Native::TwcInitEventQueue => rt.init_event_queue(a, b)?,
            Native::TwcPush => {
                rt.push(a, b)?;
                0
            }
            Native::CeoUpdateExeInfo => rt.update_exe_info(a)?,
            _ => return ReadOnly(self).native(n, [a, b]),
        })
    }
}

pub(crate) struct ReadOnly<'a>(pub &'a RuntimeState);

impl Store for ReadOnly<'_> {
    fn state(&self) -> &RuntimeState {
        self.0
    }

    fn native(&mut self, n: Native, [a, b]: [i64; 2]) -> Result<i64, EngineError> {
        let rt = &self.0.pattern;
        Ok(match n {
            Native::TwcPop => truth(rt.pop(a, b)),
            Native::TwcIsNormalExe => truth(rt.is_normal_exe()),
            Native::CeoRun => truth(rt.run(a)?),
            Native::CeoRank => rt.rank(a),
            Native::TwcInitEventQueue | Native::TwcPush | Native::CeoUpdateExeInfo => {
                unreachable!("validation keeps mutating natives out of guards and predicates")
            }
        })
    }
}

/// Evaluates an expression. Booleans are 0/1; arithmetic saturates.
pub(crate) fn eval<S: Store>(e: &CExpr, s: &mut S) -> Result<i64, EngineError> {
    Ok(match e {
        CExpr::Int(n) => *n,
        CExpr::Bool(b) => truth(*b),
        CExpr::Var(v) => s.state().vars[*v],
        CExpr::Atom(c, st) => truth(s.state().active[*c] == *st),
        CExpr::Not(i) => truth(eval(i, s)? == 0),
        CExpr::Neg(i) => eval(i, s)?.saturating_neg(),
        CExpr::Binary(op, l, r) => {
            let lv = eval(l, s)?;
            match op {
                BinOp::And if lv == 0 => return Ok(0),
                BinOp::Or if lv != 0 => return Ok(1),
                BinOp::Imply if lv == 0 => return Ok(1),
                _ => {}
            }
            let rv = eval(r, s)?;
            match op {
                BinOp::Add => lv.saturating_add(rv),
                BinOp::Sub => lv.saturating_sub(rv),
                BinOp::Mul => lv.saturating_mul(rv),
                BinOp::Lt => truth(lv < rv),
                BinOp::Le => truth(lv <= rv),
                BinOp::Eq => truth(lv == rv),
                BinOp::Ne => truth(lv != rv),
                BinOp::Ge => truth(lv >= rv),
                BinOp::Gt => truth(lv > rv),
                BinOp::And | BinOp::Or | BinOp::Imply => truth(rv != 0),
            }
        }
        CExpr::Native(n, args) => call_native(*n, args, s)?,
    })
}

fn call_native<S: Store>(n: Native, args: &[CExpr], s: &mut S) -> Result<i64, EngineError> {
    let mut vals = [0i64; 2];
    for (slot, a) in vals.iter_mut().zip(args) {
        *slot = eval(a, s)?;
    }
    s.native(n, vals)
}

/// Convenience wrapper: validate, lower and return the initial state.
pub fn init_session(m: &Model) -> Result<(Executable, RuntimeState), EngineError> {
    let exec = Executable::new(m.clone())?;
    let s = exec.init_session();
    Ok((exec, s))
}

/// An interactive run: a current state plus in-events queued for the next
/// step.
#[derive(Debug, Clone)]
pub struct Session {
    exec: Arc<Executable>,
    state: RuntimeState,
    pending: BTreeSet<usize>,
}

impl Session {
    pub fn new(exec: Arc<Executable>) -> Self {
        let state = exec.init_session();
        Session { exec, state, pending: BTreeSet::new() }
    }

    pub fn executable(&self) -> &Executable {
        &self.exec
    }

    pub fn state(&self) -> &RuntimeState {
        &self.state
    }

    pub fn pending(&self) -> impl Iterator<Item = &str> + '_ {
        self.pending.iter().map(|&e| self.exec.event_name(e))
    }

    /// Queues an in-event for the next step. Injecting the same event twice
    /// before a step delivers it once.
    pub fn inject_event(&mut self, name: &str) -> Result<(), EngineError> {
        let idx = self.exec.in_event_index(name)?;
        self.pending.insert(idx);
        Ok(())
    }

    pub fn step(&mut self) -> Result<StepTrace, EngineError> {
        let env: Vec<usize> = std::mem::take(&mut self.pending).into_iter().collect();
        let trace = self
            .exec
            .timed_step_in_place(&mut self.state, &env, true)?
            .expect("recording requested");
        Ok(trace)
    }
}

#[cfg(test)]
mod tests;
