//! JSON views of sessions and traces. Keys are model identifiers verbatim.

use serde_json::{json, Map, Value};

use statepat::engine::{Executable, Phase, RuntimeState, Session, StepTrace};

use crate::ApiResult;

fn state_json(exec: &Executable, s: &RuntimeState) -> Value {
    let m = exec.model();
    let active: Map<String, Value> = (0..exec.chart_count())
        .map(|c| (m.charts[c].name.clone(), json!(exec.active_state_name(s, c))))
        .collect();
    let vars: Map<String, Value> =
        m.interface.variables.iter().zip(&s.vars).map(|(d, v)| (d.name.clone(), json!(v))).collect();
    let queue: Vec<Value> = s
        .pattern
        .events()
        .iter()
        .zip(s.pattern.senders())
        .map(|(&e, &from)| json!({ "event": m.event_name(e), "sender": from }))
        .collect();
    json!({
        "v": 1,
        "clock": s.clock,
        "active": active,
        "vars": vars,
        "queue": queue,
        "exe": s.pattern.exe(),
        "token": s.pattern.token(),
    })
}

/// Snapshot of a session: current state plus events queued for the next step.
pub fn snapshot(session: &Session) -> Value {
    let mut v = state_json(session.executable(), session.state());
    v["pending"] = json!(session.pending().collect::<Vec<_>>());
    v
}

/// One timed step with its cycles.
pub fn step_json(exec: &Executable, t: &StepTrace) -> Value {
    let m = exec.model();
    let names = |evs: &[usize]| evs.iter().map(|&e| exec.event_name(e).to_string()).collect::<Vec<_>>();
    let cycles: Vec<Value> = t
        .cycles
        .iter()
        .map(|c| {
            let phase = match c.phase {
                Phase::Normal => "normal".to_string(),
                Phase::Logic(i) => format!("logic:{i}"),
            };
            let charts: Vec<Value> = c
                .charts
                .iter()
                .map(|r| {
                    let chart = &m.charts[r.chart];
                    let fired = r.fired.map(|i| {
                        let tr = &chart.transitions[i];
                        format!("{}->{}", tr.source, tr.target)
                    });
                    let vars: Map<String, Value> = m
                        .interface
                        .variables
                        .iter()
                        .zip(&r.vars)
                        .map(|(d, v)| (d.name.clone(), json!(v)))
                        .collect();
                    json!({ "chart": chart.name, "fired": fired, "raised": names(&r.raised), "vars": vars })
                })
                .collect();
            json!({ "phase": phase, "slot": c.slot, "charts": charts })
        })
        .collect();
    json!({ "step": t.step, "env": names(&t.env), "cycles": cycles })
}

/// A replayed trace as a list of steps, each with the state reached.
pub(crate) fn replay_json(exec: &Executable, steps: &[StepTrace]) -> ApiResult<Vec<Value>> {
    let mut s = exec.init_session();
    let mut out = Vec::with_capacity(steps.len());
    for t in steps {
        exec.timed_step_in_place(&mut s, &t.env, false)
            .map_err(|e| crate::ApiError::new(axum::http::StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
        out.push(json!({ "env": t.env.iter().map(|&e| exec.event_name(e)).collect::<Vec<_>>(), "snapshot": state_json(exec, &s) }));
    }
    Ok(out)
}
