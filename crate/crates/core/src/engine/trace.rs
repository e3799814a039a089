//! Plain-text trace dump, one line per chart per cycle.

use std::fmt::Write;

use super::{Executable, Phase, StepTrace};

fn join<I: IntoIterator<Item = String>>(items: I, sep: &str) -> String {
    items.into_iter().collect::<Vec<_>>().join(sep)
}

/// Renders one timed step: a header line with the injected in-events, then
/// one line per chart per cycle.
pub fn format_step(exec: &Executable, t: &StepTrace) -> String {
    let m = exec.model();
    let mut out = String::new();
    let env = join(t.env.iter().map(|&e| exec.event_name(e).to_string()), ",");
    let _ = writeln!(out, "step={} env=[{}]", t.step, env);
    for c in &t.cycles {
        let mut cycle = match c.phase {
            Phase::Normal => "normal".to_string(),
            Phase::Logic(i) => format!("logic:{i}"),
        };
        if let Some(slot) = c.slot {
            let _ = write!(cycle, "/{slot}");
        }
        for r in &c.charts {
            let chart = &m.charts[r.chart];
            let fired = match r.fired {
                Some(i) => {
                    let tr = &chart.transitions[i];
                    format!("{}->{}", tr.source, tr.target)
                }
                None => "-".to_string(),
            };
            let raised = join(r.raised.iter().map(|&e| exec.event_name(e).to_string()), ",");
            let vars = join(
                m.interface.variables.iter().zip(&r.vars).map(|(d, v)| format!("{}={v}", d.name)),
                ",",
            );
            let _ = writeln!(
                out,
                "step={} cycle={} chart={} fired={} raised=[{}] vars={{{}}}",
                t.step, cycle, chart.name, fired, raised, vars
            );
        }
    }
    out
}

pub fn format_trace(exec: &Executable, steps: &[StepTrace]) -> String {
    steps.iter().map(|t| format_step(exec, t)).collect()
}
