//! Source-to-source model transformations that apply the communication
//! pattern (`twc`) and the execution-order pattern (`ceo`).

use crate::model::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("input model is invalid: {}", .0.first().map(ToString::to_string).unwrap_or_default())]
    InvalidInput(Vec<Diagnostic>),
    #[error("the {0} pattern is already applied")]
    AlreadyApplied(&'static str),
    #[error("the {0} pattern needs more charts, found {1}")]
    TooFewCharts(&'static str, usize),
    #[error("the twc pattern cannot be applied to a model that already has a manager chart")]
    HasManager,
    #[error("invalid execution order: {0}")]
    BadOrder(String),
    #[error("name `{0}` is already declared")]
    NameClash(String),
}

const MANAGER: &str = "Manager";
const CYCLE_VAR: &str = "cycleNum";

fn check_input(m: &Model) -> Result<(), PatternError> {
    let diags = validate_model(m);
    if diags.is_empty() {
        Ok(())
    } else {
        Err(PatternError::InvalidInput(diags))
    }
}

fn and(l: Option<Expr>, r: Expr) -> Expr {
    match l {
        Some(l) => Expr::and(l, r),
        None => r,
    }
}

fn int(n: impl Into<i64>) -> Expr {
    Expr::Int(n.into())
}

fn manager_chart(states: Vec<String>, transitions: Vec<(usize, usize, Vec<Action>)>) -> Statechart {
    let transitions = transitions
        .into_iter()
        .map(|(s, t, actions)| Transition {
            source: states[s].clone(),
            target: states[t].clone(),
            trigger: None,
            guard: None,
            actions,
            loc: Loc::default(),
        })
        .collect();
    Statechart {
        id: 1,
        name: MANAGER.to_string(),
        manager: true,
        initial: states[0].clone(),
        states: states.into_iter().map(|name| StateDecl { name, loc: Loc::default() }).collect(),
        transitions,
        loc: Loc::default(),
    }
}

fn init_queue_action(n: usize) -> Action {
    Action::Assign {
        var: CYCLE_VAR.to_string(),
        value: Expr::call(Native::TwcInitEventQueue, vec![int(n as i64), Expr::Var(CYCLE_VAR.into())]),
    }
}

fn update_exe_action(k: usize) -> Action {
    Action::Call { name: Native::CeoUpdateExeInfo.name().into(), args: vec![int(k as i64)] }
}

/// Applies the communication pattern.
///
/// A Manager chart with priority 1 is added; user charts move down by one.
/// Each timed step then runs one normal cycle plus one logic cycle per
/// remaining chart, so an event raised by a low-priority chart still reaches
/// a higher-priority receiver in the same step.
///
/// * `raise e` in chart `s` becomes `TWC.push(id(e), s)`.
/// * A transition triggered by internal event `e` in chart `r` loses its
///   trigger and is guarded by `TWC.pop(id(e), r)`.
/// * Every other transition is restricted to normal cycles with
///   `TWC.isNormalExe()`.
pub fn apply_twc(m: &Model) -> Result<Model, PatternError> {
    check_input(m)?;
    if m.patterns.twc {
        return Err(PatternError::AlreadyApplied("twc"));
    }
    if m.manager().is_some() {
        return Err(PatternError::HasManager);
    }
    if m.charts.len() < 2 {
        return Err(PatternError::TooFewCharts("twc", m.charts.len()));
    }
    if m.chart(MANAGER).is_some() {
        return Err(PatternError::NameClash(MANAGER.into()));
    }
    if m.variable(CYCLE_VAR).is_some() {
        return Err(PatternError::NameClash(CYCLE_VAR.into()));
    }

    let mut out = m.clone();
    let n = m.charts.len() + 1;
    out.patterns.twc = true;
    out.interface.variables.push(VarDecl {
        name: CYCLE_VAR.into(),
        min: 0,
        max: n as i64 - 1,
        initial: 0,
        loc: Loc::default(),
    });
    if let Some(order) = &mut out.interface.exe_orders {
        order.iter_mut().for_each(|id| *id += 1);
    }
    let normal = || Expr::call(Native::TwcIsNormalExe, vec![]);
    for chart in &mut out.charts {
        chart.id += 1;
        let me = int(chart.id);
        for t in &mut chart.transitions {
            for a in &mut t.actions {
                if let Action::Raise(e) = a {
                    let id = m.event_id(e).expect("validated event");
                    *a = Action::Call {
                        name: Native::TwcPush.name().into(),
                        args: vec![int(id), me.clone()],
                    };
                }
            }
            let guard = t.guard.take();
            t.guard = Some(match &t.trigger {
                Some(Trigger::Event(e)) if m.is_internal_event(e) => {
                    let id = m.event_id(e).expect("validated event");
                    let pop = Expr::call(Native::TwcPop, vec![int(id), me.clone()]);
                    t.trigger = None;
                    match guard {
                        Some(g) => Expr::and(pop, g),
                        None => pop,
                    }
                }
                _ => and(guard, normal()),
            });
        }
    }
    out.charts.insert(0, manager_chart(vec!["Run".into()], vec![(0, 0, vec![init_queue_action(n)])]));
    Ok(out)
}

/// Resolves chart names to the execution order of `m`, in `m`'s IDs.
pub fn order_by_names(m: &Model, names: &[String]) -> Result<Vec<u32>, PatternError> {
    names
        .iter()
        .map(|n| match m.chart(n) {
            Some(c) if !c.manager => Ok(c.id),
            Some(_) => Err(PatternError::BadOrder(format!("`{n}` is the manager chart"))),
            None => Err(PatternError::BadOrder(format!("no chart named `{n}`"))),
        })
        .collect()
}

/// Reads an order given as chart names or priority IDs of `m`, mixed
/// freely, and returns chart names.
pub fn order_names(m: &Model, items: &[String]) -> Result<Vec<String>, PatternError> {
    items
        .iter()
        .map(|item| {
            let item = item.trim();
            match item.parse::<u32>() {
                Ok(id) => m
                    .chart_by_id(id)
                    .map(|c| c.name.clone())
                    .ok_or_else(|| PatternError::BadOrder(format!("no chart with ID {id}"))),
                Err(_) => Ok(item.to_string()),
            }
        })
        .collect()
}

/// Applies the execution-order pattern.
///
/// `order` lists user chart names from first to last; `None` keeps the
/// model's `order` declaration or, failing that, priority order. Each timed
/// step is split into one sub-cycle per user chart and only the chart whose
/// turn it is may fire in a sub-cycle.
///
/// On a model that already carries the communication pattern, the existing
/// Manager becomes a ring of one state per sub-cycle, and queue sender and
/// receiver IDs are replaced by the charts' positions in the execution order
/// so that communication follows the configured order.
pub fn apply_ceo(m: &Model, order: Option<&[String]>) -> Result<Model, PatternError> {
    check_input(m)?;
    if m.patterns.ceo {
        return Err(PatternError::AlreadyApplied("ceo"));
    }
    let k = m.user_charts().count();
    if k == 0 {
        return Err(PatternError::TooFewCharts("ceo", k));
    }
    let order = match order {
        Some(names) => order_by_names(m, names)?,
        None => m.effective_order(),
    };
    let mut sorted = order.clone();
    sorted.sort_unstable();
    let expected: Vec<u32> = m.user_charts().map(|c| c.id).collect();
    if sorted != expected {
        let names: Vec<&str> = m.user_charts().map(|c| c.name.as_str()).collect();
        return Err(PatternError::BadOrder(format!(
            "must name every chart of {names:?} exactly once"
        )));
    }

    let mut out = m.clone();
    out.patterns.ceo = true;
    let shift = u32::from(m.manager().is_none());
    if shift == 1 && m.chart(MANAGER).is_some() {
        return Err(PatternError::NameClash(MANAGER.into()));
    }
    out.interface.exe_orders = Some(order.iter().map(|id| id + shift).collect());

    let rank = |e: Expr| Expr::call(Native::CeoRank, vec![e]);
    for chart in out.charts.iter_mut().filter(|c| !c.manager) {
        chart.id += shift;
        let run = Expr::call(Native::CeoRun, vec![int(chart.id)]);
        for t in &mut chart.transitions {
            if m.patterns.twc {
                for a in &mut t.actions {
                    if let Action::Call { name, args } = a {
                        if name == Native::TwcPush.name() {
                            args[1] = rank(args[1].clone());
                        }
                    }
                }
                if let Some(g) = &mut t.guard {
                    rewrite_pop(g, &rank);
                }
            }
            t.guard = Some(and(t.guard.take(), run.clone()));
        }
    }

    if m.patterns.twc {
        let n = m.charts.len();
        let states: Vec<String> = (1..=k).map(|i| format!("Slot{i}")).collect();
        let ring = (0..k)
            .map(|i| {
                let mut actions = Vec::new();
                if i == 0 {
                    actions.push(init_queue_action(n));
                }
                actions.push(update_exe_action(k));
                (i, (i + 1) % k, actions)
            })
            .collect();
        out.charts[0] = manager_chart(states, ring);
    } else {
        out.charts.insert(0, manager_chart(vec!["Run".into()], vec![(0, 0, vec![update_exe_action(k)])]));
    }
    Ok(out)
}

fn rewrite_pop(e: &mut Expr, rank: &impl Fn(Expr) -> Expr) {
    match e {
        Expr::Call { name, args } => {
            if name == Native::TwcPop.name() {
                args[1] = rank(args[1].clone());
            }
        }
        Expr::Unary(_, i) => rewrite_pop(i, rank),
        Expr::Binary(_, l, r) => {
            rewrite_pop(l, rank);
            rewrite_pop(r, rank);
        }
        _ => {}
    }
}

/// Applies the communication pattern, then the execution-order pattern.
pub fn apply_both(m: &Model, order: Option<&[String]>) -> Result<Model, PatternError> {
    apply_ceo(&apply_twc(m)?, order)
}

/// Pattern selection as offered on the command line and over HTTP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    Twc,
    Ceo,
    Both,
}

impl std::str::FromStr for Pattern {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "twc" => Ok(Pattern::Twc),
            "ceo" => Ok(Pattern::Ceo),
            "both" => Ok(Pattern::Both),
            _ => Err(format!("unknown pattern `{s}` (twc, ceo, both)")),
        }
    }
}

impl Pattern {
    pub fn name(self) -> &'static str {
        match self {
            Pattern::Twc => "twc",
            Pattern::Ceo => "ceo",
            Pattern::Both => "both",
        }
    }

    /// Whether the pattern consumes an execution order.
    pub fn has_order(self) -> bool {
        self != Pattern::Twc
    }

    /// Applies the selected pattern(s). `order` items may be chart names or
    /// priority IDs of `m`.
    pub fn apply(self, m: &Model, order: Option<&[String]>) -> Result<Model, PatternError> {
        let order = order.map(|o| order_names(m, o)).transpose()?;
        match (self, order) {
            (Pattern::Twc, Some(_)) => {
                Err(PatternError::BadOrder("an execution order needs the ceo or both pattern".into()))
            }
            (Pattern::Twc, None) => apply_twc(m),
            (Pattern::Ceo, o) => apply_ceo(m, o.as_deref()),
            (Pattern::Both, o) => apply_both(m, o.as_deref()),
        }
    }
}
