//! Statechart system data model.
//!
//! A [`Model`] is a set of flat statecharts that run in ascending priority-ID
//! order inside every execution cycle, plus the interface they share: events,
//! bounded integer variables and (for pattern-transformed models) the native
//! runtime functions of the two-way communication and execution-order
//! interfaces.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Position of a construct in model or query text. Lines and columns are
/// 1-based; `length` counts characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32) -> Self {
        Self { line, column, length }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Optional source location attached to model elements.
///
/// Locations never participate in equality or hashing: two models that differ
/// only in where their elements were written compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Loc(pub Option<SourceSpan>);

impl Loc {
    pub const NONE: Loc = Loc(None);

    pub fn at(span: SourceSpan) -> Self {
        Loc(Some(span))
    }
}

impl PartialEq for Loc {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Loc {}

impl std::hash::Hash for Loc {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

/// Which model patterns have been applied. Doubles as the re-application
/// guard for the transformers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PatternSet {
    pub twc: bool,
    pub ceo: bool,
}

impl PatternSet {
    pub fn is_empty(&self) -> bool {
        !self.twc && !self.ceo
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub name: String,
    pub interface: InterfaceDecl,
    /// Sorted by ascending priority ID (lower ID = higher priority).
    pub charts: Vec<Statechart>,
    pub patterns: PatternSet,
    pub loc: Loc,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InterfaceDecl {
    pub in_events: Vec<EventDecl>,
    pub internal_events: Vec<EventDecl>,
    pub variables: Vec<VarDecl>,
    /// Configured execution order (chart IDs, first executes first).
    pub exe_orders: Option<Vec<u32>>,
    pub exe_orders_loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventDecl {
    pub name: String,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub min: i64,
    pub max: i64,
    pub initial: i64,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statechart {
    pub id: u32,
    pub name: String,
    pub manager: bool,
    pub states: Vec<StateDecl>,
    pub initial: String,
    /// Declaration order is the firing priority within the chart.
    pub transitions: Vec<Transition>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDecl {
    pub name: String,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: String,
    pub target: String,
    pub trigger: Option<Trigger>,
    pub guard: Option<Expr>,
    pub actions: Vec<Action>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Trigger {
    Event(String),
    /// Fires once the chart has stayed in the source state for this many
    /// timed steps (seconds).
    After(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    And,
    Or,
    /// Query-only sugar for `!lhs || rhs`.
    Imply,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Ge => ">=",
            BinOp::Gt => ">",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Imply => "imply",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Imply => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Lt | BinOp::Le | BinOp::Eq | BinOp::Ne | BinOp::Ge | BinOp::Gt => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

/// Boolean/integer expression tree shared by guards, assignments and query
/// predicates. [`Expr::StateAtom`] is only meaningful in queries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    StateAtom { chart: String, state: String },
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call { name: String, args: Vec<Expr> },
}

impl Expr {
    pub fn and(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn call(native: Native, args: Vec<Expr>) -> Expr {
        Expr::Call { name: native.name().to_string(), args }
    }

    /// Visits every node, parents before children.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Unary(_, e) => e.walk(f),
            Expr::Binary(_, l, r) => {
                l.walk(f);
                r.walk(f);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.walk(f)),
            _ => {}
        }
    }

    pub fn calls(&self, native: Native) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if let Expr::Call { name, .. } = e {
                found |= name == native.name();
            }
        });
        found
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    /// Saturates the value to the variable's declared range.
    Assign { var: String, value: Expr },
    Raise(String),
    Call { name: String, args: Vec<Expr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueType {
    Int,
    Bool,
    Unit,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::Int => "int",
            ValueType::Bool => "bool",
            ValueType::Unit => "void",
        })
    }
}

/// Native runtime functions backing the `TWC` and `CEO` interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Native {
    TwcInitEventQueue,
    TwcPush,
    TwcPop,
    TwcIsNormalExe,
    CeoUpdateExeInfo,
    CeoRun,
    CeoRank,
}

impl Native {
    pub const ALL: [Native; 7] = [
        Native::TwcInitEventQueue,
        Native::TwcPush,
        Native::TwcPop,
        Native::TwcIsNormalExe,
        Native::CeoUpdateExeInfo,
        Native::CeoRun,
        Native::CeoRank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Native::TwcInitEventQueue => "TWC.initEventQueue",
            Native::TwcPush => "TWC.push",
            Native::TwcPop => "TWC.pop",
            Native::TwcIsNormalExe => "TWC.isNormalExe",
            Native::CeoUpdateExeInfo => "CEO.updateExeInfo",
            Native::CeoRun => "CEO.run",
            Native::CeoRank => "CEO.rank",
        }
    }

    pub fn lookup(name: &str) -> Option<Native> {
        Self::ALL.into_iter().find(|n| n.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Native::TwcInitEventQueue | Native::TwcPush | Native::TwcPop => 2,
            Native::TwcIsNormalExe => 0,
            Native::CeoUpdateExeInfo | Native::CeoRun | Native::CeoRank => 1,
        }
    }

    pub fn returns(self) -> ValueType {
        match self {
            Native::TwcInitEventQueue | Native::CeoUpdateExeInfo | Native::CeoRank => {
                ValueType::Int
            }
            Native::TwcPush => ValueType::Unit,
            Native::TwcPop | Native::TwcIsNormalExe | Native::CeoRun => ValueType::Bool,
        }
    }

    /// Pure natives only read the pattern runtime and may appear in guards.
    pub fn is_pure(self) -> bool {
        matches!(
            self,
            Native::TwcPop | Native::TwcIsNormalExe | Native::CeoRun | Native::CeoRank
        )
    }

    pub fn is_twc(self) -> bool {
        matches!(
            self,
            Native::TwcInitEventQueue | Native::TwcPush | Native::TwcPop | Native::TwcIsNormalExe
        )
    }
}

impl Model {
    pub fn chart(&self, name: &str) -> Option<&Statechart> {
        self.charts.iter().find(|c| c.name == name)
    }

    pub fn chart_by_id(&self, id: u32) -> Option<&Statechart> {
        self.charts.iter().find(|c| c.id == id)
    }

    pub fn manager(&self) -> Option<&Statechart> {
        self.charts.iter().find(|c| c.manager)
    }

    /// Charts that are not a pattern Manager, in priority order.
    pub fn user_charts(&self) -> impl Iterator<Item = &Statechart> {
        self.charts.iter().filter(|c| !c.manager)
    }

    pub fn variable(&self, name: &str) -> Option<&VarDecl> {
        self.interface.variables.iter().find(|v| v.name == name)
    }

    pub fn is_in_event(&self, name: &str) -> bool {
        self.interface.in_events.iter().any(|e| e.name == name)
    }

    pub fn is_internal_event(&self, name: &str) -> bool {
        self.interface.internal_events.iter().any(|e| e.name == name)
    }

    /// All declared events: in-events first, then internal events, each in
    /// declaration order.
    pub fn events(&self) -> impl Iterator<Item = &EventDecl> {
        self.interface
            .in_events
            .iter()
            .chain(self.interface.internal_events.iter())
    }

    /// Positive integer event identity used by the pattern runtime.
    pub fn event_id(&self, name: &str) -> Option<i64> {
        self.events()
            .position(|e| e.name == name)
            .map(|i| i as i64 + 1)
    }

    pub fn event_name(&self, id: i64) -> Option<&str> {
        if id < 1 {
            return None;
        }
        self.events().nth(id as usize - 1).map(|e| e.name.as_str())
    }

    /// Execution order in effect: the configured one, or priority order of
    /// the user charts.
    pub fn effective_order(&self) -> Vec<u32> {
        match &self.interface.exe_orders {
            Some(o) => o.clone(),
            None => self.user_charts().map(|c| c.id).collect(),
        }
    }

    /// Native functions callable from this model, determined by the applied
    /// patterns.
    pub fn native_bindings(&self) -> BTreeSet<Native> {
        Native::ALL
            .into_iter()
            .filter(|n| if n.is_twc() { self.patterns.twc } else { self.patterns.ceo })
            .collect()
    }

    pub fn raise_action_count(&self) -> usize {
        self.charts
            .iter()
            .flat_map(|c| &c.transitions)
            .flat_map(|t| &t.actions)
            .filter(|a| match a {
                Action::Raise(_) => true,
                Action::Call { name, .. } => name == Native::TwcPush.name(),
                _ => false,
            })
            .count()
    }
}

impl Statechart {
    pub fn has_state(&self, name: &str) -> bool {
        self.states.iter().any(|s| s.name == name)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }
}

/// One structural or typing problem found by [`validate_model`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
    /// Human-readable element path, e.g. `chart Laser, transition 2`.
    pub context: String,
    pub span: Option<SourceSpan>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(s) => write!(f, "{s}: {}: {}", self.context, self.message),
            None => write!(f, "{}: {}", self.context, self.message),
        }
    }
}

struct Checker<'m> {
    model: &'m Model,
    out: Vec<Diagnostic>,
    vars: HashMap<&'m str, &'m VarDecl>,
}

impl<'m> Checker<'m> {
    fn report(&mut self, context: impl Into<String>, loc: Loc, message: impl Into<String>) {
        self.out.push(Diagnostic {
            message: message.into(),
            context: context.into(),
            span: loc.0,
        });
    }

    fn interface(&mut self) {
        let m = self.model;
        let mut seen = HashSet::new();
        for e in m.events() {
            if !seen.insert(e.name.as_str()) {
                self.report("interface", e.loc, format!("event `{}` declared twice", e.name));
            }
        }
        let mut seen = HashSet::new();
        for v in &m.interface.variables {
            if !seen.insert(v.name.as_str()) {
                self.report("interface", v.loc, format!("variable `{}` declared twice", v.name));
            }
            if !(v.min <= v.initial && v.initial <= v.max) {
                self.report(
                    "interface",
                    v.loc,
                    format!(
                        "variable `{}` needs min <= initial <= max, got {}..{} = {}",
                        v.name, v.min, v.max, v.initial
                    ),
                );
            }
        }
        if let Some(order) = &m.interface.exe_orders {
            let mut expected: Vec<u32> = m.user_charts().map(|c| c.id).collect();
            let mut got = order.clone();
            expected.sort_unstable();
            got.sort_unstable();
            if got != expected {
                self.report(
                    "interface",
                    m.interface.exe_orders_loc,
                    format!(
                        "execution order {:?} is not a permutation of chart IDs {:?}",
                        order, expected
                    ),
                );
            }
        }
    }

    fn charts(&mut self) {
        let m = self.model;
        let mut names = HashSet::new();
        for (i, c) in m.charts.iter().enumerate() {
            let ctx = format!("chart {}", c.name);
            if !names.insert(c.name.as_str()) {
                self.report(&ctx, c.loc, "chart name declared twice");
            }
            if c.id != i as u32 + 1 {
                self.report(
                    &ctx,
                    c.loc,
                    format!(
                        "priority IDs must be unique and contiguous from 1; expected {}, got {}",
                        i + 1,
                        c.id
                    ),
                );
            }
            if c.manager && c.id != 1 {
                self.report(&ctx, c.loc, "a manager chart must have priority 1");
            }
            if c.manager && i > 0 && m.charts[..i].iter().any(|o| o.manager) {
                self.report(&ctx, c.loc, "at most one chart may be a manager");
            }
            let mut states = HashSet::new();
            for s in &c.states {
                if !states.insert(s.name.as_str()) {
                    self.report(&ctx, s.loc, format!("state `{}` declared twice", s.name));
                }
            }
            if c.states.is_empty() {
                self.report(&ctx, c.loc, "chart declares no states");
            } else if !c.has_state(&c.initial) {
                self.report(&ctx, c.loc, format!("initial state `{}` is not declared", c.initial));
            }
            for (k, t) in c.transitions.iter().enumerate() {
                self.transition(c, k, t);
            }
        }
        if m.charts.is_empty() {
            self.report("model", m.loc, "model declares no charts");
        }
    }

    fn transition(&mut self, chart: &'m Statechart, index: usize, t: &'m Transition) {
        let ctx = format!("chart {}, transition {}", chart.name, index + 1);
        for endpoint in [&t.source, &t.target] {
            if !chart.has_state(endpoint) {
                self.report(&ctx, t.loc, format!("state `{endpoint}` is not declared"));
            }
        }
        match &t.trigger {
            Some(Trigger::Event(e)) if !self.model.events().any(|d| &d.name == e) => {
                self.report(&ctx, t.loc, format!("event `{e}` is not declared"));
            }
            Some(Trigger::After(0)) => {
                self.report(&ctx, t.loc, "time trigger duration must be at least 1s");
            }
            _ => {}
        }
        if let Some(g) = &t.guard {
            match self.type_of(g, true) {
                Ok(ValueType::Bool) => {}
                Ok(other) => self.report(&ctx, t.loc, format!("guard has type {other}, expected bool")),
                Err(msg) => self.report(&ctx, t.loc, msg),
            }
        }
        for a in &t.actions {
            match a {
                Action::Assign { var, value } => {
                    if !self.vars.contains_key(var.as_str()) {
                        self.report(&ctx, t.loc, format!("variable `{var}` is not declared"));
                    }
                    match self.type_of(value, false) {
                        Ok(ValueType::Int) => {}
                        Ok(other) => self.report(
                            &ctx,
                            t.loc,
                            format!("assignment to `{var}` has type {other}, expected int"),
                        ),
                        Err(msg) => self.report(&ctx, t.loc, msg),
                    }
                }
                Action::Raise(e) => {
                    if self.model.is_in_event(e) {
                        self.report(&ctx, t.loc, format!("`{e}` is an in-event and cannot be raised by a chart"));
                    } else if !self.model.is_internal_event(e) {
                        self.report(&ctx, t.loc, format!("event `{e}` is not declared"));
                    }
                }
                Action::Call { name, args } => {
                    let call = Expr::Call { name: name.clone(), args: args.clone() };
                    if let Err(msg) = self.type_of(&call, false) {
                        self.report(&ctx, t.loc, msg);
                    }
                }
            }
        }
    }

    fn type_of(&self, e: &Expr, in_guard: bool) -> Result<ValueType, String> {
        use ValueType::*;
        Ok(match e {
            Expr::Int(_) => Int,
            Expr::Bool(_) => Bool,
            Expr::Var(v) => {
                if !self.vars.contains_key(v.as_str()) {
                    return Err(format!("variable `{v}` is not declared"));
                }
                Int
            }
            Expr::StateAtom { chart, state } => {
                return Err(format!("state atom `{chart}.{state}` is only allowed in queries"))
            }
            Expr::Unary(UnOp::Not, inner) => expect(self.type_of(inner, in_guard)?, Bool, "!")?,
            Expr::Unary(UnOp::Neg, inner) => expect(self.type_of(inner, in_guard)?, Int, "-")?,
            Expr::Binary(op, l, r) => {
                let lt = self.type_of(l, in_guard)?;
                let rt = self.type_of(r, in_guard)?;
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul => {
                        expect(lt, Int, op.symbol())?;
                        expect(rt, Int, op.symbol())?
                    }
                    BinOp::And | BinOp::Or | BinOp::Imply => {
                        expect(lt, Bool, op.symbol())?;
                        expect(rt, Bool, op.symbol())?
                    }
                    _ => {
                        expect(lt, Int, op.symbol())?;
                        expect(rt, Int, op.symbol())?;
                        Bool
                    }
                }
            }
            Expr::Call { name, args } => {
                let native =
                    Native::lookup(name).ok_or_else(|| format!("unknown native function `{name}`"))?;
                if !self.model.native_bindings().contains(&native) {
                    return Err(format!(
                        "native `{name}` is not bound; apply the {} pattern first",
                        if native.is_twc() { "twc" } else { "ceo" }
                    ));
                }
                if args.len() != native.arity() {
                    return Err(format!(
                        "native `{name}` takes {} argument(s), got {}",
                        native.arity(),
                        args.len()
                    ));
                }
                if in_guard && !native.is_pure() {
                    return Err(format!("native `{name}` mutates the runtime and cannot appear in a guard"));
                }
                for a in args {
                    expect(self.type_of(a, in_guard)?, Int, name)?;
                }
                native.returns()
            }
        })
    }
}

fn expect(got: ValueType, want: ValueType, op: &str) -> Result<ValueType, String> {
    if got == want {
        Ok(want)
    } else {
        Err(format!("operand of `{op}` has type {got}, expected {want}"))
    }
}

/// Checks every structural and typing invariant of `m`. Returns one
/// diagnostic per violation; an empty list means the model is executable.
pub fn validate_model(m: &Model) -> Vec<Diagnostic> {
    let mut checker = Checker {
        model: m,
        out: Vec::new(),
        vars: m.interface.variables.iter().map(|v| (v.name.as_str(), v)).collect(),
    };
    checker.interface();
    checker.charts();
    checker.out
}

/// Type-checks a query predicate against `m`: state atoms must name declared
/// chart states and variables must be declared.
pub fn check_predicate(m: &Model, pred: &Expr) -> Result<(), String> {
    fn go(m: &Model, e: &Expr) -> Result<ValueType, String> {
        use ValueType::*;
        Ok(match e {
            Expr::Int(_) => Int,
            Expr::Bool(_) => Bool,
            Expr::Var(v) => {
                m.variable(v).ok_or_else(|| format!("variable `{v}` is not declared"))?;
                Int
            }
            Expr::StateAtom { chart, state } => {
                let c = m.chart(chart).ok_or_else(|| format!("chart `{chart}` is not declared"))?;
                if !c.has_state(state) {
                    return Err(format!("chart `{chart}` has no state `{state}`"));
                }
                Bool
            }
            Expr::Unary(UnOp::Not, i) => expect(go(m, i)?, Bool, "!")?,
            Expr::Unary(UnOp::Neg, i) => expect(go(m, i)?, Int, "-")?,
            Expr::Binary(op, l, r) => {
                let (lt, rt) = (go(m, l)?, go(m, r)?);
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul => {
                        expect(lt, Int, op.symbol())?;
                        expect(rt, Int, op.symbol())?
                    }
                    BinOp::And | BinOp::Or | BinOp::Imply => {
                        expect(lt, Bool, op.symbol())?;
                        expect(rt, Bool, op.symbol())?
                    }
                    _ => {
                        expect(lt, Int, op.symbol())?;
                        expect(rt, Int, op.symbol())?;
                        Bool
                    }
                }
            }
            Expr::Call { name, .. } => return Err(format!("native call `{name}` is not allowed in queries")),
        })
    }
    match go(m, pred)? {
        ValueType::Bool => Ok(()),
        other => Err(format!("query predicate has type {other}, expected bool")),
    }
}
