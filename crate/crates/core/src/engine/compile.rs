//! Lowering of a validated [`Model`] into index-based form for execution.

use crate::model::*;

#[derive(Debug, Clone)]
pub(crate) enum CExpr {
    Int(i64),
    Bool(bool),
    Var(usize),
    /// `chart index`, `state index`.
    Atom(usize, usize),
    Not(Box<CExpr>),
    Neg(Box<CExpr>),
    Binary(BinOp, Box<CExpr>, Box<CExpr>),
    Native(Native, Vec<CExpr>),
}

#[derive(Debug, Clone)]
pub(crate) enum CAction {
    Assign(usize, CExpr),
    Raise(usize),
    Native(Native, Vec<CExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CTrigger {
    None,
    Event(usize),
    After(u32),
}

#[derive(Debug, Clone)]
pub(crate) struct CTransition {
    /// Index into the chart's declared transitions.
    pub decl: usize,
    pub target: usize,
    pub trigger: CTrigger,
    pub guard: Option<CExpr>,
    pub actions: Vec<CAction>,
}

#[derive(Debug, Clone)]
pub(crate) struct CChart {
    pub initial: usize,
    /// Outgoing transitions per state, in declaration order.
    pub outgoing: Vec<Vec<CTransition>>,
    /// Largest `after` duration; timers saturate here.
    pub timer_cap: u32,
}

pub(crate) struct Names<'m> {
    pub model: &'m Model,
}

impl<'m> Names<'m> {
    fn var(&self, name: &str) -> usize {
        self.model
            .interface
            .variables
            .iter()
            .position(|v| v.name == name)
            .expect("validated model references declared variables")
    }

    fn event(&self, name: &str) -> usize {
        self.model
            .events()
            .position(|e| e.name == name)
            .expect("validated model references declared events")
    }

    pub fn expr(&self, e: &Expr) -> CExpr {
        match e {
            Expr::Int(n) => CExpr::Int(*n),
            Expr::Bool(b) => CExpr::Bool(*b),
            Expr::Var(v) => CExpr::Var(self.var(v)),
            Expr::StateAtom { chart, state } => {
                let ci = self
                    .model
                    .charts
                    .iter()
                    .position(|c| &c.name == chart)
                    .expect("checked predicate references declared charts");
                let si = self.model.charts[ci].state_index(state).expect("declared state");
                CExpr::Atom(ci, si)
            }
            Expr::Unary(UnOp::Not, i) => CExpr::Not(Box::new(self.expr(i))),
            Expr::Unary(UnOp::Neg, i) => CExpr::Neg(Box::new(self.expr(i))),
            Expr::Binary(op, l, r) => CExpr::Binary(*op, Box::new(self.expr(l)), Box::new(self.expr(r))),
            Expr::Call { name, args } => CExpr::Native(
                Native::lookup(name).expect("validated native"),
                args.iter().map(|a| self.expr(a)).collect(),
            ),
        }
    }

    fn action(&self, a: &Action) -> CAction {
        match a {
            Action::Assign { var, value } => CAction::Assign(self.var(var), self.expr(value)),
            Action::Raise(e) => CAction::Raise(self.event(e)),
            Action::Call { name, args } => CAction::Native(
                Native::lookup(name).expect("validated native"),
                args.iter().map(|a| self.expr(a)).collect(),
            ),
        }
    }

    pub fn chart(&self, c: &Statechart) -> CChart {
        let mut outgoing = vec![Vec::new(); c.states.len()];
        let mut timer_cap = 0;
        for (decl, t) in c.transitions.iter().enumerate() {
            let source = c.state_index(&t.source).expect("declared state");
            let trigger = match &t.trigger {
                None => CTrigger::None,
                Some(Trigger::Event(e)) => CTrigger::Event(self.event(e)),
                Some(Trigger::After(k)) => {
                    timer_cap = timer_cap.max(*k);
                    CTrigger::After(*k)
                }
            };
            outgoing[source].push(CTransition {
                decl,
                target: c.state_index(&t.target).expect("declared state"),
                trigger,
                guard: t.guard.as_ref().map(|g| self.expr(g)),
                actions: t.actions.iter().map(|a| self.action(a)).collect(),
            });
        }
        CChart {
            initial: c.state_index(&c.initial).expect("declared initial state"),
            outgoing,
            timer_cap,
        }
    }
}
