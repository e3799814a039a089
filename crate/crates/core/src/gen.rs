//! Random generation of small valid models, for differential and round-trip
//! testing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::*;

/// Size bounds for [`random_model`].
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub charts: (usize, usize),
    pub max_states: usize,
    pub max_vars: usize,
    /// Largest `max - min` of a variable.
    pub max_range: i64,
    pub max_in_events: usize,
    pub max_internal_events: usize,
    pub max_transitions: usize,
    pub max_after: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            charts: (2, 3),
            max_states: 4,
            max_vars: 2,
            max_range: 8,
            max_in_events: 2,
            max_internal_events: 2,
            max_transitions: 5,
            max_after: 3,
        }
    }
}

fn decl(name: String) -> EventDecl {
    EventDecl { name, loc: Loc::NONE }
}

struct Gen<'a, R> {
    rng: &'a mut R,
    vars: Vec<String>,
}

impl<R: Rng> Gen<'_, R> {
    fn int_expr(&mut self, depth: u32) -> Expr {
        let leaf = depth == 0 || self.rng.gen_bool(0.5);
        if leaf {
            if !self.vars.is_empty() && self.rng.gen_bool(0.6) {
                Expr::Var(self.vars.choose(self.rng).unwrap().clone())
            } else {
                Expr::Int(self.rng.gen_range(-3..=9))
            }
        } else if self.rng.gen_bool(0.1) {
            Expr::Unary(UnOp::Neg, Box::new(self.int_expr(depth - 1)))
        } else {
            let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul].choose(self.rng).unwrap();
            Expr::Binary(op, Box::new(self.int_expr(depth - 1)), Box::new(self.int_expr(depth - 1)))
        }
    }

    fn bool_expr(&mut self, depth: u32) -> Expr {
        let roll = self.rng.gen_range(0..10);
        if roll == 0 {
            return Expr::Bool(self.rng.gen_bool(0.7));
        }
        if depth == 0 || roll < 6 {
            let op = *[BinOp::Lt, BinOp::Le, BinOp::Eq, BinOp::Ne, BinOp::Ge, BinOp::Gt]
                .choose(self.rng)
                .unwrap();
            let d = depth.min(1);
            return Expr::Binary(op, Box::new(self.int_expr(d)), Box::new(self.int_expr(d)));
        }
        match roll {
            6 => Expr::not(self.bool_expr(depth - 1)),
            7 | 8 => Expr::and(self.bool_expr(depth - 1), self.bool_expr(depth - 1)),
            _ => Expr::or(self.bool_expr(depth - 1), self.bool_expr(depth - 1)),
        }
    }
}

/// Generates a model that passes [`validate_model`].
pub fn random_model<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Model {
    let in_events: Vec<String> = (0..rng.gen_range(0..=cfg.max_in_events)).map(|i| format!("go{i}")).collect();
    let internal: Vec<String> = (0..rng.gen_range(0..=cfg.max_internal_events)).map(|i| format!("ev{i}")).collect();
    let variables: Vec<VarDecl> = (0..rng.gen_range(0..=cfg.max_vars))
        .map(|i| {
            let min = rng.gen_range(-2..=2);
            let max = min + rng.gen_range(1..=cfg.max_range);
            VarDecl { name: format!("v{i}"), min, max, initial: rng.gen_range(min..=max), loc: Loc::NONE }
        })
        .collect();
    let mut g = Gen { vars: variables.iter().map(|v| v.name.clone()).collect(), rng };

    let n = g.rng.gen_range(cfg.charts.0..=cfg.charts.1);
    let mut charts = Vec::with_capacity(n);
    for c in 0..n {
        let states: Vec<String> = (0..g.rng.gen_range(1..=cfg.max_states)).map(|i| format!("Q{i}")).collect();
        let mut transitions = Vec::new();
        for _ in 0..g.rng.gen_range(0..=cfg.max_transitions) {
            let trigger = match g.rng.gen_range(0..4) {
                1 if !in_events.is_empty() => Some(Trigger::Event(in_events.choose(g.rng).unwrap().clone())),
                2 if !internal.is_empty() => Some(Trigger::Event(internal.choose(g.rng).unwrap().clone())),
                3 => Some(Trigger::After(g.rng.gen_range(1..=cfg.max_after))),
                _ => None,
            };
            let guard = g.rng.gen_bool(0.5).then(|| g.bool_expr(2));
            let mut actions = Vec::new();
            for _ in 0..g.rng.gen_range(0..=2) {
                if !internal.is_empty() && g.rng.gen_bool(0.4) {
                    actions.push(Action::Raise(internal.choose(g.rng).unwrap().clone()));
                } else if !g.vars.is_empty() {
                    let var = g.vars.choose(g.rng).unwrap().clone();
                    let value = g.int_expr(2);
                    actions.push(Action::Assign { var, value });
                }
            }
            transitions.push(Transition {
                source: states.choose(g.rng).unwrap().clone(),
                target: states.choose(g.rng).unwrap().clone(),
                trigger,
                guard,
                actions,
                loc: Loc::NONE,
            });
        }
        charts.push(Statechart {
            id: c as u32 + 1,
            name: format!("C{}", c + 1),
            manager: false,
            initial: states.choose(g.rng).unwrap().clone(),
            states: states.into_iter().map(|name| StateDecl { name, loc: Loc::NONE }).collect(),
            transitions,
            loc: Loc::NONE,
        });
    }
    let exe_orders = g.rng.gen_bool(0.3).then(|| {
        let mut ids: Vec<u32> = (1..=n as u32).collect();
        ids.shuffle(g.rng);
        ids
    });
    Model {
        name: "Generated".into(),
        interface: InterfaceDecl {
            in_events: in_events.into_iter().map(decl).collect(),
            internal_events: internal.into_iter().map(decl).collect(),
            variables,
            exe_orders,
            exe_orders_loc: Loc::NONE,
        },
        charts,
        patterns: PatternSet::default(),
        loc: Loc::NONE,
    }
}

/// Generates a boolean query predicate over the states and variables of `m`.
pub fn random_predicate<R: Rng>(rng: &mut R, m: &Model) -> Expr {
    let atom = |rng: &mut R| -> Expr {
        let vars: Vec<&VarDecl> = m.interface.variables.iter().filter(|v| v.name != "cycleNum").collect();
        if !vars.is_empty() && rng.gen_bool(0.4) {
            let v = vars.choose(rng).unwrap();
            let op = *[BinOp::Lt, BinOp::Le, BinOp::Eq, BinOp::Ne, BinOp::Ge, BinOp::Gt].choose(rng).unwrap();
            let k = rng.gen_range(v.min..=v.max);
            Expr::Binary(op, Box::new(Expr::Var(v.name.clone())), Box::new(Expr::Int(k)))
        } else {
            let charts: Vec<&Statechart> = m.user_charts().collect();
            let c = charts.choose(rng).unwrap();
            let s = c.states.choose(rng).unwrap();
            Expr::StateAtom { chart: c.name.clone(), state: s.name.clone() }
        }
    };
    let a = atom(rng);
    match rng.gen_range(0..5) {
        0 => a,
        1 => Expr::not(a),
        2 => Expr::or(a, atom(rng)),
        3 => Expr::not(Expr::and(a, atom(rng))),
        _ => Expr::Binary(BinOp::Imply, Box::new(a), Box::new(atom(rng))),
    }
}
