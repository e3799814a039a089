use std::fmt::Write;

use crate::model::*;

/// Renders `m` in canonical layout. Parsing the result yields a model equal
/// to `m`.
pub fn serialize_model(m: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}", m.name);
    if m.patterns.twc {
        out.push_str("pattern twc\n");
    }
    if m.patterns.ceo {
        out.push_str("pattern ceo\n");
    }
    for e in &m.interface.in_events {
        let _ = writeln!(out, "in event {}", e.name);
    }
    for e in &m.interface.internal_events {
        let _ = writeln!(out, "event {}", e.name);
    }
    for v in &m.interface.variables {
        let _ = writeln!(out, "var {}: int[{}..{}] = {}", v.name, v.min, v.max, v.initial);
    }
    if let Some(order) = &m.interface.exe_orders {
        let ids: Vec<String> = order.iter().map(u32::to_string).collect();
        let _ = writeln!(out, "order {}", ids.join(", "));
    }
    for c in &m.charts {
        out.push('\n');
        let _ = writeln!(
            out,
            "chart {} priority {}{}",
            c.name,
            c.id,
            if c.manager { " manager" } else { "" }
        );
        let _ = writeln!(out, "  initial {}", c.initial);
        for s in &c.states {
            let _ = writeln!(out, "  state {}", s.name);
        }
        for t in &c.transitions {
            let _ = writeln!(out, "  {}", print_transition(t));
        }
    }
    out
}

fn print_transition(t: &Transition) -> String {
    let mut s = format!("transition {} -> {}", t.source, t.target);
    match &t.trigger {
        Some(Trigger::Event(e)) => {
            let _ = write!(s, " on {e}");
        }
        Some(Trigger::After(k)) => {
            let _ = write!(s, " after {k}s");
        }
        None => {}
    }
    if let Some(g) = &t.guard {
        let _ = write!(s, " if {}", print_expr(g));
    }
    if !t.actions.is_empty() {
        let actions: Vec<String> = t.actions.iter().map(print_action).collect();
        let _ = write!(s, " do {}", actions.join("; "));
    }
    s
}

pub(crate) fn print_action(a: &Action) -> String {
    match a {
        Action::Assign { var, value } => format!("{var} = {}", print_expr(value)),
        Action::Raise(e) => format!("raise {e}"),
        Action::Call { name, args } => format!("{name}({})", print_args(args)),
    }
}

fn print_args(args: &[Expr]) -> String {
    args.iter().map(print_expr).collect::<Vec<_>>().join(", ")
}

/// Renders an expression with the minimum parentheses needed to parse back
/// to the same tree.
pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

fn is_atomic(e: &Expr) -> bool {
    !matches!(e, Expr::Binary(..))
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Expr::Var(v) => out.push_str(v),
        Expr::StateAtom { chart, state } => {
            let _ = write!(out, "{chart}.{state}");
        }
        Expr::Call { name, args } => {
            let _ = write!(out, "{name}({})", print_args(args));
        }
        Expr::Unary(op, inner) => {
            out.push(match op {
                UnOp::Not => '!',
                UnOp::Neg => '-',
            });
            // `-5` would read back as a literal, `--x` is fine.
            let wrap = !is_atomic(inner) || (*op == UnOp::Neg && matches!(**inner, Expr::Int(_)));
            if wrap {
                out.push('(');
                write_expr(out, inner);
                out.push(')');
            } else {
                write_expr(out, inner);
            }
        }
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            let right_assoc = *op == BinOp::Imply;
            let wrap_l = match &**l {
                Expr::Binary(lo, ..) => lo.precedence() < p || (right_assoc && lo.precedence() == p),
                _ => false,
            };
            let wrap_r = match &**r {
                Expr::Binary(ro, ..) => ro.precedence() < p || (!right_assoc && ro.precedence() == p),
                _ => false,
            };
            write_operand(out, l, wrap_l);
            let _ = write!(out, " {} ", op.symbol());
            write_operand(out, r, wrap_r);
        }
    }
}

fn write_operand(out: &mut String, e: &Expr, wrap: bool) {
    if wrap {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}
