use std::collections::BTreeSet;

use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, KEYWORDS};
use crate::model::*;
use crate::query::{Query, QueryMode};

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Whether `Chart.State` atoms are accepted in expressions.
    allow_state_atoms: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub(crate) fn new(text: &str, allow_state_atoms: bool) -> PResult<Self> {
        let toks = tokenize(text).map_err(|e| ParseError {
            span: e.span,
            message: e.message,
            expected: Vec::new(),
            found: String::new(),
        })?;
        Ok(Parser { toks, pos: 0, allow_state_atoms })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = self.peek();
        let found = t.tok.describe();
        let expected: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
        Err(ParseError {
            span: t.span,
            message: format!("expected {}, found {}", join_expected(&expected), found),
            expected,
            found,
        })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Token> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            self.error(&[what])
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Token> {
        if self.at_keyword(kw) {
            Ok(self.bump())
        } else {
            self.error(&[&format!("`{kw}`")])
        }
    }

    fn name(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                let t = self.bump();
                Ok((s, t.span))
            }
            _ => self.error(&[what]),
        }
    }

    fn int(&mut self, what: &str) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().tok {
            Tok::Int(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => self.error(&[what]),
        }
    }

    fn end_of_line(&mut self) -> PResult<()> {
        match self.peek().tok {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.error(&["end of line"]),
        }
    }

    fn skip_blank_lines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.bump();
        }
    }

    pub(crate) fn model(&mut self) -> PResult<Model> {
        self.skip_blank_lines();
        let start = self.expect_keyword("model")?;
        let (name, _) = self.name("model name")?;
        self.end_of_line()?;

        let mut model = Model {
            name,
            interface: InterfaceDecl::default(),
            charts: Vec::new(),
            patterns: PatternSet::default(),
            loc: Loc::at(start.span),
        };
        // Per-chart declared initial state, for diagnosing duplicates.
        let mut initial_seen = BTreeSet::new();

        loop {
            self.skip_blank_lines();
            let t = self.peek().clone();
            let kw = match &t.tok {
                Tok::Eof => break,
                Tok::Ident(s) => s.clone(),
                _ => return self.error(&["declaration"]),
            };
            match kw.as_str() {
                "in" => {
                    self.bump();
                    self.expect_keyword("event")?;
                    let (name, span) = self.name("event name")?;
                    model.interface.in_events.push(EventDecl { name, loc: Loc::at(span) });
                }
                "event" => {
                    self.bump();
                    let (name, span) = self.name("event name")?;
                    model.interface.internal_events.push(EventDecl { name, loc: Loc::at(span) });
                }
                "var" => {
                    self.bump();
                    let (name, span) = self.name("variable name")?;
                    self.expect(Tok::Colon, "`:`")?;
                    self.expect_keyword("int")?;
                    self.expect(Tok::LBracket, "`[`")?;
                    let min = self.int("lower bound")?;
                    self.expect(Tok::DotDot, "`..`")?;
                    let max = self.int("upper bound")?;
                    self.expect(Tok::RBracket, "`]`")?;
                    self.expect(Tok::Assign, "`=`")?;
                    let initial = self.int("initial value")?;
                    model.interface.variables.push(VarDecl { name, min, max, initial, loc: Loc::at(span) });
                }
                "order" => {
                    self.bump();
                    if model.interface.exe_orders.is_some() {
                        return Err(ParseError::at(t.span, "execution order declared twice"));
                    }
                    let mut ids = Vec::new();
                    loop {
                        let n = self.int("chart ID")?;
                        if n < 1 || n > u32::MAX as i64 {
                            return Err(ParseError::at(t.span, format!("chart ID {n} out of range")));
                        }
                        ids.push(n as u32);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    model.interface.exe_orders = Some(ids);
                    model.interface.exe_orders_loc = Loc::at(t.span);
                }
                "pattern" => {
                    self.bump();
                    match &self.peek().tok {
                        Tok::Ident(p) if p == "twc" => model.patterns.twc = true,
                        Tok::Ident(p) if p == "ceo" => model.patterns.ceo = true,
                        _ => return self.error(&["`twc`", "`ceo`"]),
                    }
                    self.bump();
                }
                "chart" => {
                    self.bump();
                    let (name, span) = self.name("chart name")?;
                    self.expect_keyword("priority")?;
                    let id = self.int("priority ID")?;
                    if id < 1 || id > u32::MAX as i64 {
                        return Err(ParseError::at(span, format!("priority ID {id} out of range")));
                    }
                    let manager = if self.at_keyword("manager") {
                        self.bump();
                        true
                    } else {
                        false
                    };
                    model.charts.push(Statechart {
                        id: id as u32,
                        name,
                        manager,
                        states: Vec::new(),
                        initial: String::new(),
                        transitions: Vec::new(),
                        loc: Loc::at(span),
                    });
                }
                "initial" | "state" | "transition" => {
                    let idx = match model.charts.len() {
                        0 => return Err(ParseError::at(t.span, format!("`{kw}` outside of a chart"))),
                        n => n - 1,
                    };
                    self.bump();
                    match kw.as_str() {
                        "initial" => {
                            let (name, span) = self.name("state name")?;
                            if !initial_seen.insert(idx) {
                                return Err(ParseError::at(span, "initial state declared twice"));
                            }
                            model.charts[idx].initial = name;
                        }
                        "state" => {
                            let (name, span) = self.name("state name")?;
                            model.charts[idx].states.push(StateDecl { name, loc: Loc::at(span) });
                        }
                        _ => {
                            let tr = self.transition(t.span)?;
                            model.charts[idx].transitions.push(tr);
                        }
                    }
                }
                _ => {
                    return self.error(&[
                        "`in`", "`event`", "`var`", "`order`", "`pattern`", "`chart`", "`initial`",
                        "`state`", "`transition`",
                    ])
                }
            }
            self.end_of_line()?;
        }
        for (i, c) in model.charts.iter().enumerate() {
            if !initial_seen.contains(&i) {
                let span = c.loc.0.unwrap_or(SourceSpan::new(1, 1, 0));
                return Err(ParseError::at(span, format!("chart `{}` has no `initial` line", c.name)));
            }
        }
        Ok(model)
    }

    fn transition(&mut self, start: SourceSpan) -> PResult<Transition> {
        let (source, _) = self.name("source state")?;
        self.expect(Tok::Arrow, "`->`")?;
        let (target, _) = self.name("target state")?;
        let mut tr = Transition {
            source,
            target,
            trigger: None,
            guard: None,
            actions: Vec::new(),
            loc: Loc::at(start),
        };
        if self.at_keyword("on") {
            self.bump();
            let (e, _) = self.name("event name")?;
            tr.trigger = Some(Trigger::Event(e));
        } else if self.at_keyword("after") {
            self.bump();
            let n = self.int("duration")?;
            let unit = self.peek().clone();
            match unit.tok {
                Tok::Ident(ref u) if u == "s" => {
                    self.bump();
                }
                _ => return self.error(&["`s`"]),
            }
            if n < 0 || n > u32::MAX as i64 {
                return Err(ParseError::at(unit.span, format!("duration {n}s out of range")));
            }
            tr.trigger = Some(Trigger::After(n as u32));
        }
        if self.at_keyword("if") {
            self.bump();
            tr.guard = Some(self.expr()?);
        }
        if self.at_keyword("do") {
            self.bump();
            loop {
                tr.actions.push(self.action()?);
                if !self.eat(&Tok::Semi) {
                    break;
                }
                if matches!(self.peek().tok, Tok::Newline | Tok::Eof) {
                    break;
                }
            }
        }
        Ok(tr)
    }

    fn action(&mut self) -> PResult<Action> {
        if self.at_keyword("raise") {
            self.bump();
            let (e, _) = self.name("event name")?;
            return Ok(Action::Raise(e));
        }
        let (first, _) = self.name("action")?;
        match self.peek().tok {
            Tok::Assign => {
                self.bump();
                let value = self.expr()?;
                Ok(Action::Assign { var: first, value })
            }
            Tok::Dot | Tok::LParen => {
                let name = self.qualified_rest(first)?;
                let args = self.call_args()?;
                Ok(Action::Call { name, args })
            }
            _ => self.error(&["`=`", "`(`", "`.`"]),
        }
    }

    fn qualified_rest(&mut self, first: String) -> PResult<String> {
        let mut name = first;
        while self.eat(&Tok::Dot) {
            let (part, _) = self.ident_any("name")?;
            name.push('.');
            name.push_str(&part);
        }
        Ok(name)
    }

    fn ident_any(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                let t = self.bump();
                Ok((s, t.span))
            }
            _ => self.error(&[what]),
        }
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::RParen, "`)`")?;
            return Ok(args);
        }
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match &self.peek().tok {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Ge => BinOp::Ge,
            Tok::Gt => BinOp::Gt,
            Tok::AndAnd => BinOp::And,
            Tok::OrOr => BinOp::Or,
            Tok::Ident(s) if s == "imply" && self.allow_state_atoms => BinOp::Imply,
            _ => return None,
        })
    }

    /// Precedence climbing. `imply` is right-associative, everything else
    /// left-associative.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let next = if op == BinOp::Imply { prec } else { prec + 1 };
            let rhs = self.binary(next)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        match self.peek().tok {
            Tok::Bang => {
                self.bump();
                Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)))
            }
            Tok::Minus => {
                self.bump();
                if let Tok::Int(n) = self.peek().tok {
                    self.bump();
                    return Ok(Expr::Int(-n));
                }
                Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(ref s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::Bool(s == "true"))
            }
            Tok::Ident(ref s) if !KEYWORDS.contains(&s.as_str()) => {
                let first = s.clone();
                self.bump();
                if self.peek().tok == Tok::LParen {
                    let args = self.call_args()?;
                    return Ok(Expr::Call { name: first, args });
                }
                if self.peek().tok != Tok::Dot {
                    return Ok(Expr::Var(first));
                }
                // `A.B(...)` is a native call; `A.B` a state atom.
                if matches!(self.peek_at(1), Tok::Ident(_)) && *self.peek_at(2) == Tok::LParen {
                    let name = self.qualified_rest(first)?;
                    let args = self.call_args()?;
                    return Ok(Expr::Call { name, args });
                }
                if !self.allow_state_atoms {
                    return self.error(&["`(`"]);
                }
                self.bump();
                let (state, _) = self.ident_any("state name")?;
                Ok(Expr::StateAtom { chart: first, state })
            }
            _ => self.error(&["expression"]),
        }
    }

    pub(crate) fn query(&mut self) -> PResult<Query> {
        self.skip_blank_lines();
        let mode = match (&self.peek().tok, self.peek_at(1), self.peek_at(2)) {
            (Tok::Ident(e), Tok::Lt, Tok::Gt) if e == "E" => QueryMode::ExistsEventually,
            (Tok::Ident(a), Tok::LBracket, Tok::RBracket) if a == "A" => QueryMode::AlwaysGlobally,
            _ => return self.error(&["`E<>`", "`A[]`"]),
        };
        for _ in 0..3 {
            self.bump();
        }
        let pred = self.expr()?;
        self.skip_blank_lines();
        if self.peek().tok != Tok::Eof {
            return self.error(&["end of query"]);
        }
        Ok(Query { mode, pred })
    }
}

fn join_expected(items: &[String]) -> String {
    match items.len() {
        0 => "nothing".into(),
        1 => items[0].clone(),
        _ => format!("one of {}", items.join(", ")),
    }
}
