// SPDX-License-Identifier: Apache-2.0

//! Edge cost expressions.
//!
//! Grammar (infix, left-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := atom (('*' | '/') atom)*
//! atom   := number | var | func '(' expr (',' expr)? ')' | '(' expr ')'
//! func   := min | max | pow | exp
//! var    := demand | cap | overflow_excess | pin_density | base_len | via_penalty | history
//! ```
//!
//! Every operator is total: division clamps its denominator to at least
//! [`MIN_DENOMINATOR`], `exp` clamps its argument to [`MAX_EXP_ARG`], `pow`
//! clamps its base to non-negative and its exponent to `[-8, 8]`, and every
//! intermediate result is clamped to `[-COST_CEILING, COST_CEILING]`. The final
//! value is clamped to `[0, COST_CEILING]`, so costs are always finite and
//! non-negative.

use std::fmt;

pub const MIN_DENOMINATOR: f64 = 1e-3;
pub const MAX_EXP_ARG: f64 = 20.0;
pub const COST_CEILING: f64 = 1e12;
pub const MAX_NODES: usize = 64;
const MAX_STACK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Demand,
    Cap,
    OverflowExcess,
    PinDensity,
    BaseLen,
    ViaPenalty,
    History,
}

impl Var {
    pub const ALL: [Var; 7] = [Var::Demand, Var::Cap, Var::OverflowExcess, Var::PinDensity, Var::BaseLen, Var::ViaPenalty, Var::History];

    pub fn name(self) -> &'static str {
        match self {
            Var::Demand => "demand",
            Var::Cap => "cap",
            Var::OverflowExcess => "overflow_excess",
            Var::PinDensity => "pin_density",
            Var::BaseLen => "base_len",
            Var::ViaPenalty => "via_penalty",
            Var::History => "history",
        }
    }

    fn from_name(s: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
    Pow,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            _ => 3,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Min => "min",
            BinOp::Max => "max",
            BinOp::Pow => "pow",
        }
    }

    fn is_function(self) -> bool {
        matches!(self, BinOp::Min | BinOp::Max | BinOp::Pow)
    }

    /// Total semantics shared by every evaluator.
    pub fn apply(self, a: f64, b: f64) -> f64 {
        let r = match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b.max(MIN_DENOMINATOR),
            BinOp::Min => a.min(b),
            BinOp::Max => a.max(b),
            BinOp::Pow => a.max(0.0).powf(b.clamp(-8.0, 8.0)),
        };
        clamp_intermediate(r)
    }
}

pub fn exp_clamped(a: f64) -> f64 {
    clamp_intermediate(a.min(MAX_EXP_ARG).exp())
}

pub fn clamp_intermediate(r: f64) -> f64 {
    if r.is_nan() {
        COST_CEILING
    } else {
        r.clamp(-COST_CEILING, COST_CEILING)
    }
}

pub fn clamp_final(r: f64) -> f64 {
    if r.is_nan() {
        COST_CEILING
    } else {
        r.clamp(0.0, COST_CEILING)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Bin(_, a, b) => 1 + a.node_count() + b.node_count(),
            Expr::Exp(a) => 1 + a.node_count(),
        }
    }

    /// Constants in pre-order.
    pub fn constants(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit_consts(&mut |c| out.push(*c));
        out
    }

    fn visit_consts(&self, f: &mut impl FnMut(&f64)) {
        match self {
            Expr::Const(c) => f(c),
            Expr::Var(_) => {}
            Expr::Bin(_, a, b) => {
                a.visit_consts(f);
                b.visit_consts(f);
            }
            Expr::Exp(a) => a.visit_consts(f),
        }
    }

    /// Replaces the `index`-th constant (pre-order) with `value`.
    pub fn set_constant(&mut self, index: usize, value: f64) -> bool {
        fn go(e: &mut Expr, index: usize, value: f64, seen: &mut usize) -> bool {
            match e {
                Expr::Const(c) => {
                    if *seen == index {
                        *c = value;
                        return true;
                    }
                    *seen += 1;
                    false
                }
                Expr::Var(_) => false,
                Expr::Bin(_, a, b) => go(a, index, value, seen) || go(b, index, value, seen),
                Expr::Exp(a) => go(a, index, value, seen),
            }
        }
        go(self, index, value, &mut 0)
    }

    pub fn uses(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(x) => *x == v,
            Expr::Bin(_, a, b) => a.uses(v) || b.uses(v),
            Expr::Exp(a) => a.uses(v),
        }
    }

    pub fn parse(text: &str) -> Result<Expr, String> {
        let tokens = tokenize(text)?;
        let mut p = Parser { tokens, pos: 0, depth: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(format!("unexpected `{}`", p.tokens[p.pos]));
        }
        Ok(e)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.node_count() > MAX_NODES {
            return Err(format!("expression has more than {MAX_NODES} nodes"));
        }
        let mut bad = None;
        self.visit_consts(&mut |c| {
            if !c.is_finite() || *c < 0.0 {
                bad = Some(*c);
            }
        });
        if let Some(c) = bad {
            return Err(format!("constant {c} must be finite and non-negative"));
        }
        CostProgram::compile(self).map(|_| ())
    }

    fn write(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Exp(a) => {
                f.write_str("exp(")?;
                a.write(f)?;
                f.write_str(")")
            }
            Expr::Bin(op, a, b) if op.is_function() => {
                write!(f, "{}(", op.symbol())?;
                a.write(f)?;
                f.write_str(", ")?;
                b.write(f)?;
                f.write_str(")")
            }
            Expr::Bin(op, a, b) => {
                let prec = op.precedence();
                let wrap_left = matches!(**a, Expr::Bin(o, ..) if !o.is_function() && o.precedence() < prec);
                let wrap_right = matches!(**b, Expr::Bin(o, ..) if !o.is_function() && o.precedence() <= prec);
                write_wrapped(f, a, wrap_left)?;
                write!(f, " {} ", op.symbol())?;
                write_wrapped(f, b, wrap_right)
            }
        }
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        f.write_str("(")?;
        e.write(f)?;
        f.write_str(")")
    } else {
        e.write(f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(n) => write!(f, "{n}"),
            Token::Ident(s) => f.write_str(s),
            Token::Sym(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, String> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &text[start..i];
            let n: f64 = s.parse().map_err(|_| format!("bad number `{s}`"))?;
            out.push(Token::Num(n));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token::Ident(text[start..i].to_string()));
        } else if "+-*/(),".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else {
            return Err(format!("unexpected character `{}`", text[i..].chars().next().unwrap_or(c)));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek_sym(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Sym(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.peek_sym() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(match self.tokens.get(self.pos) {
                Some(t) => format!("expected `{c}`, found `{t}`"),
                None => format!("expected `{c}` at end of expression"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::bin(if c == '+' { BinOp::Add } else { BinOp::Sub }, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, String> {
        let mut lhs = self.atom()?;
        while let Some(c @ ('*' | '/')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.atom()?;
            lhs = Expr::bin(if c == '*' { BinOp::Mul } else { BinOp::Div }, lhs, rhs);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, String> {
        self.depth += 1;
        if self.depth > MAX_NODES {
            return Err("expression is nested too deeply".into());
        }
        let r = self.atom_inner();
        self.depth -= 1;
        r
    }

    fn atom_inner(&mut self) -> Result<Expr, String> {
        let tok = self.tokens.get(self.pos).cloned().ok_or("unexpected end of expression")?;
        self.pos += 1;
        match tok {
            Token::Num(n) => Ok(Expr::Const(n)),
            Token::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Ident(name) => {
                let op = match name.as_str() {
                    "min" => Some(BinOp::Min),
                    "max" => Some(BinOp::Max),
                    "pow" => Some(BinOp::Pow),
                    "exp" => None,
                    _ => return Var::from_name(&name).map(Expr::Var).ok_or_else(|| format!("unknown variable `{name}`")),
                };
                self.expect('(')?;
                let a = self.expr()?;
                let e = match op {
                    Some(op) => {
                        self.expect(',')?;
                        let b = self.expr()?;
                        Expr::bin(op, a, b)
                    }
                    None => Expr::Exp(Box::new(a)),
                };
                self.expect(')')?;
                Ok(e)
            }
            Token::Sym(c) => Err(format!("unexpected `{c}`")),
        }
    }
}

/// Values bound to the expression variables for one edge.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EdgeVars {
    pub demand: f64,
    pub cap: f64,
    pub overflow_excess: f64,
    pub pin_density: f64,
    pub base_len: f64,
    pub via_penalty: f64,
    pub history: f64,
}

impl EdgeVars {
    pub fn get(&self, v: Var) -> f64 {
        match v {
            Var::Demand => self.demand,
            Var::Cap => self.cap,
            Var::OverflowExcess => self.overflow_excess,
            Var::PinDensity => self.pin_density,
            Var::BaseLen => self.base_len,
            Var::ViaPenalty => self.via_penalty,
            Var::History => self.history,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Push(f64),
    Load(Var),
    Bin(BinOp),
    Exp,
}

/// Postfix form of an [`Expr`] evaluated on a fixed-size stack.
#[derive(Clone, Debug, PartialEq)]
pub struct CostProgram {
    ops: Vec<Op>,
}

impl CostProgram {
    pub fn compile(e: &Expr) -> Result<CostProgram, String> {
        fn emit(e: &Expr, ops: &mut Vec<Op>) {
            match e {
                Expr::Const(c) => ops.push(Op::Push(*c)),
                Expr::Var(v) => ops.push(Op::Load(*v)),
                Expr::Bin(op, a, b) => {
                    emit(a, ops);
                    emit(b, ops);
                    ops.push(Op::Bin(*op));
                }
                Expr::Exp(a) => {
                    emit(a, ops);
                    ops.push(Op::Exp);
                }
            }
        }
        let mut ops = Vec::new();
        emit(e, &mut ops);
        let mut depth = 0usize;
        for op in &ops {
            match op {
                Op::Push(_) | Op::Load(_) => depth += 1,
                Op::Bin(_) => depth -= 1,
                Op::Exp => {}
            }
            if depth > MAX_STACK {
                return Err(format!("expression needs more than {MAX_STACK} stack slots"));
            }
        }
        Ok(CostProgram { ops })
    }

    pub fn eval(&self, vars: &EdgeVars) -> f64 {
        let mut stack = [0.0f64; MAX_STACK];
        let mut sp = 0;
        for op in &self.ops {
            match *op {
                Op::Push(c) => {
                    stack[sp] = c;
                    sp += 1;
                }
                Op::Load(v) => {
                    stack[sp] = vars.get(v);
                    sp += 1;
                }
                Op::Bin(b) => {
                    sp -= 1;
                    stack[sp - 1] = b.apply(stack[sp - 1], stack[sp]);
                }
                Op::Exp => stack[sp - 1] = exp_clamped(stack[sp - 1]),
            }
        }
        clamp_final(stack[0])
    }
}
