//! Generator mini-language.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?            right-associative
//! atom   := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Functions: `exp log ln log2 log10 sqrt floor ceil abs`. Constants `e` and `pi` unless
//! rebound. The free variables are `k` or `n` (the index) and `n_k` (the position
//! sequence, in `s` and `t` generators); any other name must be supplied as a parameter.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::value::Val;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Func {
    Exp,
    Ln,
    Log2,
    Log10,
    Sqrt,
    Floor,
    Ceil,
    Abs,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Ln,
            "log2" => Func::Log2,
            "log10" => Func::Log10,
            "sqrt" => Func::Sqrt,
            "floor" => Func::Floor,
            "ceil" => Func::Ceil,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "log",
            Func::Log2 => "log2",
            Func::Log10 => "log10",
            Func::Sqrt => "sqrt",
            Func::Floor => "floor",
            Func::Ceil => "ceil",
            Func::Abs => "abs",
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Bin(op, a, b) => {
                let o = match op {
                    Op::Add => "+",
                    Op::Sub => "-",
                    Op::Mul => "*",
                    Op::Div => "/",
                    Op::Pow => "^",
                };
                write!(f, "({a}{o}{b})")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Sym(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E6
            if i < cs.len() && (cs[i] == 'e' || cs[i] == 'E') {
                let mut j = i + 1;
                if j < cs.len() && (cs[j] == '+' || cs[j] == '-') {
                    j += 1;
                }
                if j < cs.len() && cs[j].is_ascii_digit() {
                    while j < cs.len() && cs[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let txt: String = cs[st..i].iter().collect();
            let v: f64 = txt
                .parse()
                .map_err(|_| Error::Parse(format!("bad number '{txt}'")))?;
            out.push(Tok::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Name(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Name(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| Error::Parse(format!("unknown function '{name}'")))?;
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err(Error::Parse(format!("missing ')' after {name}(")));
                    }
                    Ok(Expr::Call(func, Box::new(arg)))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            Some(t) => Err(Error::Parse(format!("unexpected token {t:?}"))),
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}

impl Expr {
    pub fn parse(s: &str) -> Result<Expr> {
        let toks = lex(s)?;
        if toks.is_empty() {
            return Err(Error::Parse("empty expression".into()));
        }
        let mut p = Parser { toks, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!(
                "trailing input after position {} in '{s}'",
                p.pos
            )));
        }
        Ok(e)
    }

    /// Names referenced by the expression.
    pub fn free_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.free_vars(out),
            Expr::Bin(_, a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
        }
    }

    pub fn eval(&self, env: &Env) -> Result<Val> {
        Ok(match self {
            Expr::Num(x) => Val::from_f64(*x),
            Expr::Var(v) => env.get(v)?,
            Expr::Neg(a) => a.eval(env)?.neg(),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(env)?, b.eval(env)?);
                match op {
                    Op::Add => x.add(&y),
                    Op::Sub => x.sub(&y),
                    Op::Mul => x.mul(&y),
                    Op::Div => {
                        if y.is_zero() {
                            return Err(Error::domain(format!("division by zero in {self}")));
                        }
                        x.div(&y)
                    }
                    Op::Pow => x
                        .pow(&y)
                        .ok_or_else(|| Error::domain(format!("undefined power in {self}")))?,
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(env)?;
                let need_pos = || Error::domain(format!("{}() of a nonpositive value", f.name()));
                match f {
                    Func::Exp => x.exp(),
                    Func::Ln => x.ln_val().ok_or_else(need_pos)?,
                    Func::Log2 if matches!(x, Val::Plain(v) if v > 0.0) => Val::from_f64(x.to_f64().log2()),
                    Func::Log10 if matches!(x, Val::Plain(v) if v > 0.0) => Val::from_f64(x.to_f64().log10()),
                    Func::Log2 => x
                        .ln_val()
                        .ok_or_else(need_pos)?
                        .div(&Val::from_f64(std::f64::consts::LN_2)),
                    Func::Log10 => x
                        .ln_val()
                        .ok_or_else(need_pos)?
                        .div(&Val::from_f64(std::f64::consts::LN_10)),
                    Func::Sqrt => {
                        if x.sign() < 0 {
                            return Err(Error::domain("sqrt() of a negative value"));
                        }
                        if let Val::Plain(v) = x {
                            Val::from_f64(v.sqrt())
                        } else {
                            x.pow(&Val::from_f64(0.5)).ok_or_else(need_pos)?
                        }
                    }
                    Func::Floor => x.floor(),
                    Func::Ceil => x.ceil(),
                    Func::Abs => {
                        if x.sign() < 0 {
                            x.neg()
                        } else {
                            x
                        }
                    }
                }
            }
        })
    }
}

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Default)]
pub struct Env {
    vars: BTreeMap<String, Val>,
}

impl Env {
    pub fn new(params: &BTreeMap<String, f64>) -> Env {
        let mut vars = BTreeMap::new();
        vars.insert("e".to_string(), Val::from_f64(std::f64::consts::E));
        vars.insert("pi".to_string(), Val::from_f64(std::f64::consts::PI));
        for (k, v) in params {
            vars.insert(k.clone(), Val::from_f64(*v));
        }
        Env { vars }
    }

    pub fn set(&mut self, name: &str, v: Val) {
        self.vars.insert(name.to_string(), v);
    }

    pub fn get(&self, name: &str) -> Result<Val> {
        self.vars
            .get(name)
            .copied()
            .ok_or_else(|| Error::domain(format!("unbound name '{name}'")))
    }
}

/// Opaque generator signature: index or argument to value.
pub type Callable = Arc<dyn Fn(f64) -> Result<Val> + Send + Sync>;

/// A sequence or function given either as an expression or as a closure.
#[derive(Clone)]
pub enum Generator {
    Expr {
        expr: Expr,
        params: BTreeMap<String, f64>,
        source: String,
    },
    Opaque {
        label: String,
        f: Callable,
    },
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Generator({})", self.label())
    }
}

impl Generator {
    /// Parses `src` with named constants `params`.
    pub fn parse(src: &str, params: &BTreeMap<String, f64>) -> Result<Generator> {
        Ok(Generator::Expr {
            expr: Expr::parse(src)?,
            params: params.clone(),
            source: src.to_string(),
        })
    }

    pub fn parse_plain(src: &str) -> Result<Generator> {
        Generator::parse(src, &BTreeMap::new())
    }

    pub fn opaque(label: impl Into<String>, f: impl Fn(f64) -> Result<Val> + Send + Sync + 'static) -> Generator {
        Generator::Opaque {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Generator::Expr { source, .. } => source.clone(),
            Generator::Opaque { label, .. } => label.clone(),
        }
    }

    /// Value at index/argument `x`, with `n_k` bound when given.
    pub fn eval_with(&self, x: f64, n_k: Option<Val>) -> Result<Val> {
        match self {
            Generator::Expr { expr, params, .. } => {
                let mut env = Env::new(params);
                let xv = Val::from_f64(x);
                env.set("k", xv);
                env.set("n", xv);
                if let Some(nk) = n_k {
                    env.set("n_k", nk);
                }
                expr.eval(&env)
            }
            Generator::Opaque { f, .. } => f(x),
        }
    }

    pub fn eval(&self, x: f64) -> Result<Val> {
        self.eval_with(x, None)
    }
}
