//! A small infix expression language over point coordinates.
//!
//! Used for region predicates of piecewise Hamiltonians, interior predicates
//! of domains, and analytic boundary data. Grammar, lowest precedence first:
//!
//! ```text
//! or      := and ( "||" and )*
//! and     := not ( "&&" not )*
//! not     := "!" not | cmp
//! cmp     := sum ( ("<" | "<=" | ">" | ">=" | "==" | "!=") sum )?
//! sum     := product ( ("+" | "-") product )*
//! product := unary ( ("*" | "/") unary )*
//! unary   := "-" unary | power
//! power   := atom ( "^" unary )?
//! atom    := number | "true" | "false" | "pi" | var | func "(" args ")" | "(" or ")"
//! var     := ("x" | "y") digits          (1-based coordinate index)
//! ```
//!
//! Expressions are type-checked when parsed: a [`Predicate`] must be boolean
//! and a [`Formula`] must be numeric.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Ident(usize, usize),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Not,
    And,
    Or,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset: usize, msg: &str| Error::Parse { offset, msg: msg.to_string() };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let two = |next: u8| bytes.get(i + 1) == Some(&next);
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'&' if two(b'&') => {
                i += 1;
                Tok::And
            }
            b'|' if two(b'|') => {
                i += 1;
                Tok::Or
            }
            b'<' if two(b'=') => {
                i += 1;
                Tok::Le
            }
            b'>' if two(b'=') => {
                i += 1;
                Tok::Ge
            }
            b'=' if two(b'=') => {
                i += 1;
                Tok::Eq
            }
            b'!' if two(b'=') => {
                i += 1;
                Tok::Ne
            }
            b'<' => Tok::Lt,
            b'>' => Tok::Gt,
            b'!' => Tok::Not,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == b'.'
                        || bytes[i] == b'e'
                        || bytes[i] == b'E'
                        || ((bytes[i] == b'-' || bytes[i] == b'+')
                            && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E')))
                {
                    i += 1;
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| err(start, "malformed number"))?;
                out.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(start, i)));
                continue;
            }
            _ => return Err(err(start, "unexpected character")),
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Abs,
    Sqrt,
    Sin,
    Cos,
    Exp,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "abs" => (Func::Abs, 1),
            "sqrt" => (Func::Sqrt, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "exp" => (Func::Exp, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Bool(bool),
    Var(usize),
    Neg(Box<Node>),
    Not(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Num,
    Bool,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    max_var: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).map(|t| t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.src.len())
    }

    fn fail<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse { offset: self.offset(), msg: msg.to_string() })
    }

    fn expect_ty(&self, ty: Ty, want: Ty, what: &str) -> Result<()> {
        if ty == want {
            Ok(())
        } else {
            self.fail(&format!("{what} expects a {} operand", if want == Ty::Num { "numeric" } else { "boolean" }))
        }
    }

    fn or(&mut self) -> Result<(Node, Ty)> {
        let (mut lhs, mut ty) = self.and()?;
        while self.peek() == Some(Tok::Or) {
            self.expect_ty(ty, Ty::Bool, "`||`")?;
            self.pos += 1;
            let (rhs, rty) = self.and()?;
            self.expect_ty(rty, Ty::Bool, "`||`")?;
            lhs = Node::Bin(BinOp::Or, Box::new(lhs), Box::new(rhs));
            ty = Ty::Bool;
        }
        Ok((lhs, ty))
    }

    fn and(&mut self) -> Result<(Node, Ty)> {
        let (mut lhs, mut ty) = self.not()?;
        while self.peek() == Some(Tok::And) {
            self.expect_ty(ty, Ty::Bool, "`&&`")?;
            self.pos += 1;
            let (rhs, rty) = self.not()?;
            self.expect_ty(rty, Ty::Bool, "`&&`")?;
            lhs = Node::Bin(BinOp::And, Box::new(lhs), Box::new(rhs));
            ty = Ty::Bool;
        }
        Ok((lhs, ty))
    }

    fn not(&mut self) -> Result<(Node, Ty)> {
        if self.peek() == Some(Tok::Not) {
            self.pos += 1;
            let (inner, ty) = self.not()?;
            self.expect_ty(ty, Ty::Bool, "`!`")?;
            return Ok((Node::Not(Box::new(inner)), Ty::Bool));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<(Node, Ty)> {
        let (lhs, ty) = self.sum()?;
        let op = match self.peek() {
            Some(Tok::Lt) => BinOp::Lt,
            Some(Tok::Le) => BinOp::Le,
            Some(Tok::Gt) => BinOp::Gt,
            Some(Tok::Ge) => BinOp::Ge,
            Some(Tok::Eq) => BinOp::Eq,
            Some(Tok::Ne) => BinOp::Ne,
            _ => return Ok((lhs, ty)),
        };
        self.expect_ty(ty, Ty::Num, "comparison")?;
        self.pos += 1;
        let (rhs, rty) = self.sum()?;
        self.expect_ty(rty, Ty::Num, "comparison")?;
        Ok((Node::Bin(op, Box::new(lhs), Box::new(rhs)), Ty::Bool))
    }

    fn sum(&mut self) -> Result<(Node, Ty)> {
        let (mut lhs, mut ty) = self.product()?;
        while let Some(op @ (Tok::Plus | Tok::Minus)) = self.peek() {
            self.expect_ty(ty, Ty::Num, "arithmetic")?;
            self.pos += 1;
            let (rhs, rty) = self.product()?;
            self.expect_ty(rty, Ty::Num, "arithmetic")?;
            let op = if op == Tok::Plus { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
            ty = Ty::Num;
        }
        Ok((lhs, ty))
    }

    fn product(&mut self) -> Result<(Node, Ty)> {
        let (mut lhs, mut ty) = self.unary()?;
        while let Some(op @ (Tok::Star | Tok::Slash)) = self.peek() {
            self.expect_ty(ty, Ty::Num, "arithmetic")?;
            self.pos += 1;
            let (rhs, rty) = self.unary()?;
            self.expect_ty(rty, Ty::Num, "arithmetic")?;
            let op = if op == Tok::Star { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
            ty = Ty::Num;
        }
        Ok((lhs, ty))
    }

    fn unary(&mut self) -> Result<(Node, Ty)> {
        if self.peek() == Some(Tok::Minus) {
            self.pos += 1;
            let (inner, ty) = self.unary()?;
            self.expect_ty(ty, Ty::Num, "negation")?;
            return Ok((Node::Neg(Box::new(inner)), Ty::Num));
        }
        self.power()
    }

    fn power(&mut self) -> Result<(Node, Ty)> {
        let (base, ty) = self.atom()?;
        if self.peek() == Some(Tok::Caret) {
            self.expect_ty(ty, Ty::Num, "`^`")?;
            self.pos += 1;
            let (exp, ety) = self.unary()?;
            self.expect_ty(ety, Ty::Num, "`^`")?;
            return Ok((Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)), Ty::Num));
        }
        Ok((base, ty))
    }

    fn atom(&mut self) -> Result<(Node, Ty)> {
        let Some(tok) = self.peek() else {
            return self.fail("unexpected end of expression");
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok((Node::Num(v), Ty::Num))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.or()?;
                if self.peek() != Some(Tok::RParen) {
                    return self.fail("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Tok::Ident(s, e) => {
                let name = &self.src[s..e];
                self.pos += 1;
                match name {
                    "true" => return Ok((Node::Bool(true), Ty::Bool)),
                    "false" => return Ok((Node::Bool(false), Ty::Bool)),
                    "pi" => return Ok((Node::Num(std::f64::consts::PI), Ty::Num)),
                    _ => {}
                }
                if let Some((func, arity)) = Func::lookup(name) {
                    if self.peek() != Some(Tok::LParen) {
                        return self.fail("expected `(` after function name");
                    }
                    self.pos += 1;
                    let mut args = Vec::with_capacity(arity);
                    loop {
                        let (arg, ty) = self.or()?;
                        self.expect_ty(ty, Ty::Num, name)?;
                        args.push(arg);
                        match self.peek() {
                            Some(Tok::Comma) => self.pos += 1,
                            Some(Tok::RParen) => {
                                self.pos += 1;
                                break;
                            }
                            _ => return self.fail("expected `,` or `)`"),
                        }
                    }
                    if args.len() != arity {
                        return self.fail(&format!("`{name}` takes {arity} argument(s)"));
                    }
                    return Ok((Node::Call(func, args), Ty::Num));
                }
                let index = name
                    .strip_prefix('x')
                    .or_else(|| name.strip_prefix('y'))
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&i| i >= 1);
                match index {
                    Some(i) => {
                        self.max_var = self.max_var.max(i);
                        Ok((Node::Var(i - 1), Ty::Num))
                    }
                    None => Err(Error::Parse { offset: s, msg: format!("unknown identifier `{name}`") }),
                }
            }
            _ => self.fail("unexpected token"),
        }
    }
}

fn parse(src: &str) -> Result<(Node, Ty, usize)> {
    let toks = tokenize(src)?;
    let mut p = Parser { src, toks, pos: 0, max_var: 0 };
    let (node, ty) = p.or()?;
    if p.pos != p.toks.len() {
        return p.fail("trailing input");
    }
    Ok((node, ty, p.max_var))
}

fn eval_num(node: &Node, x: &[f64]) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Var(i) => x[*i],
        Node::Neg(a) => -eval_num(a, x),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval_num(a, x), eval_num(b, x));
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
                BinOp::Pow => a.powf(b),
                _ => unreachable!("type-checked at parse time"),
            }
        }
        Node::Call(f, args) => {
            let a = eval_num(&args[0], x);
            match f {
                Func::Abs => a.abs(),
                Func::Sqrt => a.sqrt(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Min => a.min(eval_num(&args[1], x)),
                Func::Max => a.max(eval_num(&args[1], x)),
            }
        }
        Node::Bool(_) | Node::Not(_) => unreachable!("type-checked at parse time"),
    }
}

fn eval_bool(node: &Node, x: &[f64]) -> bool {
    match node {
        Node::Bool(b) => *b,
        Node::Not(a) => !eval_bool(a, x),
        Node::Bin(BinOp::And, a, b) => eval_bool(a, x) && eval_bool(b, x),
        Node::Bin(BinOp::Or, a, b) => eval_bool(a, x) || eval_bool(b, x),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval_num(a, x), eval_num(b, x));
            match op {
                BinOp::Lt => a < b,
                BinOp::Le => a <= b,
                BinOp::Gt => a > b,
                BinOp::Ge => a >= b,
                BinOp::Eq => a == b,
                BinOp::Ne => a != b,
                _ => unreachable!("type-checked at parse time"),
            }
        }
        _ => unreachable!("type-checked at parse time"),
    }
}

/// A boolean expression over coordinates, e.g. `x1 < 0 && !(x2 >= 0.5)`.
#[derive(Clone)]
pub struct Predicate {
    src: String,
    root: Node,
    arity: usize,
}

impl Predicate {
    pub fn parse(src: &str) -> Result<Self> {
        let (root, ty, arity) = parse(src)?;
        if ty != Ty::Bool {
            return Err(Error::Parse { offset: 0, msg: "predicate must be boolean".into() });
        }
        Ok(Predicate { src: src.to_string(), root, arity })
    }

    pub fn always() -> Self {
        Predicate { src: "true".into(), root: Node::Bool(true), arity: 0 }
    }

    /// Number of coordinates the expression refers to (largest index used).
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    /// Panics if `x` is shorter than [`Predicate::arity`]; callers check arity once at setup.
    pub fn eval(&self, x: &[f64]) -> bool {
        eval_bool(&self.root, x)
    }
}

/// A numeric expression over coordinates, e.g. `10 * x1` or `min(x1, 1 - x1)`.
#[derive(Clone)]
pub struct Formula {
    src: String,
    root: Node,
    arity: usize,
}

impl Formula {
    pub fn parse(src: &str) -> Result<Self> {
        let (root, ty, arity) = parse(src)?;
        if ty != Ty::Num {
            return Err(Error::Parse { offset: 0, msg: "formula must be numeric".into() });
        }
        Ok(Formula { src: src.to_string(), root, arity })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        eval_num(&self.root, x)
    }
}

macro_rules! expr_common {
    ($t:ty) => {
        impl fmt::Debug for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:?})", stringify!($t), self.src)
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.src)
            }
        }

        impl PartialEq for $t {
            fn eq(&self, other: &Self) -> bool {
                self.root == other.root
            }
        }

        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(&self.src)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let src = String::deserialize(d)?;
                <$t>::parse(&src).map_err(serde::de::Error::custom)
            }
        }
    };
}

expr_common!(Predicate);
expr_common!(Formula);
