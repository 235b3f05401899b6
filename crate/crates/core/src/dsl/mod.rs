//! Metric and projective-factor expressions.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := '-' factor | base ('^' exponent)?
//! exponent := '-'? (number | '(' expr ')')        constant only
//! base     := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Identifiers are `x1..xn`, `y1..yn`, the constants `pi` and `e`, and the
//! functions `sqrt exp log sin cos tan` plus `pow(base, constant)`.

mod catalog;
mod parser;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use catalog::{
    catalog, catalog_names, factor, factor_names, Domain, DomainShape, FactorSpec, MetricSpec,
};
pub use parser::{ParseError, ParseErrorKind};

use crate::error::{Error, Result};
use crate::jet::Scalar;

/// Byte range of a sub-expression in the source text (0-based, end exclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Y(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
        }
    }
}

/// Exponent of `^`. Integral values use repeated multiplication, which keeps
/// negative bases legal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Int(i32),
    Real(f64),
}

impl Exponent {
    fn from_value(v: f64) -> Exponent {
        if libm::trunc(v) == v && v.abs() <= i32::MAX as f64 {
            Exponent::Int(v as i32)
        } else {
            Exponent::Real(v)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
}

/// Equality is structural; source spans are ignored.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Const(f64),
    Var(Var),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, Exponent),
    Call(Func, Vec<Node>),
}

impl Node {
    fn new(kind: NodeKind, span: Span) -> Self {
        Node { kind, span }
    }

    fn fold_constant(&self) -> Option<f64> {
        if self.has_vars() {
            return None;
        }
        self.eval::<f64>(&[], &[]).ok()
    }

    fn has_vars(&self) -> bool {
        match &self.kind {
            NodeKind::Const(_) => false,
            NodeKind::Var(_) => true,
            NodeKind::Neg(a) | NodeKind::Pow(a, _) => a.has_vars(),
            NodeKind::Binary(_, a, b) => a.has_vars() || b.has_vars(),
            NodeKind::Call(_, args) => args.iter().any(Node::has_vars),
        }
    }

    fn mentions_x(&self) -> bool {
        match &self.kind {
            NodeKind::Const(_) => false,
            NodeKind::Var(v) => matches!(v, Var::X(_)),
            NodeKind::Neg(a) | NodeKind::Pow(a, _) => a.mentions_x(),
            NodeKind::Binary(_, a, b) => a.mentions_x() || b.mentions_x(),
            NodeKind::Call(_, args) => args.iter().any(Node::mentions_x),
        }
    }

    fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        let out = match &self.kind {
            NodeKind::Const(c) => return Ok(T::from(*c)),
            NodeKind::Var(Var::X(i)) => return Ok(x[*i].clone()),
            NodeKind::Var(Var::Y(i)) => return Ok(y[*i].clone()),
            NodeKind::Neg(a) => return Ok(-a.eval(x, y)?),
            NodeKind::Binary(op, a, b) => {
                let a = a.eval(x, y)?;
                let b = b.eval(x, y)?;
                match op {
                    BinOp::Add => return Ok(a + b),
                    BinOp::Sub => return Ok(a - b),
                    BinOp::Mul => return Ok(a * b),
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(self.domain("division", b.value()));
                        }
                        a / b
                    }
                }
            }
            NodeKind::Pow(a, e) => {
                let a = a.eval(x, y)?;
                match *e {
                    Exponent::Int(k) => {
                        if k < 0 && a.value() == 0.0 {
                            return Err(self.domain("negative power", a.value()));
                        }
                        a.powi(k)
                    }
                    Exponent::Real(r) => {
                        if a.value() < 0.0 {
                            return Err(self.domain("fractional power", a.value()));
                        }
                        a.powf(r)
                    }
                }
            }
            NodeKind::Call(f, args) => {
                let a = args[0].eval(x, y)?;
                match f {
                    Func::Sqrt if a.value() < 0.0 => {
                        return Err(self.domain("sqrt", a.value()));
                    }
                    Func::Log if a.value() <= 0.0 => {
                        return Err(self.domain("log", a.value()));
                    }
                    _ => {}
                }
                match f {
                    Func::Sqrt => a.sqrt(),
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                }
            }
        };
        if out.all_finite() {
            Ok(out)
        } else {
            Err(Error::NonFinite { span: self.span })
        }
    }

    fn domain(&self, func: &'static str, value: f64) -> Error {
        Error::Domain {
            func,
            value,
            span: self.span,
        }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            NodeKind::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            NodeKind::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            NodeKind::Neg(_) => 3,
            NodeKind::Pow(..) => 4,
            NodeKind::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => 3,
            _ => 5,
        }
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, node: &Node, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({node})")
    } else {
        write!(f, "{node}")
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NodeKind::Const(c) => write!(f, "{c}"),
            NodeKind::Var(Var::X(i)) => write!(f, "x{}", i + 1),
            NodeKind::Var(Var::Y(i)) => write!(f, "y{}", i + 1),
            NodeKind::Neg(a) => {
                f.write_str("-")?;
                write_wrapped(f, a, a.precedence() < 3)
            }
            NodeKind::Binary(op, a, b) => {
                let p = self.precedence();
                let sym = match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => " * ",
                    BinOp::Div => " / ",
                };
                write_wrapped(f, a, a.precedence() < p)?;
                f.write_str(sym)?;
                write_wrapped(f, b, b.precedence() <= p)
            }
            NodeKind::Pow(a, e) => {
                write_wrapped(f, a, a.precedence() < 5)?;
                match e {
                    Exponent::Int(k) if *k >= 0 => write!(f, "^{k}"),
                    Exponent::Int(k) => write!(f, "^({k})"),
                    Exponent::Real(r) => write!(f, "^({r})"),
                }
            }
            NodeKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A parsed expression in the variables `x1..xn`, `y1..yn`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    dim: usize,
}

impl Expr {
    pub fn parse(text: &str, dim: usize) -> core::result::Result<Expr, ParseError> {
        let root = parser::parse_node(text, dim)?;
        Ok(Expr { root, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// True if the expression never reads a base coordinate.
    pub fn is_fiber_only(&self) -> bool {
        !self.root.mentions_x()
    }

    /// Evaluates at `(x, y)`. The same code runs for `f64` and for jets.
    pub fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: x.len().min(y.len()),
            });
        }
        self.root.eval(x, y)
    }

    /// Evaluates at a stacked phase point `z = (x, y)` of length `2n`.
    pub fn eval_point<T: Scalar>(&self, z: &[T]) -> Result<T> {
        if z.len() != 2 * self.dim {
            return Err(Error::DimMismatch {
                expected: 2 * self.dim,
                found: z.len(),
            });
        }
        self.root.eval(&z[..self.dim], &z[self.dim..])
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

/// Pretty-prints `expr`; the result re-parses to an equal tree.
pub fn print(expr: &Expr) -> String {
    use alloc::string::ToString;
    expr.to_string()
}
