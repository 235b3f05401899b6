use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{BinOp, Exponent, Func, Node, NodeKind, Span, Var};

/// Failure to turn text into an expression tree.
///
/// `offset` is the 1-based byte position of the offending token; end of
/// input reports one past the last byte.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedToken {
        found: String,
        expected: Vec<&'static str>,
    },
    UnexpectedEnd {
        expected: Vec<&'static str>,
    },
    BadNumber(String),
    UnknownIdentifier(String),
    VariableOutOfRange {
        name: String,
        dim: usize,
    },
    Arity {
        func: &'static str,
        expected: usize,
        found: usize,
    },
    NonConstantExponent,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at offset {}: ", self.offset)?;
        match &self.kind {
            ParseErrorKind::Empty => write!(f, "empty expression"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "unexpected `{found}`, expected one of {expected:?}")
            }
            ParseErrorKind::UnexpectedEnd { expected } => {
                write!(f, "unexpected end of input, expected one of {expected:?}")
            }
            ParseErrorKind::BadNumber(s) => write!(f, "malformed number `{s}`"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier `{s}`"),
            ParseErrorKind::VariableOutOfRange { name, dim } => {
                write!(f, "variable `{name}` out of range for dimension {dim}")
            }
            ParseErrorKind::Arity {
                func,
                expected,
                found,
            } => write!(f, "`{func}` takes {expected} argument(s), got {found}"),
            ParseErrorKind::NonConstantExponent => {
                write!(f, "exponent must be a constant expression")
            }
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => v.to_string(),
            Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, Span::new(start, start + 1)));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s = &text[start..i];
            let v: f64 = s.parse().map_err(|_| ParseError {
                offset: start + 1,
                kind: ParseErrorKind::BadNumber(s.into()),
            })?;
            out.push((Tok::Num(v), Span::new(start, i)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].into()), Span::new(start, i)));
            continue;
        }
        // step over the whole UTF-8 character for the message
        let ch = text[start..].chars().next().unwrap_or('?');
        return Err(ParseError {
            offset: start + 1,
            kind: ParseErrorKind::UnexpectedToken {
                found: ch.to_string(),
                expected: EXPECT_OPERAND.to_vec(),
            },
        });
    }
    out.push((Tok::End, Span::new(text.len(), text.len())));
    Ok(out)
}

const EXPECT_OPERAND: &[&str] = &["number", "identifier", "(", "-"];
const EXPECT_OPERATOR: &[&str] = &["+", "-", "*", "/", "^", ")", ",", "end of input"];

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        let (tok, span) = &self.toks[self.pos];
        let kind = if *tok == Tok::End {
            ParseErrorKind::UnexpectedEnd {
                expected: expected.to_vec(),
            }
        } else {
            ParseErrorKind::UnexpectedToken {
                found: tok.describe(),
                expected: expected.to_vec(),
            }
        };
        ParseError {
            offset: span.start + 1,
            kind,
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let span = lhs.span.join(rhs.span);
            lhs = Node::new(NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    // term := factor (('*'|'/') factor)*
    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            let span = lhs.span.join(rhs.span);
            lhs = Node::new(NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    // factor := '-' factor | base ('^' exponent)?
    fn factor(&mut self) -> Result<Node, ParseError> {
        if *self.peek() == Tok::Minus {
            let (_, s) = self.bump();
            let inner = self.factor()?;
            let span = s.join(inner.span);
            return Ok(Node::new(NodeKind::Neg(Box::new(inner)), span));
        }
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let (exp, espan) = self.exponent()?;
            let span = base.span.join(espan);
            return Ok(Node::new(NodeKind::Pow(Box::new(base), exp), span));
        }
        Ok(base)
    }

    // exponent := '-'? (number | '(' expr ')'), constant-folded
    fn exponent(&mut self) -> Result<(Exponent, Span), ParseError> {
        let start = self.span();
        let node = match self.peek() {
            Tok::Minus => {
                self.bump();
                let inner = self.exponent_atom()?;
                let span = start.join(inner.span);
                Node::new(NodeKind::Neg(Box::new(inner)), span)
            }
            _ => self.exponent_atom()?,
        };
        let v = node.fold_constant().ok_or(ParseError {
            offset: start.start + 1,
            kind: ParseErrorKind::NonConstantExponent,
        })?;
        Ok((Exponent::from_value(v), node.span))
    }

    fn exponent_atom(&mut self) -> Result<Node, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                let (_, s) = self.bump();
                Ok(Node::new(NodeKind::Const(v), s))
            }
            Tok::LParen => {
                let (_, s) = self.bump();
                let inner = self.expr()?;
                let e = self.expect(Tok::RParen, ")")?;
                Ok(Node::new(inner.kind, s.join(e)))
            }
            _ => Err(self.unexpected(&["number", "("])),
        }
    }

    // base := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
    fn base(&mut self) -> Result<Node, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                let (_, s) = self.bump();
                Ok(Node::new(NodeKind::Const(v), s))
            }
            Tok::LParen => {
                let (_, s) = self.bump();
                let inner = self.expr()?;
                let e = self.expect(Tok::RParen, ")")?;
                Ok(Node::new(inner.kind, s.join(e)))
            }
            Tok::Ident(name) => {
                let (_, s) = self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = alloc::vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    let e = self.expect(Tok::RParen, ")")?;
                    self.call(&name, s, args, s.join(e))
                } else {
                    self.ident(&name, s)
                }
            }
            _ => Err(self.unexpected(EXPECT_OPERAND)),
        }
    }

    fn ident(&self, name: &str, span: Span) -> Result<Node, ParseError> {
        match name {
            "pi" => return Ok(Node::new(NodeKind::Const(core::f64::consts::PI), span)),
            "e" => return Ok(Node::new(NodeKind::Const(core::f64::consts::E), span)),
            _ => {}
        }
        let (head, digits) = name.split_at(1);
        let is_var = (head == "x" || head == "y")
            && !digits.is_empty()
            && digits.bytes().all(|b| b.is_ascii_digit());
        if !is_var {
            return Err(ParseError {
                offset: span.start + 1,
                kind: ParseErrorKind::UnknownIdentifier(name.into()),
            });
        }
        let out_of_range = || ParseError {
            offset: span.start + 1,
            kind: ParseErrorKind::VariableOutOfRange {
                name: name.into(),
                dim: self.dim,
            },
        };
        let idx: usize = digits.parse().map_err(|_| out_of_range())?;
        if idx == 0 || idx > self.dim {
            return Err(out_of_range());
        }
        let var = if head == "x" {
            Var::X(idx - 1)
        } else {
            Var::Y(idx - 1)
        };
        Ok(Node::new(NodeKind::Var(var), span))
    }

    fn call(
        &self,
        name: &str,
        name_span: Span,
        mut args: Vec<Node>,
        span: Span,
    ) -> Result<Node, ParseError> {
        let arity = |func: &'static str, expected: usize, found: usize| ParseError {
            offset: name_span.start + 1,
            kind: ParseErrorKind::Arity {
                func,
                expected,
                found,
            },
        };
        if name == "pow" {
            if args.len() != 2 {
                return Err(arity("pow", 2, args.len()));
            }
            let exp_node = args.pop().unwrap();
            let v = exp_node.fold_constant().ok_or(ParseError {
                offset: exp_node.span.start + 1,
                kind: ParseErrorKind::NonConstantExponent,
            })?;
            let base = args.pop().unwrap();
            return Ok(Node::new(
                NodeKind::Pow(Box::new(base), Exponent::from_value(v)),
                span,
            ));
        }
        let func = Func::from_name(name).ok_or(ParseError {
            offset: name_span.start + 1,
            kind: ParseErrorKind::UnknownIdentifier(name.into()),
        })?;
        if args.len() != 1 {
            return Err(arity(func.name(), 1, args.len()));
        }
        Ok(Node::new(NodeKind::Call(func, args), span))
    }
}

pub(super) fn parse_node(text: &str, dim: usize) -> Result<Node, ParseError> {
    let toks = lex(text)?;
    if toks.len() == 1 {
        return Err(ParseError {
            offset: 1,
            kind: ParseErrorKind::Empty,
        });
    }
    let mut p = Parser { toks, pos: 0, dim };
    let node = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(EXPECT_OPERATOR));
    }
    Ok(node)
}
