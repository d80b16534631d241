//! A small expression language for right-hand sides `f(t, x)`.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-'? power
//! power  := atom ('^' factor)?
//! atom   := number | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-2^2`
//! is `-4` and `2^3^2` is `2^9`. Variables are `t`, `x` and `alpha`; the
//! functions are `sin cos exp ln sqrt abs gamma` (one argument) and `pow`
//! (two arguments).

use std::fmt;

use thiserror::Error;

use crate::special::gamma;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    T,
    X,
    Alpha,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::Alpha => "alpha",
        }
    }

    fn lookup(name: &str) -> Option<Self> {
        match name {
            "t" => Some(Var::T),
            "x" => Some(Var::X),
            "alpha" => Some(Var::Alpha),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Gamma,
    Pow,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Gamma => "gamma",
            Func::Pow => "pow",
        }
    }

    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "gamma" => Func::Gamma,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Func,
        args: Vec<Expr>,
    },
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("`{func}` at offset {offset} takes {expected} argument(s), got {found}")]
    Arity {
        offset: usize,
        func: &'static str,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::Arity { offset, .. } => *offset,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("cannot evaluate `{expr}`: {reason}")]
pub struct EvalError {
    pub expr: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
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
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

const EXPECT_FACTOR: &[&str] = &["number", "identifier", "`(`", "`-`"];
const EXPECT_OPERAND: &[&str] = &["number", "identifier", "`(`"];

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
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
                let text = &src[start..i];
                let value = text.parse::<f64>().map_err(|_| ParseError::Syntax {
                    offset: start,
                    expected: vec!["number"],
                    found: format!("`{text}`"),
                })?;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: EXPECT_FACTOR.to_vec(),
                    found: format!("character `{ch}`"),
                });
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().describe(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                let inner = self.power()?;
                Ok(Expr::Neg(Box::new(inner)))
            }
            Tok::Num(_) | Tok::Ident(_) | Tok::LParen => self.power(),
            _ => Err(self.unexpected(EXPECT_FACTOR)),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected(&["`)`", "operator"]));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                let (_, offset) = self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let args = self.args()?;
                    let func = Func::lookup(&name)
                        .ok_or(ParseError::UnknownIdentifier { offset, name })?;
                    if args.len() != func.arity() {
                        return Err(ParseError::Arity {
                            offset,
                            func: func.name(),
                            expected: func.arity(),
                            found: args.len(),
                        });
                    }
                    Ok(Expr::Call { func, args })
                } else {
                    Var::lookup(&name)
                        .map(Expr::Var)
                        .ok_or(ParseError::UnknownIdentifier { offset, name })
                }
            }
            _ => Err(self.unexpected(EXPECT_OPERAND)),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(args);
                }
                _ => return Err(self.unexpected(&["`,`", "`)`", "operator"])),
            }
        }
    }
}

/// Parses `source` into an expression tree.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(&["operator", "end of input"]));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(v) if *v < 0.0 => 3,
            Expr::Num(_) | Expr::Var(_) | Expr::Call { .. } => 5,
            Expr::Neg(_) => 3,
            Expr::Binary { op, .. } => op.precedence(),
        }
    }

    /// Evaluates with the given bindings for `t`, `x` and `alpha`.
    pub fn evaluate(&self, t: f64, x: f64, alpha: f64) -> Result<f64, EvalError> {
        let fail = |reason: &str| EvalError {
            expr: self.to_string(),
            reason: reason.to_string(),
        };
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::T) => t,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Alpha) => alpha,
            Expr::Neg(e) => -e.evaluate(t, x, alpha)?,
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.evaluate(t, x, alpha)?;
                let b = rhs.evaluate(t, x, alpha)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(fail("division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call { func, args } => {
                let a = args[0].evaluate(t, x, alpha)?;
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(fail("logarithm of a non-positive number"));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(fail("square root of a negative number"));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                    Func::Gamma => {
                        if a <= 0.0 && a == a.floor() {
                            return Err(fail("gamma at a pole"));
                        }
                        gamma(a)
                    }
                    Func::Pow => a.powf(args[1].evaluate(t, x, alpha)?),
                }
            }
        };
        if !v.is_finite() {
            return Err(fail("result is not a finite number"));
        }
        Ok(v)
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, parenthesize: bool) -> fmt::Result {
        if parenthesize {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "-{}", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_child(f, e.precedence() < 4)
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                if *op == BinOp::Pow {
                    lhs.fmt_child(f, lhs.precedence() < 5)?;
                    f.write_str("^")?;
                    rhs.fmt_child(f, rhs.precedence() < 3)
                } else {
                    lhs.fmt_child(f, lhs.precedence() < p)?;
                    write!(f, " {} ", op.symbol())?;
                    rhs.fmt_child(f, rhs.precedence() <= p)
                }
            }
            Expr::Call { func, args } => {
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

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, t: f64, x: f64, alpha: f64) -> f64 {
        parse(src).unwrap().evaluate(t, x, alpha).unwrap()
    }

    #[test]
    fn tree_shape() {
        let e = parse("t + 2*x").unwrap();
        let expected = Expr::binary(
            BinOp::Add,
            Expr::Var(Var::T),
            Expr::binary(BinOp::Mul, Expr::Num(2.0), Expr::Var(Var::X)),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("2+3*4^2", 0.0, 0.0, 0.0), 50.0);
        assert_eq!(eval("-2^2", 0.0, 0.0, 0.0), -4.0);
        assert_eq!(eval("2^3^2", 0.0, 0.0, 0.0), 512.0);
        assert_eq!(eval("8/4/2", 0.0, 0.0, 0.0), 1.0);
        assert_eq!(eval("2^-1", 0.0, 0.0, 0.0), 0.5);
    }

    #[test]
    fn variables_and_functions() {
        assert_eq!(eval("t^2", 3.0, 0.0, 0.0), 9.0);
        assert_eq!(eval("pow(t, x)", 2.0, 10.0, 0.0), 1024.0);
        assert_eq!(eval("alpha * x", 0.0, 4.0, 0.5), 2.0);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let err = parse("1/(t-1)").unwrap().evaluate(1.0, 0.0, 0.0).unwrap_err();
        assert_eq!(err.expr, "1 / (t - 1)");
    }

    #[test]
    fn syntax_error_offsets() {
        let err = parse("sin(t,").unwrap_err();
        assert_eq!(err.offset(), 6);
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn unknown_identifier_and_arity() {
        assert_eq!(
            parse("2*y").unwrap_err(),
            ParseError::UnknownIdentifier {
                offset: 2,
                name: "y".into()
            }
        );
        assert!(matches!(parse("pow(t)"), Err(ParseError::Arity { offset: 0, .. })));
        assert!(matches!(parse("sin(t, x)"), Err(ParseError::Arity { .. })));
        assert!(matches!(parse("foo(t)"), Err(ParseError::UnknownIdentifier { .. })));
    }

    #[test]
    fn display_is_minimal_but_faithful() {
        let e = parse("(a_b)").unwrap_err();
        assert_eq!(e.offset(), 1);
        let e = parse("-(t+x)*(2-(3-x))").unwrap();
        assert_eq!(e.to_string(), "-(t + x) * (2 - (3 - x))");
        let e = parse("(-t)^2").unwrap();
        assert_eq!(e.to_string(), "(-t)^2");
        assert_eq!(eval("(-t)^2", 3.0, 0.0, 0.0), 9.0);
    }
}
