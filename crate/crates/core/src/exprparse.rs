//! Expression language for actuator profiles `b(x)` and target states.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | variable | func '(' args ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^3^2` is `512`. Variables are `x` (only when `d = 1`)
//! or `x1..xd`. Functions: `exp log sqrt sin cos abs` (one argument) and
//! `pow` (two). There is no implicit multiplication. All errors carry byte
//! offsets into the source.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::quadrature::Profile;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("'{name}' takes {expected} argument(s), got {found} (offset {offset})")]
    Arity {
        name: &'static str,
        expected: usize,
        found: usize,
        offset: usize,
    },
    #[error("unbalanced parenthesis at offset {offset}")]
    UnbalancedParen { offset: usize },
    #[error("unexpected trailing input at offset {offset}")]
    TrailingInput { offset: usize },
    #[error("unexpected {found} at offset {offset}")]
    UnexpectedToken { found: &'static str, offset: usize },
    #[error("unexpected end of input at offset {offset}")]
    UnexpectedEnd { offset: usize },
    #[error("malformed number at offset {offset}")]
    InvalidNumber { offset: usize },
    #[error("function '{name}' at offset {offset} must be followed by '('")]
    ExpectedCall { name: &'static str, offset: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    LogNonPositive,
    SqrtNegative,
    DivisionByZero,
    PowDomain,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("{kind:?} at offset {offset}")]
    Domain { kind: EvalErrorKind, offset: usize },
    #[error("point has {found} coordinates, expression expects {expected}")]
    Dimension { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Abs,
    Pow,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Self::Exp,
            "log" => Self::Log,
            "sqrt" => Self::Sqrt,
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "abs" => Self::Abs,
            "pow" => Self::Pow,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Exp => "exp",
            Self::Log => "log",
            Self::Sqrt => "sqrt",
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Abs => "abs",
            Self::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        if self == Self::Pow {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AstKind {
    Const(f64),
    /// Zero-based variable index.
    Var(usize),
    Neg(Box<Ast>),
    Binary(BinOp, Box<Ast>, Box<Ast>),
    Call(Func, Vec<Ast>),
}

/// Expression tree. Equality compares structure only, not source offsets.
#[derive(Debug, Clone)]
pub struct Ast {
    pub kind: AstKind,
    pub offset: usize,
}

impl PartialEq for Ast {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Ast {
    fn new(kind: AstKind, offset: usize) -> Self {
        Self { kind, offset }
    }

    /// Precedence class used by the printer.
    fn precedence(&self) -> u8 {
        match &self.kind {
            AstKind::Const(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 3,
            AstKind::Const(_) | AstKind::Var(_) | AstKind::Call(..) => 5,
            AstKind::Binary(BinOp::Pow, ..) => 4,
            AstKind::Neg(_) => 3,
            AstKind::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            AstKind::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let wrap = self.precedence() < min;
        if wrap {
            f.write_str("(")?;
        }
        match &self.kind {
            AstKind::Const(v) => write!(f, "{v:?}")?,
            AstKind::Var(i) => write!(f, "x{}", i + 1)?,
            AstKind::Neg(inner) => {
                f.write_str("-")?;
                inner.write(f, 3)?;
            }
            AstKind::Binary(op, lhs, rhs) => {
                let (sym, left_min, right_min) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => (" * ", 2, 3),
                    BinOp::Div => (" / ", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                lhs.write(f, left_min)?;
                f.write_str(sym)?;
                rhs.write(f, right_min)?;
            }
            AstKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, arg) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    arg.write(f, 0)?;
                }
                f.write_str(")")?;
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }

    fn eval_at(&self, x: &[f64]) -> Result<f64, EvalError> {
        let domain = |kind| EvalError::Domain {
            kind,
            offset: self.offset,
        };
        let value = match &self.kind {
            AstKind::Const(v) => *v,
            AstKind::Var(i) => x[*i],
            AstKind::Neg(inner) => -inner.eval_at(x)?,
            AstKind::Binary(op, lhs, rhs) => {
                let a = lhs.eval_at(x)?;
                let b = rhs.eval_at(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(domain(EvalErrorKind::DivisionByZero));
                        }
                        a / b
                    }
                    BinOp::Pow => power(a, b).ok_or_else(|| domain(EvalErrorKind::PowDomain))?,
                }
            }
            AstKind::Call(func, args) => {
                let a = args[0].eval_at(x)?;
                match func {
                    Func::Exp => libm::exp(a),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(domain(EvalErrorKind::LogNonPositive));
                        }
                        libm::log(a)
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(domain(EvalErrorKind::SqrtNegative));
                        }
                        libm::sqrt(a)
                    }
                    Func::Sin => libm::sin(a),
                    Func::Cos => libm::cos(a),
                    Func::Abs => libm::fabs(a),
                    Func::Pow => {
                        let b = args[1].eval_at(x)?;
                        power(a, b).ok_or_else(|| domain(EvalErrorKind::PowDomain))?
                    }
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(domain(EvalErrorKind::NonFinite))
        }
    }
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

const MAX_INTEGER_EXPONENT: f64 = 64.0;

/// Real power. Small integer exponents use repeated multiplication, others
/// go through `exp(e·ln b)` and need a positive base. `None` on domain errors.
fn power(base: f64, exponent: f64) -> Option<f64> {
    if exponent == libm::trunc(exponent) && libm::fabs(exponent) <= MAX_INTEGER_EXPONENT {
        let n = libm::fabs(exponent) as u32;
        let mut acc = 1.0;
        for _ in 0..n {
            acc *= base;
        }
        return if exponent >= 0.0 {
            Some(acc)
        } else if acc == 0.0 {
            None
        } else {
            Some(1.0 / acc)
        };
    }
    if base > 0.0 {
        Some(libm::exp(exponent * libm::log(base)))
    } else if base == 0.0 && exponent > 0.0 {
        Some(0.0)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok<'a> {
    Num(f64),
    Ident(&'a str),
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

impl Tok<'_> {
    fn describe(&self) -> &'static str {
        match self {
            Tok::Num(_) => "number",
            Tok::Ident(_) => "identifier",
            Tok::Plus => "'+'",
            Tok::Minus => "'-'",
            Tok::Star => "'*'",
            Tok::Slash => "'/'",
            Tok::Caret => "'^'",
            Tok::LParen => "'('",
            Tok::RParen => "')'",
            Tok::Comma => "','",
            Tok::End => "end of input",
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok<'_>, usize)>, ParseError> {
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
                let is_digit = |j: usize| j < bytes.len() && bytes[j].is_ascii_digit();
                let mut digits = 0;
                while is_digit(i) {
                    i += 1;
                    digits += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while is_digit(i) {
                        i += 1;
                        digits += 1;
                    }
                }
                if digits == 0 {
                    return Err(ParseError::InvalidNumber { offset: start });
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    if !is_digit(i) {
                        return Err(ParseError::InvalidNumber { offset: start });
                    }
                    while is_digit(i) {
                        i += 1;
                    }
                }
                let value: f64 = src[start..i]
                    .parse()
                    .map_err(|_| ParseError::InvalidNumber { offset: start })?;
                if !value.is_finite() {
                    return Err(ParseError::InvalidNumber { offset: start });
                }
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(&src[start..i]), start));
                continue;
            }
            _ => {
                return Err(ParseError::UnexpectedToken {
                    found: "character",
                    offset: start,
                })
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok<'a>, usize)>,
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> (Tok<'a>, usize) {
        self.toks[self.pos]
    }

    fn bump(&mut self) -> (Tok<'a>, usize) {
        let t = self.toks[self.pos];
        if t.0 != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(tok: Tok<'_>, offset: usize) -> ParseError {
        match tok {
            Tok::End => ParseError::UnexpectedEnd { offset },
            Tok::RParen => ParseError::UnbalancedParen { offset },
            other => ParseError::UnexpectedToken {
                found: other.describe(),
                offset,
            },
        }
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let (tok, offset) = self.peek();
            let op = match tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Ast::new(AstKind::Binary(op, Box::new(lhs), Box::new(rhs)), offset);
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let (tok, offset) = self.peek();
            let op = match tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Ast::new(AstKind::Binary(op, Box::new(lhs), Box::new(rhs)), offset);
        }
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        let (tok, offset) = self.peek();
        if tok == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(Ast::new(AstKind::Neg(Box::new(inner)), offset));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, ParseError> {
        let base = self.atom()?;
        let (tok, offset) = self.peek();
        if tok == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Ast::new(
                AstKind::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)),
                offset,
            ));
        }
        Ok(base)
    }

    fn variable(&self, name: &str) -> Option<usize> {
        if name == "x" && self.dim == 1 {
            return Some(0);
        }
        let digits = name.strip_prefix('x')?;
        if digits.starts_with('0') {
            return None;
        }
        let k: usize = digits.parse().ok()?;
        (1..=self.dim).contains(&k).then(|| k - 1)
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Ast::new(AstKind::Const(v), offset)),
            Tok::LParen => {
                let inner = self.expr()?;
                let (close, at) = self.bump();
                if close != Tok::RParen {
                    return Err(match close {
                        Tok::End | Tok::Comma => ParseError::UnbalancedParen { offset: at },
                        other => Self::unexpected(other, at),
                    });
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::lookup(name) {
                    return self.call(func, offset);
                }
                match self.variable(name) {
                    Some(i) => Ok(Ast::new(AstKind::Var(i), offset)),
                    None => Err(ParseError::UnknownIdentifier {
                        name: name.to_string(),
                        offset,
                    }),
                }
            }
            other => Err(Self::unexpected(other, offset)),
        }
    }

    fn call(&mut self, func: Func, offset: usize) -> Result<Ast, ParseError> {
        let (open, _) = self.peek();
        if open != Tok::LParen {
            return Err(ParseError::ExpectedCall {
                name: func.name(),
                offset,
            });
        }
        self.bump();
        let mut args = Vec::new();
        if self.peek().0 != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if self.peek().0 == Tok::Comma {
                    self.bump();
                    continue;
                }
                break;
            }
        }
        let (close, at) = self.bump();
        if close != Tok::RParen {
            return Err(match close {
                Tok::End => ParseError::UnbalancedParen { offset: at },
                other => Self::unexpected(other, at),
            });
        }
        if args.len() != func.arity() {
            return Err(ParseError::Arity {
                name: func.name(),
                expected: func.arity(),
                found: args.len(),
                offset: at,
            });
        }
        Ok(Ast::new(AstKind::Call(func, args), offset))
    }
}

/// Parses `source` as a function of `d` variables.
pub fn parse(source: &str, d: usize) -> Result<Ast, ParseError> {
    if d == 0 {
        return Err(ParseError::ZeroDimension);
    }
    let mut parser = Parser {
        toks: lex(source)?,
        pos: 0,
        dim: d,
    };
    let ast = parser.expr()?;
    match parser.peek() {
        (Tok::End, _) => Ok(ast),
        (Tok::RParen, offset) => Err(ParseError::UnbalancedParen { offset }),
        (_, offset) => Err(ParseError::TrailingInput { offset }),
    }
}

/// Evaluates `ast` at `point`. The point length must cover every variable.
pub fn evaluate(ast: &Ast, point: &[f64]) -> Result<f64, EvalError> {
    let needed = max_variable(ast).map_or(0, |i| i + 1);
    if point.len() < needed {
        return Err(EvalError::Dimension {
            expected: needed,
            found: point.len(),
        });
    }
    ast.eval_at(point)
}

fn max_variable(ast: &Ast) -> Option<usize> {
    match &ast.kind {
        AstKind::Const(_) => None,
        AstKind::Var(i) => Some(*i),
        AstKind::Neg(inner) => max_variable(inner),
        AstKind::Binary(_, a, b) => max_variable(a).max(max_variable(b)),
        AstKind::Call(_, args) => args.iter().filter_map(max_variable).max(),
    }
}

/// A parsed expression bound to its dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    ast: Ast,
    dim: usize,
}

impl Expr {
    pub fn parse(source: &str, d: usize) -> Result<Self, ParseError> {
        Ok(Self {
            ast: parse(source, d)?,
            dim: d,
        })
    }

    pub fn ast(&self) -> &Ast {
        &self.ast
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        if point.len() != self.dim {
            return Err(EvalError::Dimension {
                expected: self.dim,
                found: point.len(),
            });
        }
        self.ast.eval_at(point)
    }
}

impl Profile for Expr {
    type Error = EvalError;

    fn arity(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        Expr::eval(self, x)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn value(src: &str, d: usize, x: &[f64]) -> f64 {
        evaluate(&parse(src, d).unwrap(), x).unwrap()
    }

    #[test]
    fn basic_examples() {
        assert_eq!(value("exp(-x/2)", 1, &[0.0]), 1.0);
        assert_eq!(value("1 + x*x", 1, &[2.0]), 5.0);
        assert_eq!(value("x1+2*x2", 2, &[1.0, 3.0]), 7.0);
        assert_eq!(value("2^3", 1, &[0.0]), 8.0);
    }

    #[test]
    fn precedence() {
        assert_eq!(value("1+2*3", 1, &[0.0]), 7.0);
        assert_eq!(value("2^3^2", 1, &[0.0]), 512.0);
        assert_eq!(value("-x^2", 1, &[3.0]), -9.0);
        assert_eq!(value("2^-1", 1, &[0.0]), 0.5);
        assert_eq!(value("8/2/2", 1, &[0.0]), 2.0);
        assert_eq!(value("1-2-3", 1, &[0.0]), -4.0);
        assert_eq!(value("2*-3", 1, &[0.0]), -6.0);
    }

    #[test]
    fn error_positions() {
        assert_eq!(
            parse("exp()", 1),
            Err(ParseError::Arity {
                name: "exp",
                expected: 1,
                found: 0,
                offset: 4
            })
        );
        assert!(matches!(
            parse("pow(x)", 1),
            Err(ParseError::Arity {
                expected: 2,
                found: 1,
                ..
            })
        ));
        assert_eq!(
            parse("y + 1", 1),
            Err(ParseError::UnknownIdentifier {
                name: "y".into(),
                offset: 0
            })
        );
        assert!(matches!(
            parse("x", 2),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse("x3", 2),
            Err(ParseError::UnknownIdentifier { offset: 0, .. })
        ));
        assert_eq!(
            parse("(1 + x", 1),
            Err(ParseError::UnbalancedParen { offset: 6 })
        );
        assert_eq!(
            parse("1 + x)", 1),
            Err(ParseError::UnbalancedParen { offset: 5 })
        );
        assert_eq!(
            parse("1 2", 1),
            Err(ParseError::TrailingInput { offset: 2 })
        );
        assert_eq!(
            parse("1 +", 1),
            Err(ParseError::UnexpectedEnd { offset: 3 })
        );
        assert_eq!(parse("1e", 1), Err(ParseError::InvalidNumber { offset: 0 }));
        assert_eq!(
            parse("1e999", 1),
            Err(ParseError::InvalidNumber { offset: 0 })
        );
        assert_eq!(
            parse("exp + 1", 1),
            Err(ParseError::ExpectedCall {
                name: "exp",
                offset: 0
            })
        );
        assert_eq!(parse("2", 0), Err(ParseError::ZeroDimension));
        assert!(matches!(
            parse("2 $ 3", 1),
            Err(ParseError::UnexpectedToken { offset: 2, .. })
        ));
    }

    #[test]
    fn evaluation_domain_errors() {
        let e = evaluate(&parse("sqrt(x)", 1).unwrap(), &[-1.0]).unwrap_err();
        assert_eq!(
            e,
            EvalError::Domain {
                kind: EvalErrorKind::SqrtNegative,
                offset: 0
            }
        );
        let e = evaluate(&parse("1 + log(x)", 1).unwrap(), &[0.0]).unwrap_err();
        assert_eq!(
            e,
            EvalError::Domain {
                kind: EvalErrorKind::LogNonPositive,
                offset: 4
            }
        );
        assert!(evaluate(&parse("1/x", 1).unwrap(), &[0.0]).is_err());
        assert!(evaluate(&parse("x^0.5", 1).unwrap(), &[-4.0]).is_err());
        assert!(evaluate(&parse("exp(x)", 1).unwrap(), &[1000.0]).is_err());
        assert_eq!(value("x^0.5", 1, &[4.0]), 2.0);
        assert_eq!(value("pow(x, 3)", 1, &[-2.0]), -8.0);
        let expr = Expr::parse("x1 * x2", 2).unwrap();
        assert!(matches!(
            expr.eval(&[1.0]),
            Err(EvalError::Dimension {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn printer_fixpoint_small() {
        for src in [
            "-x^2",
            "(-x)^2",
            "2^3^2",
            "(2^3)^2",
            "1 - (2 - 3)",
            "-(1 + x)",
            "a",
        ] {
            let Ok(ast) = parse(src, 1) else { continue };
            let printed = format!("{ast}");
            let again = parse(&printed, 1).unwrap();
            assert_eq!(ast, again, "{src} -> {printed}");
            assert_eq!(format!("{again}"), printed);
        }
    }
}
