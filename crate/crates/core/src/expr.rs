//! Coefficient expression language.
//!
//! Coefficients `p(x)`, `q(x)` and explicit seeds are written as ordinary infix
//! expressions in the single variable `x`:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          (right-associative)
//! primary := number | 'x' | 'pi' | 'i' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | tan | sinh | cosh | tanh | exp | log | sqrt | abs
//! ```
//!
//! Complex values are built from the imaginary unit `i`, e.g. `1 + 2*i`.
//! `log`, `sqrt` and non-integer powers use the principal branch.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("`{name}` at byte {offset} takes {expected} argument(s), found {found}")]
    WrongArity {
        name: String,
        offset: usize,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::WrongArity { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("non-finite result")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, z: Complex64) -> Result<Complex64, EvalError> {
        Ok(match self {
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Tan => z.tan(),
            Func::Sinh => z.sinh(),
            Func::Cosh => z.cosh(),
            Func::Tanh => z.tanh(),
            Func::Exp => z.exp(),
            Func::Log => {
                if z == Complex64::new(0.0, 0.0) {
                    return Err(EvalError::LogOfZero);
                }
                z.ln()
            }
            Func::Sqrt => z.sqrt(),
            Func::Abs => Complex64::new(z.norm(), 0.0),
        })
    }
}

/// Parsed coefficient expression. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum CoeffExpr {
    Num(f64),
    Pi,
    I,
    X,
    Neg(Box<CoeffExpr>),
    Binary(BinOp, Box<CoeffExpr>, Box<CoeffExpr>),
    Call(Func, Box<CoeffExpr>),
}

impl CoeffExpr {
    pub fn parse(source: &str) -> Result<CoeffExpr, ParseError> {
        let tokens = lex(source)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            end: source.len(),
        };
        let expr = parser.expr()?;
        match parser.peek() {
            None => Ok(expr),
            Some(tok) => Err(ParseError::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", tok.kind.describe()),
            }),
        }
    }

    /// Evaluates the expression at the real abscissa `x`.
    pub fn eval(&self, x: f64) -> Result<Complex64, EvalError> {
        let value = match self {
            CoeffExpr::Num(v) => Complex64::new(*v, 0.0),
            CoeffExpr::Pi => Complex64::new(std::f64::consts::PI, 0.0),
            CoeffExpr::I => Complex64::new(0.0, 1.0),
            CoeffExpr::X => Complex64::new(x, 0.0),
            // `0 - z` rather than `-z`: keeps `-4` off the lower side of the branch cuts
            CoeffExpr::Neg(a) => Complex64::new(0.0, 0.0) - a.eval(x)?,
            CoeffExpr::Binary(op, a, b) => {
                let a = a.eval(x)?;
                let b = b.eval(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == Complex64::new(0.0, 0.0) {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => pow(a, b)?,
                }
            }
            CoeffExpr::Call(f, a) => f.apply(a.eval(x)?)?,
        };
        if value.re.is_finite() && value.im.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// True when the expression does not mention `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            CoeffExpr::X => false,
            CoeffExpr::Num(_) | CoeffExpr::Pi | CoeffExpr::I => true,
            CoeffExpr::Neg(a) | CoeffExpr::Call(_, a) => a.is_constant(),
            CoeffExpr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            CoeffExpr::Binary(op, _, _) => op.precedence(),
            CoeffExpr::Neg(_) => 3,
            _ => 5,
        }
    }
}

impl FromStr for CoeffExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CoeffExpr::parse(s)
    }
}

fn pow(base: Complex64, exponent: Complex64) -> Result<Complex64, EvalError> {
    let zero = Complex64::new(0.0, 0.0);
    if exponent.im == 0.0 && exponent.re.fract() == 0.0 && exponent.re.abs() <= 1024.0 {
        let n = exponent.re as i32;
        if base == zero && n < 0 {
            return Err(EvalError::DivisionByZero);
        }
        return Ok(base.powi(n));
    }
    if base == zero {
        return if exponent.re > 0.0 {
            Ok(zero)
        } else {
            Err(EvalError::DivisionByZero)
        };
    }
    Ok((exponent * base.ln()).exp())
}

/// Prints with the minimum parentheses needed to reparse into the same tree.
impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffExpr::Num(v) => write!(f, "{v:?}"),
            CoeffExpr::Pi => f.write_str("pi"),
            CoeffExpr::I => f.write_str("i"),
            CoeffExpr::X => f.write_str("x"),
            CoeffExpr::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, a.precedence() < 3)
            }
            CoeffExpr::Binary(op, a, b) => {
                let prec = op.precedence();
                let (left_parens, right_parens) = match op {
                    BinOp::Pow => (a.precedence() <= prec, b.precedence() < 3),
                    _ => (a.precedence() < prec, b.precedence() <= prec),
                };
                write_child(f, a, left_parens)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, b, right_parens)
            }
            CoeffExpr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &CoeffExpr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
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
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Num(v) => format!("number {v}"),
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Caret => "`^`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Comma => "`,`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        let start = pos;
        let simple = match c {
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'/' => Some(TokenKind::Slash),
            b'^' => Some(TokenKind::Caret),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            b',' => Some(TokenKind::Comma),
            _ => None,
        };
        if let Some(kind) = simple {
            tokens.push(Token { kind, offset: start });
            pos += 1;
        } else if c.is_ascii_whitespace() {
            pos += 1;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(pos + 1).is_some_and(u8::is_ascii_digit)) {
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'.' {
                pos += 1;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
            }
            if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                let mut look = pos + 1;
                if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                    look += 1;
                }
                if look < bytes.len() && bytes[look].is_ascii_digit() {
                    pos = look;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
            }
            let text = &source[start..pos];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            if !value.is_finite() {
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("number `{text}` is out of range"),
                });
            }
            tokens.push(Token {
                kind: TokenKind::Num(value),
                offset: start,
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident(source[start..pos].to_string()),
                offset: start,
            });
        } else {
            let ch = source[start..].chars().next().unwrap_or('?');
            return Err(ParseError::Syntax {
                offset: start,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn expr(&mut self) -> Result<CoeffExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = CoeffExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<CoeffExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Star) => BinOp::Mul,
                Some(TokenKind::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = CoeffExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<CoeffExpr, ParseError> {
        if let Some(TokenKind::Minus) = self.peek_kind() {
            self.pos += 1;
            return Ok(CoeffExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<CoeffExpr, ParseError> {
        let base = self.primary()?;
        if let Some(TokenKind::Caret) = self.peek_kind() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(CoeffExpr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<CoeffExpr, ParseError> {
        let offset = self.offset();
        let Some(tok) = self.next() else {
            return Err(ParseError::Syntax {
                offset,
                message: "unexpected end of input".into(),
            });
        };
        match tok.kind {
            TokenKind::Num(v) => Ok(CoeffExpr::Num(v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => self.identifier(name, tok.offset),
            other => Err(ParseError::Syntax {
                offset: tok.offset,
                message: format!("expected an operand, found {}", other.describe()),
            }),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<CoeffExpr, ParseError> {
        let atom = match name.as_str() {
            "x" => Some(CoeffExpr::X),
            "pi" => Some(CoeffExpr::Pi),
            "i" => Some(CoeffExpr::I),
            _ => None,
        };
        if let Some(atom) = atom {
            if let Some(TokenKind::LParen) = self.peek_kind() {
                return Err(ParseError::Syntax {
                    offset: self.offset(),
                    message: format!("`{name}` is not a function"),
                });
            }
            return Ok(atom);
        }
        let Some(func) = Func::from_name(&name) else {
            return Err(ParseError::UnknownIdentifier { name, offset });
        };
        if !matches!(self.peek_kind(), Some(TokenKind::LParen)) {
            return Err(ParseError::WrongArity {
                name,
                offset,
                expected: 1,
                found: 0,
            });
        }
        self.pos += 1;
        if let Some(TokenKind::RParen) = self.peek_kind() {
            return Err(ParseError::WrongArity {
                name,
                offset,
                expected: 1,
                found: 0,
            });
        }
        let mut args = vec![self.expr()?];
        while let Some(TokenKind::Comma) = self.peek_kind() {
            self.pos += 1;
            args.push(self.expr()?);
        }
        self.expect_rparen()?;
        if args.len() != 1 {
            return Err(ParseError::WrongArity {
                name,
                offset,
                expected: 1,
                found: args.len(),
            });
        }
        Ok(CoeffExpr::Call(func, Box::new(args.pop().expect("one argument"))))
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        let offset = self.offset();
        match self.next() {
            Some(Token {
                kind: TokenKind::RParen,
                ..
            }) => Ok(()),
            Some(tok) => Err(ParseError::Syntax {
                offset,
                message: format!("expected `)`, found {}", tok.kind.describe()),
            }),
            None => Err(ParseError::Syntax {
                offset,
                message: "expected `)` before end of input".into(),
            }),
        }
    }
}
