//! Component expressions over chart coordinates.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' exponent)*
//! exponent:= '-'? INTEGER | '(' '-'? INTEGER ')'
//! primary := NUMBER | COORDINATE | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! `FUNC` is one of `sin cos tan exp ln sqrt sinh cosh neg`. Exponents are
//! integer literals only.

use std::fmt;

use crate::jet::{Jet, JetError};

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Cosh,
    Neg,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Neg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Neg => "neg",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply_jet(self, x: &Jet) -> Result<Jet, JetError> {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Neg => Ok(-x),
        }
    }

    fn apply_f64(self, x: f64) -> Result<f64, JetError> {
        let domain = |op| Err(JetError::Domain { op, value: x });
        let v = match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => {
                if x.cos() == 0.0 {
                    return domain("tan");
                }
                x.tan()
            }
            Func::Exp => x.exp(),
            Func::Ln => {
                if x.is_nan() || x <= 0.0 {
                    return domain("ln");
                }
                x.ln()
            }
            Func::Sqrt => {
                if x.is_nan() || x <= 0.0 {
                    return domain("sqrt");
                }
                x.sqrt()
            }
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Neg => -x,
        };
        Ok(v)
    }
}

/// Parsed component expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Coordinate { index: usize, name: String },
    Neg(Box<Expr>),
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Pow { base: Box<Expr>, exponent: i32 },
    Call { func: Func, arg: Box<Expr> },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("exponent at byte {offset} is not an integer literal")]
    NonIntegerExponent { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::NonIntegerExponent { offset } => *offset,
        }
    }
}

/// Evaluation failure: the jet error, the AST path of the failing node and
/// the evaluation point.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{source} at node `{path}` (point {point:?})")]
pub struct EvalError {
    pub path: String,
    pub point: Vec<f64>,
    #[source]
    pub source: JetError,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integer: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, i)),
            b'-' => out.push((Tok::Minus, i)),
            b'*' => out.push((Tok::Star, i)),
            b'/' => out.push((Tok::Slash, i)),
            b'^' => out.push((Tok::Caret, i)),
            b'(' => out.push((Tok::LParen, i)),
            b')' => out.push((Tok::RParen, i)),
            b'0'..=b'9' | b'.' => {
                let mut integer = true;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    integer = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        integer = false;
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s = &text[start..i];
                let value: f64 = s.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{s}`"),
                })?;
                if !value.is_finite() {
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: format!("number `{s}` is out of range"),
                    });
                }
                out.push((Tok::Num { value, integer }, start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    coordinates: &'a [String],
    depth: usize,
}

impl<'a> Parser<'a> {
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

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.syntax("expression nested too deeply");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.exponent()?;
            base = Expr::Pow {
                base: Box::new(base),
                exponent,
            };
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        let at = self.offset();
        let value = match self.bump().0 {
            Tok::Num { value, integer: true } if value <= f64::from(i32::MAX) => value as i32,
            Tok::End => {
                return Err(ParseError::Syntax {
                    offset: at,
                    message: "missing exponent".into(),
                })
            }
            _ => return Err(ParseError::NonIntegerExponent { offset: at }),
        };
        if paren {
            if *self.peek() != Tok::RParen {
                return self.syntax("expected `)` after exponent");
            }
            self.bump();
        }
        Ok(if negative { -value } else { value })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num { value, .. } => {
                self.bump();
                Ok(Expr::Constant(value))
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return self.syntax(format!("expected `(` after `{name}`"));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    if *self.peek() != Tok::RParen {
                        return self.syntax("expected `)`");
                    }
                    self.bump();
                    return Ok(Expr::Call {
                        func,
                        arg: Box::new(arg),
                    });
                }
                match self.coordinates.iter().position(|c| *c == name) {
                    Some(index) => Ok(Expr::Coordinate { index, name }),
                    None => Err(ParseError::UnknownIdentifier { name, offset: at }),
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.syntax("expected `)`");
                }
                self.bump();
                Ok(inner)
            }
            Tok::End => self.syntax("unexpected end of expression"),
            other => self.syntax(format!("unexpected token {}", describe(&other))),
        }
    }
}

fn describe(t: &Tok) -> &'static str {
    match t {
        Tok::Num { .. } => "number",
        Tok::Ident(_) => "identifier",
        Tok::Plus => "`+`",
        Tok::Minus => "`-`",
        Tok::Star => "`*`",
        Tok::Slash => "`/`",
        Tok::Caret => "`^`",
        Tok::LParen => "`(`",
        Tok::RParen => "`)`",
        Tok::End => "end of input",
    }
}

/// Parses `text` with identifiers resolved against `coordinates`.
pub fn parse(text: &str, coordinates: &[String]) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        coordinates,
        depth: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.syntax(format!("unexpected {}", describe(p.peek())));
    }
    Ok(e)
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Constant(c)
    }

    /// Evaluates all partials up to `order` at `point`.
    pub fn eval_jet(&self, point: &[f64], order: usize) -> Result<Jet, EvalError> {
        let wrap = |source| EvalError {
            path: "root".into(),
            point: point.to_vec(),
            source,
        };
        let inputs = point
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet::variable(i, x, point.len(), order))
            .collect::<Result<Vec<_>, _>>()
            .map_err(wrap)?;
        self.eval_with(&inputs).map_err(|mut e| {
            e.point = point.to_vec();
            e
        })
    }

    /// Evaluates with each coordinate bound to a jet (composition).
    pub fn eval_with(&self, inputs: &[Jet]) -> Result<Jet, EvalError> {
        let proto = inputs.first().ok_or_else(|| EvalError {
            path: "root".into(),
            point: Vec::new(),
            source: JetError::NoVariables,
        })?;
        let point: Vec<f64> = inputs.iter().map(Jet::value).collect();
        let mut path = vec!["root".to_string()];
        self.jet_rec(inputs, proto, &mut path).map_err(|source| EvalError {
            path: path.join("/"),
            point,
            source,
        })
    }

    fn jet_rec(&self, inputs: &[Jet], proto: &Jet, path: &mut Vec<String>) -> Result<Jet, JetError> {
        let out = match self {
            Expr::Constant(c) => proto.constant_like(*c),
            Expr::Coordinate { index, .. } => inputs
                .get(*index)
                .cloned()
                .ok_or(JetError::IndexOutOfRange {
                    index: *index,
                    num_vars: inputs.len(),
                })?,
            Expr::Neg(a) => {
                path.push("neg".into());
                let v = -a.jet_rec(inputs, proto, path)?;
                path.pop();
                v
            }
            Expr::Binary { op, lhs, rhs } => {
                let tag = match op {
                    BinaryOp::Add => "add",
                    BinaryOp::Sub => "sub",
                    BinaryOp::Mul => "mul",
                    BinaryOp::Div => "div",
                };
                path.push(format!("{tag}.lhs"));
                let a = lhs.jet_rec(inputs, proto, path)?;
                path.pop();
                path.push(format!("{tag}.rhs"));
                let b = rhs.jet_rec(inputs, proto, path)?;
                path.pop();
                path.push(tag.to_string());
                let v = match op {
                    BinaryOp::Add => &a + &b,
                    BinaryOp::Sub => &a - &b,
                    BinaryOp::Mul => &a * &b,
                    BinaryOp::Div => {
                        let mut q = a.div(&b)?;
                        // keep the value bitwise equal to plain evaluation
                        let mut data = q.partials().to_vec();
                        data[0] = a.value() / b.value();
                        q = Jet::from_partials(q.layout(), data);
                        q
                    }
                };
                path.pop();
                v
            }
            Expr::Pow { base, exponent } => {
                path.push("pow".into());
                let b = base.jet_rec(inputs, proto, path)?;
                let p = b.pow_int(*exponent)?;
                let mut data = p.partials().to_vec();
                data[0] = b.value().powi(*exponent);
                path.pop();
                Jet::from_partials(p.layout(), data)
            }
            Expr::Call { func, arg } => {
                path.push(func.name().into());
                let a = arg.jet_rec(inputs, proto, path)?;
                let v = func.apply_jet(&a)?;
                path.pop();
                v
            }
        };
        if !out.is_finite() {
            return Err(JetError::NonFinite { op: "eval" });
        }
        Ok(out)
    }

    /// Plain recursive evaluation in `f64`.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.f64_rec(point).map_err(|source| EvalError {
            path: "root".into(),
            point: point.to_vec(),
            source,
        })
    }

    fn f64_rec(&self, point: &[f64]) -> Result<f64, JetError> {
        let v = match self {
            Expr::Constant(c) => *c,
            Expr::Coordinate { index, .. } => *point.get(*index).ok_or(JetError::IndexOutOfRange {
                index: *index,
                num_vars: point.len(),
            })?,
            Expr::Neg(a) => -a.f64_rec(point)?,
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.f64_rec(point)?;
                let b = rhs.f64_rec(point)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(JetError::Domain { op: "div", value: b });
                        }
                        a / b
                    }
                }
            }
            Expr::Pow { base, exponent } => {
                let b = base.f64_rec(point)?;
                if *exponent < 0 && b == 0.0 {
                    return Err(JetError::Domain { op: "div", value: b });
                }
                b.powi(*exponent)
            }
            Expr::Call { func, arg } => func.apply_f64(arg.f64_rec(point)?)?,
        };
        if !v.is_finite() {
            return Err(JetError::NonFinite { op: "eval" });
        }
        Ok(v)
    }

    /// Replaces every coordinate by the matching expression.
    pub fn substitute(&self, replacements: &[Expr]) -> Expr {
        match self {
            Expr::Constant(c) => Expr::Constant(*c),
            Expr::Coordinate { index, .. } => replacements[*index].clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(replacements))),
            Expr::Binary { op, lhs, rhs } => Expr::Binary {
                op: *op,
                lhs: Box::new(lhs.substitute(replacements)),
                rhs: Box::new(rhs.substitute(replacements)),
            },
            Expr::Pow { base, exponent } => Expr::Pow {
                base: Box::new(base.substitute(replacements)),
                exponent: *exponent,
            },
            Expr::Call { func, arg } => Expr::Call {
                func: *func,
                arg: Box::new(arg.substitute(replacements)),
            },
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary {
                op: BinaryOp::Add | BinaryOp::Sub,
                ..
            } => 1,
            Expr::Binary { .. } => 2,
            Expr::Neg(_) => 3,
            Expr::Pow { .. } => 4,
            Expr::Constant(_) | Expr::Coordinate { .. } | Expr::Call { .. } => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Constant(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{})", -c)
            }
            Expr::Constant(c) => write!(f, "{c}"),
            Expr::Coordinate { name, .. } => f.write_str(name),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_operand(f, a, a.precedence() < 3)
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = self.precedence();
                write_operand(f, lhs, lhs.precedence() < p)?;
                let sym = match op {
                    BinaryOp::Add => " + ",
                    BinaryOp::Sub => " - ",
                    BinaryOp::Mul => "*",
                    BinaryOp::Div => "/",
                };
                f.write_str(sym)?;
                write_operand(f, rhs, rhs.precedence() <= p)
            }
            Expr::Pow { base, exponent } => {
                write_operand(f, base, base.precedence() < 4)?;
                write!(f, "^{exponent}")
            }
            Expr::Call { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn var(i: usize, n: &str) -> Box<Expr> {
        Box::new(Expr::Coordinate {
            index: i,
            name: n.into(),
        })
    }

    #[test]
    fn precedence_case() {
        let e = parse("x*sin(z) - 1/2", &coords(&["x", "y", "z"])).unwrap();
        let expected = Expr::Binary {
            op: BinaryOp::Sub,
            lhs: Box::new(Expr::Binary {
                op: BinaryOp::Mul,
                lhs: var(0, "x"),
                rhs: Box::new(Expr::Call {
                    func: Func::Sin,
                    arg: var(2, "z"),
                }),
            }),
            rhs: Box::new(Expr::Binary {
                op: BinaryOp::Div,
                lhs: Box::new(Expr::Constant(1.0)),
                rhs: Box::new(Expr::Constant(2.0)),
            }),
        };
        assert_eq!(e, expected);
    }

    #[test]
    fn malformed_reports_offset() {
        let err = parse("2 + * 3", &coords(&["x"])).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn unknown_identifier_and_exponent_errors() {
        let c = coords(&["x"]);
        assert_eq!(
            parse("x + w", &c).unwrap_err(),
            ParseError::UnknownIdentifier {
                name: "w".into(),
                offset: 4
            }
        );
        assert_eq!(
            parse("x^2.5", &c).unwrap_err(),
            ParseError::NonIntegerExponent { offset: 2 }
        );
        assert_eq!(
            parse("x^x", &c).unwrap_err(),
            ParseError::NonIntegerExponent { offset: 2 }
        );
        assert!(matches!(parse("", &c), Err(ParseError::Syntax { offset: 0, .. })));
        assert!(matches!(parse("sin x", &c), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let c = coords(&["x"]);
        let e = parse("-x^2", &c).unwrap();
        assert_eq!(
            e,
            Expr::Neg(Box::new(Expr::Pow {
                base: var(0, "x"),
                exponent: 2
            }))
        );
        assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
        assert_eq!(parse("x^-1", &c).unwrap().eval(&[4.0]).unwrap(), 0.25);
        assert_eq!(parse("2*-x", &c).unwrap().eval(&[4.0]).unwrap(), -8.0);
    }

    #[test]
    fn polynomial_gradient() {
        let e = parse("x^2 + y^2", &coords(&["x", "y"])).unwrap();
        let j = e.eval_jet(&[3.0, 4.0], 1).unwrap();
        assert_eq!(j.partials(), &[25.0, 6.0, 8.0]);
    }

    #[test]
    fn sin_cos_matches_half_sin_double_angle() {
        let e = parse("sin(x)*cos(x)", &coords(&["x"])).unwrap();
        let x = 0.7f64;
        let j = e.eval_jet(&[x], 3).unwrap();
        // closed form: f = sin(2x)/2
        let oracle = [
            0.5 * (2.0 * x).sin(),
            (2.0 * x).cos(),
            -2.0 * (2.0 * x).sin(),
            -4.0 * (2.0 * x).cos(),
        ];
        for (a, b) in j.partials().iter().zip(oracle) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn singular_input_is_error() {
        let e = parse("1/x", &coords(&["x"])).unwrap();
        for k in 0..=3 {
            let err = e.eval_jet(&[0.0], k).unwrap_err();
            assert_eq!(err.source, JetError::Domain { op: "div", value: 0.0 });
            assert_eq!(err.point, vec![0.0]);
            assert_eq!(err.path, "root/div");
        }
    }

    #[test]
    fn failing_node_path() {
        let e = parse("x + sin(ln(x - 1))", &coords(&["x"])).unwrap();
        let err = e.eval_jet(&[0.5], 1).unwrap_err();
        assert_eq!(err.path, "root/add.rhs/sin/ln");
    }

    #[test]
    fn printing_keeps_structure() {
        let c = coords(&["x", "y"]);
        for s in [
            "x - (y - 1)",
            "x/(y*2)",
            "(-x)^2",
            "-(x + y)",
            "x^2^3",
            "neg(x)*--y",
            "(x^-2)^3",
            "1e-20 + 2.5e10*x",
        ] {
            let e = parse(s, &c).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed, &c).unwrap(), e, "{s} -> {printed}");
        }
    }
}
