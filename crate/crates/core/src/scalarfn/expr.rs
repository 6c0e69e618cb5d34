//! Recursive-descent parser for coefficient expressions in `t`.
//!
//! Grammar:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | 't' | func '(' expr ')' | '(' expr ')'
//! func  := sqrt | exp | log
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-t^2`
//! is `-(t^2)`.

use super::jet::{checked_div, Real};
use super::ScalarError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ScalarError> {
        let mut p = Parser { src, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < src.len() {
            return Err(p.syntax("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Evaluates the expression with `t` bound to `t` in any scalar type.
    pub fn eval<R: Real>(&self, t: R) -> Result<R, ScalarError> {
        Ok(match self {
            Expr::Const(v) => R::cst(*v),
            Expr::Var => t,
            Expr::Neg(a) => -a.eval(t)?,
            Expr::Add(a, b) => a.eval(t)? + b.eval(t)?,
            Expr::Sub(a, b) => a.eval(t)? - b.eval(t)?,
            Expr::Mul(a, b) => a.eval(t)? * b.eval(t)?,
            Expr::Div(a, b) => checked_div(a.eval(t)?, b.eval(t)?, "expression divisor")?,
            Expr::Pow(a, b) => {
                let base = a.eval(t)?;
                let exponent = if b.is_constant() {
                    Some(b.eval(0.0)?)
                } else {
                    None
                };
                match exponent {
                    Some(k) if k.fract() == 0.0 && k.abs() <= 64.0 => {
                        if k < 0.0 && base.value().abs() < super::jet::DIV_EPS {
                            return Err(ScalarError::Domain {
                                what: "negative power of zero".into(),
                                t: t.value(),
                            });
                        }
                        base.powi(k as i32)
                    }
                    Some(k) => {
                        if base.value() <= 0.0 {
                            return Err(ScalarError::Domain {
                                what: "non-integer power of a non-positive base".into(),
                                t: t.value(),
                            });
                        }
                        base.powf(k)
                    }
                    None => {
                        if base.value() <= 0.0 {
                            return Err(ScalarError::Domain {
                                what: "variable power of a non-positive base".into(),
                                t: t.value(),
                            });
                        }
                        (base.ln() * b.eval(t)?).exp()
                    }
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(t)?;
                match f {
                    Func::Sqrt => {
                        if x.value() < 0.0 {
                            return Err(ScalarError::Domain {
                                what: "sqrt of a negative number".into(),
                                t: t.value(),
                            });
                        }
                        x.sqrt()
                    }
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x.value() <= 0.0 {
                            return Err(ScalarError::Domain {
                                what: "log of a non-positive number".into(),
                                t: t.value(),
                            });
                        }
                        x.ln()
                    }
                }
            }
        })
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "t"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn syntax(&self, msg: &str) -> ScalarError {
        ScalarError::Syntax {
            offset: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(b) = self.src.as_bytes().get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.as_bytes().get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ScalarError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ScalarError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ScalarError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ScalarError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ScalarError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.syntax("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr, ScalarError> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &self.src[start..end];
        match text.parse::<f64>() {
            Ok(v) => {
                self.pos = end;
                Ok(Expr::Const(v))
            }
            Err(_) => Err(self.syntax("malformed number")),
        }
    }

    fn ident(&mut self) -> Result<Expr, ScalarError> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
            end += 1;
        }
        let name = &self.src[start..end];
        self.pos = end;
        if name == "t" {
            return Ok(Expr::Var);
        }
        let Some(func) = Func::from_name(name) else {
            return Err(ScalarError::UnknownIdentifier {
                offset: start,
                name: name.to_string(),
            });
        };
        if !self.eat(b'(') {
            return Err(self.syntax("expected '(' after function name"));
        }
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        if !self.eat(b')') {
            return Err(self.syntax("expected ')'"));
        }
        if args.len() != 1 {
            return Err(ScalarError::Arity {
                offset: start,
                name: name.to_string(),
                expected: 1,
                found: args.len(),
            });
        }
        Ok(Expr::Call(func, Box::new(args.pop().unwrap())))
    }
}
