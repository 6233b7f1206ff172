//! Recursive-descent parser. Precedence from loosest to tightest:
//! `+ -`, `* /`, unary minus, `^` (right associative).

use num_complex::Complex64;

use super::{diff, Exponent, ExprError, Func, Node};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(u8),
    Open,
    Close,
    End,
}

pub(super) struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    tok: Tok,
    tok_start: usize,
    variables: &'a [&'a str],
}

impl<'a> Parser<'a> {
    pub(super) fn new(text: &'a str, variables: &'a [&'a str]) -> Self {
        Parser { src: text.as_bytes(), pos: 0, tok: Tok::End, tok_start: 0, variables }
    }

    pub(super) fn parse(mut self) -> Result<Node, ExprError> {
        self.advance()?;
        let node = self.expr()?;
        if self.tok != Tok::End {
            return Err(self.syntax("unexpected trailing input"));
        }
        Ok(node)
    }

    fn syntax(&self, message: &str) -> ExprError {
        ExprError::Syntax { offset: self.tok_start, message: message.to_string() }
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            self.tok = Tok::End;
            return Ok(());
        };
        self.tok = match c {
            b'0'..=b'9' | b'.' => self.number()?,
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c)
            }
            b'(' => {
                self.pos += 1;
                Tok::Open
            }
            b')' => {
                self.pos += 1;
                Tok::Close
            }
            _ => return Err(self.syntax(&format!("unexpected character `{}`", c as char))),
        };
        Ok(())
    }

    fn number(&mut self) -> Result<Tok, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                digits(self);
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| ExprError::Syntax { offset: start, message: format!("bad number `{text}`") })
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Tok::Op(op @ (b'+' | b'-')) = self.tok {
            self.advance()?;
            let rhs = self.term()?;
            lhs = if op == b'+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(op @ (b'*' | b'/')) = self.tok {
            self.advance()?;
            let rhs = self.unary()?;
            lhs = if op == b'*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.tok == Tok::Op(b'-') {
            self.advance()?;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.tok == Tok::Op(b'+') {
            self.advance()?;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if self.tok != Tok::Op(b'^') {
            return Ok(base);
        }
        self.advance()?;
        let exp_offset = self.tok_start;
        let exponent = match diff::fold(&self.unary()?) {
            Node::Const(c) if c.im == 0.0 && c.re.is_finite() => Exponent::new(c.re),
            _ => return Err(ExprError::NonConstantExponent { offset: exp_offset }),
        };
        if let Node::Var(name) = &base {
            if !exponent.integer {
                return Err(ExprError::FractionalPowerOfVariable {
                    name: name.clone(),
                    exponent: exponent.value,
                });
            }
        }
        Ok(Node::Pow(Box::new(base), exponent))
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Node::constant(v, 0.0))
            }
            Tok::Open => {
                self.advance()?;
                let inner = self.expr()?;
                if self.tok != Tok::Close {
                    return Err(self.syntax("expected `)`"));
                }
                self.advance()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let offset = self.tok_start;
                self.advance()?;
                if self.tok == Tok::Open {
                    let func = Func::from_name(&name)
                        .ok_or(ExprError::UnknownFunction { name: name.clone(), offset })?;
                    self.advance()?;
                    let arg = self.expr()?;
                    if self.tok != Tok::Close {
                        return Err(self.syntax("expected `)`"));
                    }
                    self.advance()?;
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                Ok(match name.as_str() {
                    "i" => Node::Const(Complex64::new(0.0, 1.0)),
                    "pi" => Node::constant(std::f64::consts::PI, 0.0),
                    _ if self.variables.contains(&name.as_str()) => Node::Var(name),
                    _ => Node::Param(name),
                })
            }
            Tok::End => Err(self.syntax("expected an operand, found end of input")),
            _ => Err(self.syntax("expected an operand")),
        }
    }
}
