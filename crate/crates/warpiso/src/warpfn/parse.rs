//! Recursive-descent parser for warping-function expressions.
//!
//! Grammar (whitespace insignificant, byte offsets reported in errors):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor
//! factor := atom ('^' atom)?
//! atom   := number | 't' | func '(' expr ')' | '(' expr ')'
//! func   := exp | log | sin | cos | sinh | cosh
//! ```
//!
//! `^` binds tighter than unary minus, so `-t^2` parses as `-(t^2)`.

use super::ast::Expr;
use crate::error::{Error, Result};

pub fn parse(source: &str) -> Result<Expr> {
    let mut p = Parser { src: source.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.at_end() {
        return Err(Error::Syntax { offset: 0, message: "empty expression".into() });
    }
    let expr = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn syntax(&self, message: impl Into<String>) -> Error {
        Error::Syntax { offset: self.pos, message: message.into() }
    }

    fn eat(&mut self, byte: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, byte: u8) -> Result<()> {
        if self.eat(byte) {
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{}`", byte as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
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

    fn term(&mut self) -> Result<Expr> {
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

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.factor()
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exponent = self.atom()?;
            Ok(Expr::Pow(Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.syntax("expected a value")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(self.syntax(format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if self.pos == start || &self.src[start..self.pos] == b"." {
            return Err(Error::Syntax { offset: start, message: "malformed number".into() });
        }
        // Exponent suffix: consume only when a digit actually follows, so
        // that `2exp(t)` does not lex as a number `2e...`.
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mut probe = self.pos + 1;
            if matches!(self.src.get(probe), Some(b'+' | b'-')) {
                probe += 1;
            }
            if matches!(self.src.get(probe), Some(c) if c.is_ascii_digit()) {
                self.pos = probe;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        let value: f64 = text
            .parse()
            .map_err(|_| Error::Syntax { offset: start, message: format!("malformed number `{text}`") })?;
        Ok(Expr::Const(value))
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        if name == "t" {
            return Ok(Expr::Var);
        }
        let ctor: fn(Box<Expr>) -> Expr = match name {
            "exp" => Expr::Exp,
            "log" => Expr::Log,
            "sin" => Expr::Sin,
            "cos" => Expr::Cos,
            "sinh" => Expr::Sinh,
            "cosh" => Expr::Cosh,
            _ => {
                return Err(Error::UnknownIdentifier { name: name.to_owned(), offset: start });
            }
        };
        self.expect(b'(')?;
        let arg = self.expr()?;
        self.skip_ws();
        if self.peek() == Some(b',') {
            return Err(Error::ArityMismatch { name: name.to_owned(), offset: self.pos });
        }
        self.expect(b')')?;
        Ok(ctor(Box::new(arg)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_call() {
        assert_eq!(parse("cosh(t)").unwrap(), Expr::Cosh(Box::new(Expr::Var)));
    }

    #[test]
    fn nested_expression_shape() {
        let e = parse("exp(t^2 - 2*sin(t))").unwrap();
        let expected = Expr::Exp(Box::new(Expr::Sub(
            Box::new(Expr::Pow(Box::new(Expr::Var), Box::new(Expr::Const(2.0)))),
            Box::new(Expr::Mul(
                Box::new(Expr::Const(2.0)),
                Box::new(Expr::Sin(Box::new(Expr::Var))),
            )),
        )));
        assert_eq!(e, expected);
    }

    #[test]
    fn bare_constant() {
        assert_eq!(parse("1").unwrap(), Expr::Const(1.0));
        assert_eq!(parse(" 2.5e-1 ").unwrap(), Expr::Const(0.25));
    }

    #[test]
    fn unary_minus_binds_looser_than_pow() {
        let e = parse("-t^2").unwrap();
        assert_eq!(
            e,
            Expr::Neg(Box::new(Expr::Pow(
                Box::new(Expr::Var),
                Box::new(Expr::Const(2.0))
            )))
        );
    }

    #[test]
    fn empty_source_is_an_error() {
        match parse("") {
            Err(Error::Syntax { offset: 0, .. }) => {}
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_reports_offset() {
        match parse("2*foo(t)") {
            Err(Error::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "foo");
                assert_eq!(offset, 2);
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }

    #[test]
    fn extra_argument_is_an_arity_mismatch() {
        match parse("exp(t, 1)") {
            Err(Error::ArityMismatch { name, .. }) => assert_eq!(name, "exp"),
            other => panic!("expected arity mismatch, got {other:?}"),
        }
    }

    #[test]
    fn trailing_input_is_rejected() {
        match parse("t^2^3") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn number_followed_by_function_is_not_an_exponent() {
        match parse("2exp(t)") {
            // no implicit multiplication: `exp` starts at byte 1 and is
            // trailing input after the number `2`
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 1),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }
}
