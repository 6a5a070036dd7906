//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' signed_int)?
//! base   := number | ident | ident '(' expr ')'
//!         | 'D' '(' expr ',' ident ',' uint ')'
//!         | '(' expr ')' | '-' factor
//! ```
//!
//! Decimal literals become exact rationals (`0.25` is `1/4`). Function
//! identifiers are reserved: they must be followed by an argument list.
//! Exponents are bounded so a typo cannot trigger huge exact arithmetic.

use super::{BigInt, Expr, Func, Rational, Symbol};
use num_traits::{Num as _, Pow as _};
use std::fmt;
use thiserror::Error;

const MAX_EXPONENT: i64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at byte {}: {}", self.offset, self.message)
    }
}

pub fn parse(input: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: input.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("expected end of input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> ParseError {
        let found = match self.src.get(self.pos) {
            Some(&c) => format!("{}, found {:?}", message, char::from(c)),
            None => format!("{}, found end of input", message),
        };
        ParseError {
            offset: self.pos,
            message: found,
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.src.get(self.pos), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, what: &str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    terms.push(self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    factors.push(self.factor()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    factors.push(Expr::pow(self.factor()?, -1));
                }
                _ => break,
            }
        }
        Ok(Expr::mul(factors))
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.signed_int()?;
            return Ok(Expr::pow(base, k));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.factor()?.neg())
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', "expected ')'")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident_or_call(),
            _ => Err(self.err("expected a factor")),
        }
    }

    fn ident_or_call(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if name == "D" {
            if self.peek() != Some(b'(') {
                self.pos = start;
                return Err(self.err("'D' is reserved for derivative markers"));
            }
            self.pos += 1;
            let f = self.expr()?;
            self.expect(b',', "expected ',' after derivative operand")?;
            let var = self.plain_ident()?;
            self.expect(b',', "expected ',' after derivative variable")?;
            let n = self.unsigned_int()?;
            let n = u32::try_from(n).map_err(|_| self.err("derivative order out of range"))?;
            self.expect(b')', "expected ')'")?;
            return Ok(Expr::der(f, Symbol::new(&var), n));
        }
        if let Some(func) = Func::from_name(name) {
            if self.peek() != Some(b'(') {
                self.pos = start;
                return Err(self.err("function name requires an argument list"));
            }
            self.pos += 1;
            let arg = self.expr()?;
            self.expect(b')', "expected ')'")?;
            return Ok(Expr::call(func, arg));
        }
        if self.peek() == Some(b'(') {
            self.pos = start;
            return Err(self.err("unknown function"));
        }
        Ok(Expr::sym(name))
    }

    fn plain_ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {}
            _ => return Err(self.err("expected an identifier")),
        }
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string())
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let int_part = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let mut value = Rational::from_integer(BigInt::from_str_radix(int_part, 10).unwrap());
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let fstart = self.pos;
            while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == fstart {
                return Err(self.err("expected digits after decimal point"));
            }
            let frac = std::str::from_utf8(&self.src[fstart..self.pos]).unwrap();
            let numer = BigInt::from_str_radix(frac, 10).unwrap();
            let denom = BigInt::from(10u32).pow((self.pos - fstart) as u32);
            value += Rational::new(numer, denom);
        }
        Ok(Expr::Num(value))
    }

    fn unsigned_int(&mut self) -> Result<i64, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {}
            _ => return Err(self.err("expected an integer")),
        }
        let start = self.pos;
        while matches!(self.src.get(self.pos), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<i64>()
            .ok()
            .filter(|k| *k <= MAX_EXPONENT)
            .ok_or_else(|| ParseError {
                offset: start,
                message: format!("integer exceeds bound {MAX_EXPONENT}"),
            })
    }

    fn signed_int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat(b'-');
        let k = self.unsigned_int()?;
        Ok(if neg { -k } else { k })
    }
}
