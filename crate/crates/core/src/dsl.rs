//! Text syntax for fields, elements, forms and Pfister symbols.
//!
//! ```text
//! field    := "GF(" int ")" level*
//! level    := "((" sym "))" | "(" sym ")"
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | power
//! power    := atom ("^" "-"? int)?
//! atom     := int | sym | "(" expr ")"
//! form     := "diag[" (expr ("," expr)*)? "]"
//! qsymbol  := "<<" (expr ("," expr)* ";")? expr "]]"
//! bsymbol  := "<<" expr ("," expr)* ">>"
//! ```
//!
//! Integers are reduced modulo the characteristic; `g` names the generator of a
//! non-prime base field.

use crate::error::{Error, Result};
use crate::fields::{Element, FieldTower, LevelDescriptor};
use crate::pfister::{BilinearPfisterSymbol, QuadraticPfisterSymbol};
use crate::qforms::QuadraticForm;

/// A parsed Pfister symbol of either kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PfisterInput {
    Quadratic(QuadraticPfisterSymbol),
    Bilinear(BilinearPfisterSymbol),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += self.rest().chars().next().unwrap().len_utf8();
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn error(&mut self, expected: &str) -> Error {
        self.skip_ws();
        let found = match self.rest().chars().next() {
            None => "end of input".to_string(),
            Some(_) => format!("`{}`", self.rest().chars().take(8).collect::<String>()),
        };
        Error::Parse {
            position: self.pos,
            expected: expected.into(),
            found,
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("`{token}`")))
        }
    }

    fn end(&mut self) -> Result<()> {
        self.skip_ws();
        if self.rest().is_empty() {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let n = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if n == 0 {
            return None;
        }
        let s = &self.rest()[..n];
        self.pos += n;
        Some(s)
    }

    fn int(&mut self) -> Result<u64> {
        let at = self.pos;
        let d = self.digits().ok_or_else(|| self.error("integer"))?;
        d.parse().map_err(|_| Error::Parse {
            position: at,
            expected: "integer that fits in 64 bits".into(),
            found: d.into(),
        })
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let r = self.rest();
        if !r.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return None;
        }
        let n = r
            .bytes()
            .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_')
            .count();
        self.pos += n;
        Some(&r[..n])
    }

    fn field(&mut self) -> Result<FieldTower> {
        self.expect("GF(")?;
        let at = self.pos;
        let q = self.int()?;
        self.expect(")")?;
        let mut k = FieldTower::finite(q).map_err(|e| self.at(at, e))?;
        loop {
            let at = self.pos;
            let level = if self.eat("((") {
                let s = self.ident().ok_or_else(|| self.error("level symbol"))?;
                self.expect("))")?;
                LevelDescriptor::laurent(s)
            } else if self.eat("(") {
                let s = self.ident().ok_or_else(|| self.error("level symbol"))?;
                self.expect(")")?;
                LevelDescriptor::rational(s)
            } else {
                break;
            };
            k = k.with_level(level).map_err(|e| self.at(at, e))?;
        }
        Ok(k)
    }

    /// Attaches a position to semantic errors that have none.
    fn at(&self, position: usize, e: Error) -> Error {
        match e {
            Error::Parse { .. } => e,
            other => Error::Parse {
                position,
                expected: "valid input".into(),
                found: other.to_string(),
            },
        }
    }

    fn expr(&mut self, k: &FieldTower) -> Result<Element> {
        let mut acc = self.term(k)?;
        loop {
            if self.eat("+") {
                acc = k.add(&acc, &self.term(k)?);
            } else if self.peek() == Some('-') {
                self.eat("-");
                acc = k.sub(&acc, &self.term(k)?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self, k: &FieldTower) -> Result<Element> {
        let mut acc = self.unary(k)?;
        loop {
            if self.eat("*") {
                acc = k.mul(&acc, &self.unary(k)?);
            } else if self.peek() == Some('/') {
                self.eat("/");
                let at = self.pos;
                let d = self.unary(k)?;
                acc = k.div(&acc, &d).map_err(|e| self.at(at, e))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self, k: &FieldTower) -> Result<Element> {
        if self.eat("-") {
            return Ok(k.neg(&self.unary(k)?));
        }
        self.power(k)
    }

    fn power(&mut self, k: &FieldTower) -> Result<Element> {
        let base = self.atom(k)?;
        if !self.eat("^") {
            return Ok(base);
        }
        let at = self.pos;
        let neg = self.eat("-");
        let e = self.int()?;
        let e = i64::try_from(e).map_err(|_| self.error("smaller exponent"))?;
        k.pow(&base, if neg { -e } else { e }).map_err(|err| self.at(at, err))
    }

    fn atom(&mut self, k: &FieldTower) -> Result<Element> {
        if self.eat("(") {
            let e = self.expr(k)?;
            self.expect(")")?;
            return Ok(e);
        }
        if let Some(d) = self.digits() {
            let p = k.characteristic() as u64;
            let r = d.bytes().fold(0u64, |acc, b| (acc * 10 + (b - b'0') as u64) % p);
            return Ok(k.from_int(r as i64));
        }
        let at = self.pos;
        match self.ident() {
            Some(s) => k.symbol(s).map_err(|e| self.at(at, e)),
            None => Err(self.error("integer, symbol or `(`")),
        }
    }

    fn list(&mut self, k: &FieldTower, close: &str) -> Result<Vec<Element>> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(self.expr(k)?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn symbol(&mut self, k: &FieldTower) -> Result<PfisterInput> {
        let start = self.pos;
        self.expect("<<")?;
        let mut slots = Vec::new();
        loop {
            slots.push(self.expr(k)?);
            if self.eat(",") {
                continue;
            }
            if self.eat(">>") {
                let s = BilinearPfisterSymbol::new(k, slots).map_err(|e| self.at(start, e))?;
                return Ok(PfisterInput::Bilinear(s));
            }
            if self.eat(";") {
                let b = self.expr(k)?;
                self.expect("]]")?;
                let s = QuadraticPfisterSymbol::new(k, slots, b).map_err(|e| self.at(start, e))?;
                return Ok(PfisterInput::Quadratic(s));
            }
            if self.eat("]]") {
                let b = slots.pop().expect("at least one entry");
                let s = QuadraticPfisterSymbol::new(k, slots, b).map_err(|e| self.at(start, e))?;
                return Ok(PfisterInput::Quadratic(s));
            }
            return Err(self.error("`,`, `;`, `]]` or `>>`"));
        }
    }
}

pub fn parse_field(src: &str) -> Result<FieldTower> {
    let mut p = Parser::new(src);
    let k = p.field()?;
    p.end()?;
    Ok(k)
}

pub fn parse_element(k: &FieldTower, src: &str) -> Result<Element> {
    let mut p = Parser::new(src);
    let e = p.expr(k)?;
    p.end()?;
    Ok(e)
}

pub fn parse_form(k: &FieldTower, src: &str) -> Result<QuadraticForm> {
    let mut p = Parser::new(src);
    p.expect("diag[")?;
    let entries = p.list(k, "]")?;
    p.end()?;
    QuadraticForm::new(k, entries).map_err(|e| p.at(0, e))
}

pub fn parse_symbol(k: &FieldTower, src: &str) -> Result<PfisterInput> {
    let mut p = Parser::new(src);
    let s = p.symbol(k)?;
    p.end()?;
    Ok(s)
}

pub fn parse_quadratic_symbol(k: &FieldTower, src: &str) -> Result<QuadraticPfisterSymbol> {
    match parse_symbol(k, src)? {
        PfisterInput::Quadratic(s) => Ok(s),
        PfisterInput::Bilinear(_) => Err(Error::Parse {
            position: src.len(),
            expected: "`]]` closing a quadratic symbol".into(),
            found: "`>>`".into(),
        }),
    }
}

pub fn parse_bilinear_symbol(k: &FieldTower, src: &str) -> Result<BilinearPfisterSymbol> {
    match parse_symbol(k, src)? {
        PfisterInput::Bilinear(s) => Ok(s),
        PfisterInput::Quadratic(_) => Err(Error::Parse {
            position: src.len(),
            expected: "`>>` closing a bilinear symbol".into(),
            found: "`]]`".into(),
        }),
    }
}
