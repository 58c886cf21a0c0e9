//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term { ("+" | "-") term }
//! term   := factor { ("*" | "/") factor }
//! factor := "-" factor | power
//! power  := atom [ "^" exponent ]
//! atom   := number | "pi" | ident | func "(" expr ")" | "(" expr ")"
//! ```
//!
//! `func` is one of `sin`, `cos`, `log`; exponents are integer literals
//! (optionally negative, optionally parenthesized). Numbers are decimal
//! literals read exactly into rationals.

use super::Expr;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::pow::pow as nt_pow;

/// Syntax error with the byte position it was detected at.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

fn err<T>(pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        pos,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
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

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((start, Tok::End));
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' => {
                let mut end = self.pos;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
                let int_part = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let mut value = BigRational::from_integer(int_part.parse::<BigInt>().unwrap());
                if end < self.src.len() && self.src[end] == b'.' {
                    let frac_start = end + 1;
                    let mut frac_end = frac_start;
                    while frac_end < self.src.len() && self.src[frac_end].is_ascii_digit() {
                        frac_end += 1;
                    }
                    if frac_end == frac_start {
                        return err(end, "expected digits after decimal point");
                    }
                    let frac = std::str::from_utf8(&self.src[frac_start..frac_end]).unwrap();
                    let digits = frac.len();
                    let num = frac.parse::<BigInt>().unwrap();
                    let den = nt_pow(BigInt::from(10), digits);
                    value += BigRational::new(num, den);
                    end = frac_end;
                }
                self.pos = end;
                Tok::Num(value)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let name = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                self.pos = end;
                Tok::Ident(name)
            }
            _ => return err(start, format!("unexpected character `{}`", c as char)),
        };
        Ok((start, tok))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    current: Tok,
    current_pos: usize,
}

pub(super) fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut lexer = Lexer::new(text);
    let (pos, tok) = lexer.next()?;
    let mut parser = Parser {
        lexer,
        current: tok,
        current_pos: pos,
    };
    let e = parser.expr()?;
    if parser.current != Tok::End {
        return err(parser.current_pos, "unexpected trailing input");
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(), ParseError> {
        let (pos, tok) = self.lexer.next()?;
        self.current = tok;
        self.current_pos = pos;
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.current {
                Tok::Plus => {
                    self.advance()?;
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.advance()?;
                    let t = self.term()?;
                    terms.push(Expr::Mul(vec![Expr::int(-1), t]));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.current {
                Tok::Star => {
                    self.advance()?;
                    factors.push(self.factor()?);
                }
                Tok::Slash => {
                    self.advance()?;
                    let denom = self.factor()?;
                    factors.push(Expr::Pow(Box::new(denom), -1));
                }
                _ => break,
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Mul(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.current == Tok::Minus {
            self.advance()?;
            let inner = self.factor()?;
            return Ok(Expr::Mul(vec![Expr::int(-1), inner]));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.current != Tok::Caret {
            return Ok(base);
        }
        self.advance()?;
        let exp = self.exponent()?;
        if self.current == Tok::Caret {
            return err(self.current_pos, "chained `^` is not allowed; parenthesize");
        }
        Ok(Expr::Pow(Box::new(base), exp))
    }

    /// Integer literal exponent: `2`, `-2`, `(2)` or `(-2)`.
    fn exponent(&mut self) -> Result<i64, ParseError> {
        let parenthesized = if self.current == Tok::LParen {
            self.advance()?;
            true
        } else {
            false
        };
        let negative = if self.current == Tok::Minus {
            self.advance()?;
            true
        } else {
            false
        };
        let pos = self.current_pos;
        let value = match &self.current {
            Tok::Num(r) if r.is_integer() => {
                let n: i64 = r
                    .numer()
                    .try_into()
                    .map_err(|_| ParseError {
                        pos,
                        message: "exponent out of range".into(),
                    })?;
                n
            }
            Tok::Num(_) => return err(pos, "non-integer exponent"),
            _ => return err(pos, "expected integer literal exponent"),
        };
        self.advance()?;
        if parenthesized {
            if self.current != Tok::RParen {
                return err(self.current_pos, "expected `)` closing exponent");
            }
            self.advance()?;
        }
        Ok(if negative { -value } else { value })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.current_pos;
        match self.current.clone() {
            Tok::Num(r) => {
                self.advance()?;
                Ok(Expr::Num(r))
            }
            Tok::LParen => {
                self.advance()?;
                let e = self.expr()?;
                if self.current != Tok::RParen {
                    return err(self.current_pos, "expected `)`");
                }
                self.advance()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.advance()?;
                match name.as_str() {
                    "pi" => Ok(Expr::Pi),
                    "sin" | "cos" | "log" => {
                        if self.current != Tok::LParen {
                            return err(self.current_pos, format!("expected `(` after `{name}`"));
                        }
                        self.advance()?;
                        let arg = self.expr()?;
                        if self.current != Tok::RParen {
                            return err(self.current_pos, "expected `)`");
                        }
                        self.advance()?;
                        Ok(match name.as_str() {
                            "sin" => Expr::sin(arg),
                            "cos" => Expr::cos(arg),
                            _ => Expr::log(arg),
                        })
                    }
                    _ => {
                        if self.current == Tok::LParen {
                            return err(pos, format!("unknown function `{name}`"));
                        }
                        Ok(Expr::Sym(name))
                    }
                }
            }
            Tok::End => err(pos, "unexpected end of input"),
            _ => err(pos, "expected a number, symbol or `(`"),
        }
    }
}
