//! Shared recursive-descent parser for small polynomial expressions.
//!
//! Grammar (used by the Phi parser, Q-polynomial overrides and weight
//! expressions, each with its own symbol table):
//!
//! ```text
//! expr   := ['-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := rational | symbol | factor '^' posint | '(' expr ')'
//! ```
//!
//! Rationals are integer literals or `p/q` fractions. Symbols are an
//! ASCII identifier followed by a positive integer, e.g. `c2`, `z1`,
//! `lambda2`, `theta1`.

use num::{BigInt, BigRational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

/// Parsed expression tree over abstract symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Rational(BigRational),
    Symbol { name: String, index: u32 },
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Box<Expr>, u32),
    Neg(Box<Expr>),
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Sym(String, u32),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    End,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            offset,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token plus its starting offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::End, start));
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
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
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
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                self.pos = end;
                Tok::Int(text.parse().unwrap())
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let mut end = self.pos;
                while end < self.src.len() && self.src[end].is_ascii_alphabetic() {
                    end += 1;
                }
                let name = std::str::from_utf8(&self.src[self.pos..end])
                    .unwrap()
                    .to_string();
                let digits_start = end;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
                if digits_start == end {
                    return Err(self.err(
                        start,
                        format!("symbol `{name}` must carry an index, e.g. {name}1"),
                    ));
                }
                let idx: u32 = std::str::from_utf8(&self.src[digits_start..end])
                    .unwrap()
                    .parse()
                    .map_err(|_| self.err(digits_start, "index out of range"))?;
                if idx == 0 {
                    return Err(self.err(digits_start, "indices are 1-based"));
                }
                self.pos = end;
                Tok::Sym(name, idx)
            }
            other => {
                return Err(self.err(start, format!("unexpected character `{}`", other as char)))
            }
        };
        Ok((tok, start))
    }

    fn peek(&mut self) -> Result<(Tok, usize), ParseError> {
        let save = self.pos;
        let t = self.next()?;
        self.pos = save;
        Ok(t)
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut lx = Lexer::new(src);
    let e = parse_sum(&mut lx)?;
    let (tok, off) = lx.peek()?;
    if tok != Tok::End {
        return Err(ParseError {
            offset: off,
            message: "trailing input".into(),
        });
    }
    Ok(e)
}

fn parse_sum(lx: &mut Lexer) -> Result<Expr, ParseError> {
    let mut terms = Vec::new();
    // optional leading sign
    let (tok, _) = lx.peek()?;
    let mut lead_neg = false;
    if tok == Tok::Minus {
        lx.next()?;
        lead_neg = true;
    }
    let first = parse_term(lx)?;
    terms.push(if lead_neg {
        Expr::Neg(Box::new(first))
    } else {
        first
    });
    loop {
        let (tok, _) = lx.peek()?;
        match tok {
            Tok::Plus => {
                lx.next()?;
                terms.push(parse_term(lx)?);
            }
            Tok::Minus => {
                lx.next()?;
                terms.push(Expr::Neg(Box::new(parse_term(lx)?)));
            }
            _ => break,
        }
    }
    Ok(if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        Expr::Sum(terms)
    })
}

fn parse_term(lx: &mut Lexer) -> Result<Expr, ParseError> {
    let mut factors = vec![parse_factor(lx)?];
    loop {
        let (tok, _) = lx.peek()?;
        if tok == Tok::Star {
            lx.next()?;
            factors.push(parse_factor(lx)?);
        } else {
            break;
        }
    }
    Ok(if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::Product(factors)
    })
}

fn parse_factor(lx: &mut Lexer) -> Result<Expr, ParseError> {
    let (tok, off) = lx.next()?;
    let mut base = match tok {
        Tok::Int(n) => {
            // possible rational literal p/q
            let (next, _) = lx.peek()?;
            if next == Tok::Slash {
                lx.next()?;
                let (dtok, doff) = lx.next()?;
                match dtok {
                    Tok::Int(d) if !num::Zero::is_zero(&d) => {
                        Expr::Rational(BigRational::new(n, d))
                    }
                    _ => {
                        return Err(ParseError {
                            offset: doff,
                            message: "expected nonzero integer denominator".into(),
                        })
                    }
                }
            } else {
                Expr::Rational(BigRational::from_integer(n))
            }
        }
        Tok::Sym(name, index) => Expr::Symbol { name, index },
        Tok::LParen => {
            let inner = parse_sum(lx)?;
            let (close, coff) = lx.next()?;
            if close != Tok::RParen {
                return Err(ParseError {
                    offset: coff,
                    message: "expected `)`".into(),
                });
            }
            inner
        }
        Tok::End => {
            return Err(ParseError {
                offset: off,
                message: "expected a term".into(),
            })
        }
        _ => {
            return Err(ParseError {
                offset: off,
                message: "expected rational, symbol or `(`".into(),
            })
        }
    };
    loop {
        let (tok, _) = lx.peek()?;
        if tok == Tok::Caret {
            lx.next()?;
            let (etok, eoff) = lx.next()?;
            match etok {
                Tok::Int(n) => {
                    let exp: u32 = n.try_into().map_err(|_| ParseError {
                        offset: eoff,
                        message: "exponent out of range".into(),
                    })?;
                    base = Expr::Power(Box::new(base), exp);
                }
                _ => {
                    return Err(ParseError {
                        offset: eoff,
                        message: "expected positive integer exponent".into(),
                    })
                }
            }
        } else {
            break;
        }
    }
    Ok(base)
}
