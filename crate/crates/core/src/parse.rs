//! The shared polynomial expression grammar.
//!
//! Rationals are `p/q` or integers, variables are declared names, `*` is
//! the product, `+`/`-` form sums, parentheses group, `^` raises to a
//! non-negative integer power. Whitespace is ignored. Products are built
//! left to right, so signs follow declaration order.

use std::sync::Arc;

use num::{BigInt, BigRational};

use crate::context::GradedContext;
use crate::error::{CoreError, Result};
use crate::poly::GradedPoly;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(BigRational),
    Name(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(input: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let numer: String = chars[start..i].iter().collect();
                let numer: BigInt = numer.parse().map_err(|_| {
                    CoreError::Parse(format!("bad integer at offset {start}"))
                })?;
                // A '/' directly after digits is part of the rational literal.
                if i < chars.len() && chars[i] == '/' {
                    i += 1;
                    let dstart = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if dstart == i {
                        return Err(CoreError::Parse(format!(
                            "expected denominator at offset {dstart}"
                        )));
                    }
                    let denom: String = chars[dstart..i].iter().collect();
                    let denom: BigInt = denom.parse().map_err(|_| {
                        CoreError::Parse(format!("bad integer at offset {dstart}"))
                    })?;
                    if denom == BigInt::from(0) {
                        return Err(CoreError::Parse("zero denominator".into()));
                    }
                    out.push(Token::Number(BigRational::new(numer, denom)));
                } else {
                    out.push(Token::Number(BigRational::from(numer)));
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token::Name(chars[start..i].iter().collect()));
            }
            other => {
                return Err(CoreError::Parse(format!(
                    "unexpected character `{other}` at offset {i}"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    ctx: &'a Arc<GradedContext>,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<GradedPoly> {
        let mut negate = false;
        // Leading sign chain.
        while let Some(t) = self.peek() {
            match t {
                Token::Minus => {
                    negate = !negate;
                    self.pos += 1;
                }
                Token::Plus => {
                    self.pos += 1;
                }
                _ => break,
            }
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        while let Some(t) = self.peek() {
            match t {
                Token::Plus => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.add(&rhs)?;
                }
                Token::Minus => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.sub(&rhs)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<GradedPoly> {
        let mut acc = self.factor()?;
        while let Some(Token::Star) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = acc.mul(&rhs)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<GradedPoly> {
        let base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.pos += 1;
            match self.next() {
                Some(Token::Number(n)) if n.is_integer() && n >= BigRational::from(BigInt::from(0)) => {
                    let k: u32 = n.to_integer().try_into().map_err(|_| {
                        CoreError::Parse("exponent too large".into())
                    })?;
                    base.pow(k)
                }
                _ => Err(CoreError::Parse("expected non-negative integer exponent".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<GradedPoly> {
        match self.next() {
            Some(Token::Number(n)) => Ok(GradedPoly::constant(self.ctx, n)),
            Some(Token::Name(name)) => {
                let v = self.ctx.lookup(&name)?;
                Ok(GradedPoly::var(self.ctx, v))
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(CoreError::Parse("missing closing parenthesis".into())),
                }
            }
            Some(Token::Minus) => Ok(self.factor()?.neg()),
            other => Err(CoreError::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

pub fn parse_poly(ctx: &Arc<GradedContext>, input: &str) -> Result<GradedPoly> {
    let tokens = tokenize(input)?;
    let mut p = Parser {
        ctx,
        tokens,
        pos: 0,
    };
    let poly = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(CoreError::Parse(format!(
            "trailing input after position {}",
            p.pos
        )));
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Var;
    use crate::poly::rat;

    fn ctx() -> Arc<GradedContext> {
        GradedContext::new(vec![("x1", 0), ("th1", 1), ("th2", 1)]).unwrap()
    }

    #[test]
    fn parses_rationals_and_products() {
        let c = ctx();
        let p = parse_poly(&c, "1/2 * x1^2 + th1*th2 - 3").unwrap();
        let x = GradedPoly::var(&c, Var(0));
        let expected = x
            .pow(2)
            .unwrap()
            .scale(&rat(1, 2))
            .add(
                &GradedPoly::var(&c, Var(1))
                    .mul(&GradedPoly::var(&c, Var(2)))
                    .unwrap(),
            )
            .unwrap()
            .sub(&GradedPoly::constant(&c, rat(3, 1)))
            .unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn declaration_order_normalizes_signs() {
        let c = ctx();
        let p = parse_poly(&c, "th2*th1").unwrap();
        let q = parse_poly(&c, "-th1*th2").unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_unknown_variable() {
        let c = ctx();
        assert!(parse_poly(&c, "x1 + y").is_err());
    }

    #[test]
    fn print_parse_round_trip() {
        let c = ctx();
        let p = parse_poly(&c, "2*x1^3 - 1/3*th1*th2*x1 + 7").unwrap();
        let back = parse_poly(&c, &p.to_string()).unwrap();
        assert_eq!(p, back);
    }
}
