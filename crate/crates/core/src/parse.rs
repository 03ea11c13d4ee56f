//! Recursive-descent parser for polynomial expressions and ring descriptors.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | identifier | '(' expr ')'
//! ```
//!
//! Identifiers resolve to polynomial variables first, then to the nilpotent
//! generators of the scalar ring. Division is only allowed by constants that
//! are units of the scalar ring.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::mpoly::MPoly;
use crate::scalar::{is_identifier, BaseField, Scalar, ScalarRing};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push((Tok::Int(s.parse().expect("digits")), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => {
                return Err(Error::Syntax { position: start, message: format!("unexpected character `{c}`") })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    ring: &'a ScalarRing,
    vars: &'a Arc<Vec<String>>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { position: self.offset(), message: message.into() })
    }

    fn expr(&mut self) -> Result<MPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.offset();
                    let den = self.unary()?;
                    let c = den.constant_value().ok_or(Error::Syntax {
                        position: at,
                        message: "division by a non-constant expression".into(),
                    })?;
                    let inv = c.inverse().ok_or(Error::Syntax {
                        position: at,
                        message: format!("division by non-unit {c}"),
                    })?;
                    acc = acc.scale_by(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<MPoly> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MPoly> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    let e: u32 = match u32::try_from(&n) {
                        Ok(e) => e,
                        Err(_) => return self.syntax("exponent too large"),
                    };
                    self.pos += 1;
                    return Ok(base.pow(e));
                }
                _ => return self.syntax("expected a nonnegative integer exponent"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MPoly> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(MPoly::constant(self.ring, self.vars, self.ring.from_bigint(&n)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    Ok(MPoly::var(self.ring, self.vars, i))
                } else if let Some(g) = self.ring.generator_by_name(&name) {
                    Ok(MPoly::constant(self.ring, self.vars, g))
                } else {
                    Err(Error::UnknownIdentifier { name, position: at })
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.syntax("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(t) => self.syntax(format!("unexpected token {t:?}")),
            None => self.syntax("unexpected end of input"),
        }
    }
}

/// Parse `text` as a polynomial in `vars` with coefficients in `ring`.
pub fn parse_poly<S: AsRef<str>>(text: &str, vars: &[S], ring: &ScalarRing) -> Result<MPoly> {
    let vars: Arc<Vec<String>> = Arc::new(vars.iter().map(|s| s.as_ref().to_string()).collect());
    parse_poly_in(text, &vars, ring)
}

pub fn parse_poly_in(text: &str, vars: &Arc<Vec<String>>, ring: &ScalarRing) -> Result<MPoly> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.chars().count(), ring, vars };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return p.syntax("trailing input");
    }
    Ok(out)
}

/// Parse a scalar of `ring`, e.g. `"3/2"`, `"1 + 2*e"`.
pub fn parse_scalar(text: &str, ring: &ScalarRing) -> Result<Scalar> {
    let no_vars: [&str; 0] = [];
    let p = parse_poly(text, &no_vars, ring)?;
    Ok(p.constant_value().expect("polynomial in no variables is constant"))
}

fn parse_base(text: &str) -> Result<BaseField> {
    let t = text.trim();
    match t {
        "Q" | "QQ" => return Ok(BaseField::Rationals),
        _ => {}
    }
    let digits = t
        .strip_prefix("GF(")
        .and_then(|s| s.strip_suffix(')'))
        .or_else(|| t.strip_prefix("F_"))
        .or_else(|| t.strip_prefix("GF"))
        .or_else(|| t.strip_prefix('F'));
    match digits.and_then(|d| d.trim().parse::<u64>().ok()) {
        Some(p) => Ok(BaseField::Prime(p)),
        None => Err(Error::InvalidRing(format!("unknown base field `{t}`"))),
    }
}

/// Parse a ring descriptor: `QQ`, `GF(7)`, `QQ[e]/(e^2)`,
/// `GF(5)[a,b]/(a^2, a*b, b^2)`.
pub fn parse_ring(text: &str) -> Result<ScalarRing> {
    let t = text.trim();
    let Some(open) = t.find('[') else {
        return ScalarRing::field(parse_base(t)?);
    };
    let base = parse_base(&t[..open])?;
    let close = t[open..]
        .find(']')
        .map(|i| i + open)
        .ok_or_else(|| Error::InvalidRing("missing `]`".into()))?;
    let gens: Vec<String> = t[open + 1..close].split(',').map(|s| s.trim().to_string()).collect();
    if gens.iter().any(|g| !is_identifier(g)) {
        return Err(Error::InvalidRing(format!("bad generator list `{}`", &t[open + 1..close])));
    }
    let rest = t[close + 1..].trim();
    let rels_text = rest
        .strip_prefix('/')
        .map(str::trim)
        .and_then(|s| s.strip_prefix('('))
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::InvalidRing("expected `/(relations)` after generators".into()))?;
    let relations = parse_monomials(rels_text, &gens)?;
    ScalarRing::test_ring_from_relations(base, gens, relations)
}

/// Parse a comma-separated list of monomials such as `e1^2, e1*e2`.
pub fn parse_monomials(text: &str, gens: &[String]) -> Result<Vec<Vec<u32>>> {
    let q = ScalarRing::rationals();
    text.split(',')
        .map(|m| {
            let p = parse_poly(m.trim(), gens, &q).map_err(|e| Error::InvalidRing(e.to_string()))?;
            match (p.num_terms(), p.leading_term()) {
                (1, Some((mono, c))) if c.is_one() => Ok(mono.0.clone()),
                _ => Err(Error::InvalidRing(format!("`{}` is not a monomial", m.trim()))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cusp() {
        let q = ScalarRing::rationals();
        let p = parse_poly("y^2 - x^3", &["x", "y"], &q).unwrap();
        assert_eq!(p.to_string(), "-x^3 + y^2");
    }

    #[test]
    fn expands_products() {
        let q = ScalarRing::rationals();
        let p = parse_poly("y*(y - x)", &["x", "y"], &q).unwrap();
        let expected = parse_poly("y^2 - x*y", &["x", "y"], &q).unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn fractions_in_prime_field() {
        let f7 = ScalarRing::prime_field(7).unwrap();
        let p = parse_poly("3/2*x + 1", &["x"], &f7).unwrap();
        assert_eq!(p.to_string(), "5*x + 1");
    }

    #[test]
    fn reports_positions() {
        let q = ScalarRing::rationals();
        let err = parse_poly("x + * y", &["x", "y"], &q).unwrap_err();
        assert_eq!(err.location(), Some(4));
        let err = parse_poly("x + z", &["x", "y"], &q).unwrap_err();
        assert_eq!(err, Error::UnknownIdentifier { name: "z".into(), position: 4 });
        assert!(parse_poly("x / y", &["x", "y"], &q).is_err());
        assert!(parse_poly("(x + y", &["x", "y"], &q).is_err());
        assert!(parse_poly("x^-1", &["x"], &q).is_err());
    }

    #[test]
    fn generators_resolve_as_scalars() {
        let r = parse_ring("QQ[e]/(e^2)").unwrap();
        let p = parse_poly("t^2 + e*t^3 + e", &["t"], &r).unwrap();
        assert_eq!(p.to_string(), "e*t^3 + t^2 + e");
        let s = parse_scalar("(2 + e)^2", &r).unwrap();
        assert_eq!(s.to_string(), "4 + 4*e");
    }

    #[test]
    fn ring_descriptors() {
        assert_eq!(parse_ring("QQ").unwrap(), ScalarRing::rationals());
        assert_eq!(parse_ring("GF(7)").unwrap(), ScalarRing::prime_field(7).unwrap());
        assert_eq!(parse_ring("F_5").unwrap().characteristic(), 5);
        let r = parse_ring("QQ[e]/(e^3)").unwrap();
        assert_eq!(r.nilpotency(), 3);
        assert_eq!(parse_ring(&r.to_string()).unwrap(), r);
        let r2 = parse_ring("GF(5)[a,b]/(a^2, b^2)").unwrap();
        assert_eq!(r2.nilpotency(), 3);
        assert!(parse_ring("QQ[a,b]/(a^2)").is_err());
        assert!(parse_ring("GF(6)").is_err());
    }
}
