//! Canonical text, JSON and LaTeX forms of differential polynomials, plus a
//! small expression parser.
//!
//! Grammar (whitespace between factors means multiplication):
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := power (('*' | '/' | <juxtaposition>) power)*
//! power  := atom ['^' integer]
//! atom   := integer | symbol | '(' expr ')'
//! symbol := name ['_' 'x'+]
//! ```
//!
//! Names are the field names (`p q r s alpha beta A B C E F G rho delta`),
//! `mu`, and `h`, which expands to `μ(ps+qr+rs−2αβ)`; `h_x` etc. are its
//! total derivatives. Division is only by rational constants.

use std::fmt;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DiffPoly, Field, Jet, Monomial, MuMode};
use crate::grassmann::{format_rational, parse_rational, Rational};

pub(super) fn to_text(p: &DiffPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        if !mag.is_one() || m.is_constant() && m.mu_power() == 0 {
            factors.push(format_rational(&mag));
        }
        match m.mu_power() {
            0 => {}
            1 => factors.push("mu".into()),
            k => factors.push(format!("mu^{k}")),
        }
        for (j, e) in m.even_factors() {
            if *e == 1 {
                factors.push(j.to_string());
            } else {
                factors.push(format!("{j}^{e}"));
            }
        }
        for j in m.odd_word().factors() {
            factors.push(j.to_string());
        }
        out.push_str(&factors.join("*"));
    }
    out
}

fn latex_jet(j: &Jet) -> String {
    if j.order == 0 {
        j.field.latex().to_string()
    } else {
        format!("{}_{{{}}}", j.field.latex(), "x".repeat(j.order as usize))
    }
}

fn latex_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", r.numer(), r.denom())
    }
}

pub(super) fn to_latex(p: &DiffPoly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { "-" } else { "+" });
        }
        if !mag.is_one() || (m.is_constant() && m.mu_power() == 0) {
            out.push_str(&latex_rational(&mag));
        }
        match m.mu_power() {
            0 => {}
            1 => out.push_str("\\mu "),
            k => out.push_str(&format!("\\mu^{{{k}}}")),
        }
        for (j, e) in m.even_factors() {
            out.push_str(&latex_jet(j));
            if *e > 1 {
                out.push_str(&format!("^{{{e}}}"));
            }
        }
        for j in m.odd_word().factors() {
            out.push_str(&latex_jet(j));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub mu: u32,
    pub even: Vec<(String, u16, u32)>,
    pub odd: Vec<(String, u16)>,
}

/// Wire form: `{"terms":[{"coeff":"-1/2","mu":0,"even":[["p",0,1]],"odd":[["alpha",0]]}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffPolyJson {
    pub terms: Vec<TermJson>,
}

impl From<&DiffPoly> for DiffPolyJson {
    fn from(p: &DiffPoly) -> Self {
        DiffPolyJson {
            terms: p
                .terms()
                .map(|(m, c)| TermJson {
                    coeff: format_rational(c),
                    mu: m.mu_power(),
                    even: m
                        .even_factors()
                        .iter()
                        .map(|(j, e)| (j.field.name().to_string(), j.order, *e))
                        .collect(),
                    odd: m
                        .odd_word()
                        .factors()
                        .iter()
                        .map(|j| (j.field.name().to_string(), j.order))
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<DiffPolyJson> for DiffPoly {
    type Error = ParseError;

    fn try_from(js: DiffPolyJson) -> Result<Self, Self::Error> {
        let mut out = DiffPoly::zero();
        for t in js.terms {
            let c = parse_rational(&t.coeff).ok_or(ParseError::BadNumber(t.coeff.clone()))?;
            let mut jets = Vec::new();
            for (name, order, e) in &t.even {
                let f = Field::from_name(name)
                    .ok_or_else(|| ParseError::UnknownSymbol(name.clone()))?;
                if f.is_odd() {
                    return Err(ParseError::Parity(name.clone()));
                }
                for _ in 0..*e {
                    jets.push(Jet::new(f, *order));
                }
            }
            let mut odd = Vec::new();
            for (name, order) in &t.odd {
                let f = Field::from_name(name)
                    .ok_or_else(|| ParseError::UnknownSymbol(name.clone()))?;
                if !f.is_odd() {
                    return Err(ParseError::Parity(name.clone()));
                }
                odd.push(Jet::new(f, *order));
            }
            if odd.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ParseError::NonCanonical);
            }
            jets.extend(odd);
            out += &DiffPoly::product(c, t.mu, &jets);
        }
        Ok(out)
    }
}

impl Serialize for DiffPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DiffPolyJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiffPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let js = DiffPolyJson::deserialize(d)?;
        DiffPoly::try_from(js).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected character {0:?} at byte {1}")]
    UnexpectedChar(char, usize),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("bad number {0:?}")]
    BadNumber(String),
    #[error("division by a non-constant or by zero")]
    BadDivision,
    #[error("parity mismatch for {0:?}")]
    Parity(String),
    #[error("odd word not in canonical order")]
    NonCanonical,
    #[error("trailing input at byte {0}")]
    Trailing(usize),
}

/// Parser configuration: how `mu` and `h` are interpreted.
#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub mu: MuMode,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            mu: MuMode::Symbolic,
        }
    }
}

pub fn parse(s: &str) -> Result<DiffPoly, ParseError> {
    parse_with(s, &ParseOptions::default())
}

pub fn parse_with(s: &str, opts: &ParseOptions) -> Result<DiffPoly, ParseError> {
    let mut p = Parser {
        src: s.as_bytes(),
        pos: 0,
        opts,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ParseError::Trailing(p.pos));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    opts: &'a ParseOptions,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src.get(self.pos).map(|&b| b as char)
    }

    fn expr(&mut self) -> Result<DiffPoly, ParseError> {
        let mut acc = DiffPoly::zero();
        let mut sign = 1;
        match self.peek() {
            Some('-') => {
                sign = -1;
                self.pos += 1;
            }
            Some('+') => self.pos += 1,
            _ => {}
        }
        let t = self.term()?;
        acc = if sign < 0 { &acc - &t } else { &acc + &t };
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc += &t;
                }
                Some('-') => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc -= &t;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_atom(c: char) -> bool {
        c.is_ascii_alphanumeric() || c == '('
    }

    fn term(&mut self) -> Result<DiffPoly, ParseError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    let f = self.power()?;
                    acc = &acc * &f;
                }
                Some('/') => {
                    self.pos += 1;
                    let d = self.power()?;
                    if !d.is_scalar() || d.max_mu_power() > 0 || d.is_zero() {
                        return Err(ParseError::BadDivision);
                    }
                    let c = d.constant_term();
                    acc = acc.scale(&(Rational::one() / c));
                }
                Some(c) if Self::starts_atom(c) => {
                    let f = self.power()?;
                    acc = &acc * &f;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<DiffPoly, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let txt = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let k: u32 = txt
                .parse()
                .map_err(|_| ParseError::BadNumber(txt.to_string()))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<DiffPoly, ParseError> {
        let c = self.peek().ok_or(ParseError::UnexpectedEnd)?;
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            if self.peek() != Some(')') {
                return match self.peek() {
                    Some(ch) => Err(ParseError::UnexpectedChar(ch, self.pos)),
                    None => Err(ParseError::UnexpectedEnd),
                };
            }
            self.pos += 1;
            return Ok(e);
        }
        if c.is_ascii_digit() {
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let txt = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let r = parse_rational(txt).ok_or_else(|| ParseError::BadNumber(txt.to_string()))?;
            return Ok(DiffPoly::constant(r));
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_alphabetic() {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .to_string();
            let mut order = 0u16;
            if self.pos < self.src.len() && self.src[self.pos] == b'_' {
                self.pos += 1;
                while self.pos < self.src.len() && self.src[self.pos] == b'x' {
                    order += 1;
                    self.pos += 1;
                }
                if order == 0 {
                    return Err(ParseError::UnexpectedChar('_', self.pos - 1));
                }
            }
            return self.symbol(&name, order);
        }
        Err(ParseError::UnexpectedChar(c, self.pos))
    }

    fn symbol(&self, name: &str, order: u16) -> Result<DiffPoly, ParseError> {
        match name {
            "mu" if order == 0 => Ok(self.opts.mu.mu()),
            "h" => Ok(h_of(&self.opts.mu).d_total_n(order as u32)),
            _ => Field::from_name(name)
                .map(|f| DiffPoly::jet(Jet::new(f, order)))
                .ok_or_else(|| ParseError::UnknownSymbol(name.to_string())),
        }
    }
}

/// `h = μ(ps + qr + rs − 2αβ)`.
pub fn h_of(mu: &MuMode) -> DiffPoly {
    use super::vars::*;
    let inner =
        &(&(&(&p() * &s()) + &(&q() * &r())) + &(&r() * &s())) - &(&alpha() * &beta()).scale_int(2);
    &mu.mu() * &inner
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = DiffPoly::from_term(self.clone(), Rational::one());
        write!(f, "{}", to_text(&p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::rat;

    #[test]
    fn text_round_trip() {
        let src = "-1/2*p*q - alpha*beta + mu^2*p_xx^3*alpha_x + 7";
        let p = parse(src).unwrap();
        assert_eq!(parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn json_shape() {
        let p = parse("-1/2*p*q*alpha*beta").unwrap();
        let js = serde_json::to_string(&p).unwrap();
        assert_eq!(
            js,
            r#"{"terms":[{"coeff":"-1/2","mu":0,"even":[["p",0,1],["q",0,1]],"odd":[["alpha",0],["beta",0]]}]}"#
        );
        let back: DiffPoly = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn json_rejects_unsorted_odd_word() {
        let js = r#"{"terms":[{"coeff":"1","mu":0,"even":[],"odd":[["beta",0],["alpha",0]]}]}"#;
        assert!(serde_json::from_str::<DiffPoly>(js).is_err());
    }

    #[test]
    fn h_expansion_and_mu_value() {
        let opts = ParseOptions {
            mu: MuMode::Value(rat(1, 2)),
        };
        let h = parse_with("h", &opts).unwrap();
        assert_eq!(
            h,
            parse("1/2*p*s + 1/2*q*r + 1/2*r*s - alpha*beta").unwrap()
        );
        let hx = parse("h_x").unwrap();
        assert_eq!(hx, parse("h").unwrap().d_total());
    }

    #[test]
    fn juxtaposition_and_division() {
        assert_eq!(parse("2 p q/4").unwrap(), parse("1/2*p*q").unwrap());
        assert!(parse("p/q").is_err());
        assert!(parse("p +").is_err());
        assert!(parse("foo").is_err());
    }

    #[test]
    fn latex_symbol_names() {
        let p = parse("-1/2*p_x*alpha + mu*beta_xx").unwrap();
        let l = p.to_latex();
        assert!(l.contains("\\frac{1}{2}"));
        assert!(l.contains("p_{x}\\alpha"));
        assert!(l.contains("\\mu \\beta_{xx}"));
    }
}
