//! Matrix pseudo-differential operators built from multiplication, `∂` and
//! `∂⁻¹`.
//!
//! An entry is a finite sum of `scalar · F₁∘F₂∘…∘Fₖ` where each `Fᵢ` is
//! multiplication by a bare monomial, `∂`, or `∂⁻¹`, and scalars are
//! rational multiples of powers of μ. Chains are kept in a normal form:
//! multiplication factors are single monomials with unit coefficient,
//! adjacent multiplications are merged, `∂∘∂⁻¹` cancels and `∂` is pushed to
//! the right through multiplications by `∂∘f = f∘∂ + f_x`. `∂⁻¹∘∂` is left
//! alone since it is the identity only on constant-free images.
//!
//! Applying an operator groups the chains of a whole row by common prefixes,
//! so each `∂⁻¹` is taken once of the full sum that reaches it.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use thiserror::Error;

use crate::diffring::{DiffPoly, MuMode, Parity, ParseOptions};
use crate::grassmann::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Mul(DiffPoly),
    D,
    Inv,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OperatorError {
    #[error("row {row}: ∂⁻¹ under prefix `{prefix}` met a non-exact integrand {integrand}")]
    NotExact {
        row: usize,
        prefix: String,
        integrand: String,
    },
    #[error("operator is {0}x{1} but the vector has length {2}")]
    Length(usize, usize, usize),
    #[error("operator shapes {0}x{1} and {2}x{3} do not compose")]
    Shape(usize, usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpParseError {
    #[error("unexpected input at byte {0}")]
    Unexpected(usize),
    #[error("unexpected end of input")]
    End,
    #[error("unknown symbol {0:?}")]
    Symbol(String),
    #[error("bad exponent at byte {0}")]
    Exponent(usize),
}

fn is_unit(p: &DiffPoly) -> bool {
    p.len() == 1
        && p.terms()
            .all(|(m, c)| c.is_one() && m.mu_power() == 0 && !m.is_constant())
}

/// One operator entry: a sum of normalized chains with scalar coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct OpEntry {
    terms: BTreeMap<Vec<Factor>, DiffPoly>,
}

impl OpEntry {
    pub fn zero() -> Self {
        OpEntry::default()
    }

    pub fn identity() -> Self {
        OpEntry::scalar(DiffPoly::one())
    }

    /// A μ-polynomial times the identity.
    pub fn scalar(s: DiffPoly) -> Self {
        OpEntry::chain(s, Vec::new())
    }

    pub fn int(n: i64) -> Self {
        OpEntry::scalar(DiffPoly::int(n))
    }

    pub fn mul(p: DiffPoly) -> Self {
        OpEntry::chain(DiffPoly::one(), vec![Factor::Mul(p)])
    }

    pub fn d() -> Self {
        OpEntry::chain(DiffPoly::one(), vec![Factor::D])
    }

    pub fn inv() -> Self {
        OpEntry::chain(DiffPoly::one(), vec![Factor::Inv])
    }

    /// `scalar · F₁∘…∘Fₖ`, normalized.
    pub fn chain(scalar: DiffPoly, factors: Vec<Factor>) -> Self {
        let mut out = OpEntry::zero();
        out.push(scalar, factors);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Factor>, &DiffPoly)> {
        self.terms.iter()
    }

    /// Whether no `∂⁻¹` occurs.
    pub fn is_local(&self) -> bool {
        self.terms.keys().all(|c| !c.contains(&Factor::Inv))
    }

    /// Parity of the entry (sum of multiplier parities), if homogeneous.
    pub fn parity(&self) -> Option<Parity> {
        let mut out: Option<Parity> = None;
        for chain in self.terms.keys() {
            let mut par = Parity::Even;
            for f in chain {
                if let Factor::Mul(p) = f {
                    par = par.add(p.parity()?);
                }
            }
            match out {
                None => out = Some(par),
                Some(o) if o != par => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or(Parity::Even))
    }

    fn insert(&mut self, scalar: DiffPoly, factors: Vec<Factor>) {
        if scalar.is_zero() {
            return;
        }
        let e = self.terms.entry(factors.clone()).or_default();
        *e += &scalar;
        if e.is_zero() {
            self.terms.remove(&factors);
        }
    }

    fn push(&mut self, scalar: DiffPoly, factors: Vec<Factor>) {
        let mut work = vec![(scalar, factors)];
        while let Some((sc, fs)) = work.pop() {
            if sc.is_zero() {
                continue;
            }
            // split multipliers into unit monomials
            if let Some(i) = fs
                .iter()
                .position(|f| matches!(f, Factor::Mul(p) if !is_unit(p)))
            {
                let Factor::Mul(p) = &fs[i] else {
                    unreachable!()
                };
                for (s, u) in p.scalar_parts() {
                    let mut f2 = fs.clone();
                    if u.is_scalar() {
                        f2.remove(i);
                    } else {
                        f2[i] = Factor::Mul(u);
                    }
                    work.push((&sc * &s, f2));
                }
                continue;
            }
            if let Some(i) = fs
                .windows(2)
                .position(|w| matches!(w, [Factor::Mul(_), Factor::Mul(_)]))
            {
                let (Factor::Mul(a), Factor::Mul(b)) = (&fs[i], &fs[i + 1]) else {
                    unreachable!()
                };
                let prod = a * b;
                if prod.is_zero() {
                    continue;
                }
                let mut f2 = fs.clone();
                f2[i] = Factor::Mul(prod);
                f2.remove(i + 1);
                work.push((sc, f2));
                continue;
            }
            if let Some(i) = fs
                .windows(2)
                .position(|w| matches!(w, [Factor::D, Factor::Inv]))
            {
                let mut f2 = fs.clone();
                f2.drain(i..i + 2);
                work.push((sc, f2));
                continue;
            }
            if let Some(i) = fs
                .windows(2)
                .position(|w| matches!(w, [Factor::D, Factor::Mul(_)]))
            {
                let Factor::Mul(m) = &fs[i + 1] else {
                    unreachable!()
                };
                let mut swapped = fs.clone();
                swapped.swap(i, i + 1);
                let mut derived = fs.clone();
                derived[i + 1] = Factor::Mul(m.d_total());
                derived.remove(i);
                work.push((sc.clone(), swapped));
                work.push((sc, derived));
                continue;
            }
            self.insert(sc, fs);
        }
    }

    pub fn add(&self, o: &OpEntry) -> OpEntry {
        let mut out = self.clone();
        for (f, s) in &o.terms {
            out.insert(s.clone(), f.clone());
        }
        out
    }

    pub fn sub(&self, o: &OpEntry) -> OpEntry {
        self.add(&o.scale(&DiffPoly::int(-1)))
    }

    pub fn scale(&self, s: &DiffPoly) -> OpEntry {
        let mut out = OpEntry::zero();
        for (f, c) in &self.terms {
            out.insert(c * s, f.clone());
        }
        out
    }

    /// `self ∘ o`.
    pub fn compose(&self, o: &OpEntry) -> OpEntry {
        let mut out = OpEntry::zero();
        for (f1, c1) in &self.terms {
            for (f2, c2) in &o.terms {
                let mut fs = f1.clone();
                fs.extend(f2.iter().cloned());
                out.push(c1 * c2, fs);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> OpEntry {
        let mut out = OpEntry::identity();
        for _ in 0..k {
            out = out.compose(self);
        }
        out
    }

    pub fn substitute_mu(&self, v: &Rational) -> OpEntry {
        let mut out = OpEntry::zero();
        for (f, c) in &self.terms {
            let fs = f
                .iter()
                .map(|x| match x {
                    Factor::Mul(p) => Factor::Mul(p.substitute_mu(v)),
                    other => other.clone(),
                })
                .collect();
            out.push(c.substitute_mu(v), fs);
        }
        out
    }

    pub fn contains_mu(&self) -> bool {
        self.terms.iter().any(|(f, c)| {
            c.contains_mu()
                || f.iter()
                    .any(|x| matches!(x, Factor::Mul(p) if p.contains_mu()))
        })
    }

    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(fs, c)| {
                let mut items = Vec::new();
                if !(*c == DiffPoly::one() && !fs.is_empty()) {
                    items.push(if c.len() > 1 {
                        format!("({c})")
                    } else {
                        c.to_text()
                    });
                }
                for f in fs {
                    items.push(match f {
                        Factor::Mul(p) => p.to_text(),
                        Factor::D => "D".into(),
                        Factor::Inv => "D^-1".into(),
                    });
                }
                items.join("*")
            })
            .collect();
        parts.join(" + ").replace("+ -", "- ")
    }

    pub fn to_latex(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(fs, c)| {
                let mut s = String::new();
                if !(*c == DiffPoly::one() && !fs.is_empty()) {
                    if c.len() > 1 {
                        s.push_str(&format!("({})", c.to_latex()));
                    } else {
                        s.push_str(&c.to_latex());
                    }
                }
                for f in fs {
                    match f {
                        Factor::Mul(p) => s.push_str(&p.to_latex()),
                        Factor::D => s.push_str("\\partial "),
                        Factor::Inv => s.push_str("\\partial^{-1}"),
                    }
                }
                s
            })
            .collect();
        parts.join("+").replace("+-", "-")
    }
}

impl fmt::Display for OpEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Something an operator can act on: symbolic polynomials or grid samples.
pub trait OperandSpace {
    type V: Clone;
    fn zero(&self) -> Self::V;
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V;
    /// Multiplication by a μ-polynomial scalar.
    fn scale(&self, s: &DiffPoly, v: &Self::V) -> Self::V;
    /// Left multiplication by a differential polynomial.
    fn mul(&self, p: &DiffPoly, v: &Self::V) -> Self::V;
    fn d(&self, v: &Self::V) -> Self::V;
    /// `∂⁻¹`, or a printable description of the offending integrand.
    fn inv(&self, v: &Self::V) -> Result<Self::V, String>;
}

/// Exact symbolic action on differential polynomials.
pub struct Symbolic;

impl OperandSpace for Symbolic {
    type V = DiffPoly;
    fn zero(&self) -> DiffPoly {
        DiffPoly::zero()
    }
    fn add(&self, a: &DiffPoly, b: &DiffPoly) -> DiffPoly {
        a + b
    }
    fn scale(&self, s: &DiffPoly, v: &DiffPoly) -> DiffPoly {
        s * v
    }
    fn mul(&self, p: &DiffPoly, v: &DiffPoly) -> DiffPoly {
        p * v
    }
    fn d(&self, v: &DiffPoly) -> DiffPoly {
        v.d_total()
    }
    fn inv(&self, v: &DiffPoly) -> Result<DiffPoly, String> {
        v.integrate_exact().map_err(|e| e.integrand.to_text())
    }
}

type Item<'a> = (&'a [Factor], &'a DiffPoly, usize);

fn prefix_text(path: &[&Factor]) -> String {
    path.iter()
        .map(|f| match f {
            Factor::Mul(p) => p.to_text(),
            Factor::D => "D".into(),
            Factor::Inv => "D^-1".into(),
        })
        .collect::<Vec<_>>()
        .join("*")
}

fn eval_group<'a, S: OperandSpace>(
    space: &S,
    items: Vec<Item<'a>>,
    v: &[S::V],
    row: usize,
    path: &mut Vec<&'a Factor>,
) -> Result<S::V, OperatorError> {
    let mut acc = space.zero();
    let mut groups: BTreeMap<&'a Factor, Vec<Item<'a>>> = BTreeMap::new();
    for (fs, sc, col) in items {
        match fs.split_first() {
            None => acc = space.add(&acc, &space.scale(sc, &v[col])),
            Some((head, rest)) => groups.entry(head).or_default().push((rest, sc, col)),
        }
    }
    for (f, sub) in groups {
        path.push(f);
        let inner = eval_group(space, sub, v, row, path)?;
        let val = match f {
            Factor::Mul(p) => space.mul(p, &inner),
            Factor::D => space.d(&inner),
            Factor::Inv => space
                .inv(&inner)
                .map_err(|integrand| OperatorError::NotExact {
                    row,
                    prefix: prefix_text(path),
                    integrand,
                })?,
        };
        path.pop();
        acc = space.add(&acc, &val);
    }
    Ok(acc)
}

/// A rectangular matrix of operator entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonlocalOperator {
    rows: usize,
    cols: usize,
    entries: Vec<OpEntry>,
}

impl NonlocalOperator {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        NonlocalOperator {
            rows,
            cols,
            entries: vec![OpEntry::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = NonlocalOperator::zeros(n, n);
        for i in 0..n {
            m.set(i, i, OpEntry::identity());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<OpEntry>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged operator rows");
        NonlocalOperator {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    /// Parses a matrix of entry strings, see [`parse_entry`].
    pub fn parse(rows: &[&[&str]], ctx: &OpContext) -> Result<Self, OpParseError> {
        let parsed = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| parse_entry(s, ctx))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NonlocalOperator::from_rows(parsed))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &OpEntry {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: OpEntry) {
        self.entries[i * self.cols + j] = e;
    }

    pub fn map<F: Fn(&OpEntry) -> OpEntry>(&self, f: F) -> Self {
        NonlocalOperator {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn substitute_mu(&self, v: &Rational) -> Self {
        self.map(|e| e.substitute_mu(v))
    }

    pub fn specialize(&self, mu: &MuMode) -> Self {
        match mu {
            MuMode::Symbolic => self.clone(),
            MuMode::Value(v) => self.substitute_mu(v),
        }
    }

    pub fn is_local(&self) -> bool {
        self.entries.iter().all(|e| e.is_local())
    }

    pub fn contains_mu(&self) -> bool {
        self.entries.iter().any(|e| e.contains_mu())
    }

    pub fn add(&self, o: &Self) -> Result<Self, OperatorError> {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(OperatorError::Shape(self.rows, self.cols, o.rows, o.cols));
        }
        Ok(NonlocalOperator {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self, OperatorError> {
        self.add(&o.map(|e| e.scale(&DiffPoly::int(-1))))
    }

    /// Matrix composition `self ∘ o`.
    pub fn compose(&self, o: &Self) -> Result<Self, OperatorError> {
        if self.cols != o.rows {
            return Err(OperatorError::Shape(self.rows, self.cols, o.rows, o.cols));
        }
        let mut out = NonlocalOperator::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = OpEntry::zero();
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.compose(b));
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Applies the operator in any operand space.
    pub fn apply_in<S: OperandSpace>(
        &self,
        space: &S,
        v: &[S::V],
    ) -> Result<Vec<S::V>, OperatorError> {
        if v.len() != self.cols {
            return Err(OperatorError::Length(self.rows, self.cols, v.len()));
        }
        (0..self.rows)
            .map(|i| {
                let items: Vec<Item> = (0..self.cols)
                    .flat_map(|j| {
                        self.get(i, j)
                            .terms
                            .iter()
                            .map(move |(fs, sc)| (fs.as_slice(), sc, j))
                    })
                    .collect();
                eval_group(space, items, v, i, &mut Vec::new())
            })
            .collect()
    }

    /// Exact symbolic application.
    pub fn apply(&self, v: &[DiffPoly]) -> Result<Vec<DiffPoly>, OperatorError> {
        self.apply_in(&Symbolic, v)
    }

    /// Row-by-row application, so a non-exact row does not hide the others.
    pub fn apply_rows(&self, v: &[DiffPoly]) -> Vec<Result<DiffPoly, OperatorError>> {
        if v.len() != self.cols {
            return vec![Err(OperatorError::Length(self.rows, self.cols, v.len()))];
        }
        (0..self.rows)
            .map(|i| {
                let items: Vec<Item> = (0..self.cols)
                    .flat_map(|j| {
                        self.get(i, j)
                            .terms
                            .iter()
                            .map(move |(fs, sc)| (fs.as_slice(), sc, j))
                    })
                    .collect();
                eval_group(&Symbolic, items, v, i, &mut Vec::new())
            })
            .collect()
    }

    /// Parity of every entry, `None` where inhomogeneous.
    pub fn parities(&self) -> Vec<Option<Parity>> {
        self.entries.iter().map(|e| e.parity()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push_str(&format!("({},{}) {}\n", i + 1, j + 1, self.get(i, j)));
            }
        }
        out
    }

    /// A LaTeX `array` with one cell per entry.
    pub fn to_latex(&self) -> String {
        let mut out = format!("\\left(\\begin{{array}}{{{}}}\n", "c".repeat(self.cols));
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_latex()).collect();
            out.push_str(&row.join(" & "));
            out.push_str(if i + 1 < self.rows { "\\\\\n" } else { "\n" });
        }
        out.push_str("\\end{array}\\right)");
        out
    }
}

/// Parser context: how μ and `h` are read, plus named operator symbols.
#[derive(Debug, Clone, Default)]
pub struct OpContext {
    pub poly: ParseOptions,
    pub symbols: BTreeMap<String, OpEntry>,
}

impl OpContext {
    pub fn new(mu: MuMode) -> Self {
        OpContext {
            poly: ParseOptions { mu },
            symbols: BTreeMap::new(),
        }
    }

    pub fn with_symbol(mut self, name: &str, e: OpEntry) -> Self {
        self.symbols.insert(name.to_string(), e);
        self
    }
}

/// Parses an operator expression such as `q*D^-1*p - 1/2*D - h`.
///
/// Products are compositions. `D` is `∂`, `D^-1` is `∂⁻¹`; field names, `mu`
/// and `h` denote multiplication operators; numbers and `a/b` are scalars.
pub fn parse_entry(s: &str, ctx: &OpContext) -> Result<OpEntry, OpParseError> {
    let mut p = OpParser {
        src: s.as_bytes(),
        pos: 0,
        ctx,
    };
    let e = p.expr()?;
    p.ws();
    if p.pos != p.src.len() {
        return Err(OpParseError::Unexpected(p.pos));
    }
    Ok(e)
}

struct OpParser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a OpContext,
}

impl OpParser<'_> {
    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<OpEntry, OpParseError> {
        let mut acc = if self.peek() == Some(b'-') {
            self.pos += 1;
            self.term()?.scale(&DiffPoly::int(-1))
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<OpEntry, OpParseError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.compose(&self.power()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let start = self.pos;
                    let n = self.number()?;
                    if n == Rational::from_integer(0.into()) {
                        return Err(OpParseError::Unexpected(start));
                    }
                    acc = acc.scale(&DiffPoly::constant(Rational::one() / n));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<OpEntry, OpParseError> {
        let base = self.primary()?;
        if self.peek() != Some(b'^') {
            return Ok(base.0);
        }
        self.pos += 1;
        let start = self.pos;
        let neg = self.peek() == Some(b'-');
        if neg {
            self.pos += 1;
        }
        let k = self.number()?;
        if !k.is_integer() {
            return Err(OpParseError::Exponent(start));
        }
        let k: u32 = k
            .to_integer()
            .try_into()
            .map_err(|_| OpParseError::Exponent(start))?;
        match (neg, base.1) {
            (false, _) => Ok(base.0.pow(k)),
            (true, true) => Ok(OpEntry::inv().pow(k)),
            (true, false) => Err(OpParseError::Exponent(start)),
        }
    }

    fn number(&mut self) -> Result<Rational, OpParseError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(OpParseError::Unexpected(start));
        }
        let txt = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        parse_rational(txt).ok_or(OpParseError::Unexpected(start))
    }

    /// Returns the operand and whether it is the bare `D`.
    fn primary(&mut self) -> Result<(OpEntry, bool), OpParseError> {
        match self.peek() {
            None => Err(OpParseError::End),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(OpParseError::Unexpected(self.pos));
                }
                self.pos += 1;
                Ok((e, false))
            }
            Some(c) if c.is_ascii_digit() => {
                Ok((OpEntry::scalar(DiffPoly::constant(self.number()?)), false))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if name == "D" {
                    return Ok((OpEntry::d(), true));
                }
                if let Some(e) = self.ctx.symbols.get(name) {
                    return Ok((e.clone(), false));
                }
                let p = crate::diffring::parse_with(name, &self.ctx.poly)
                    .map_err(|_| OpParseError::Symbol(name.to_string()))?;
                Ok((OpEntry::mul(p), false))
            }
            Some(_) => Err(OpParseError::Unexpected(self.pos)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffring::parse;

    fn op(s: &str) -> OpEntry {
        parse_entry(s, &OpContext::new(MuMode::Symbolic)).unwrap()
    }

    #[test]
    fn d_commutes_past_multiplier() {
        assert_eq!(op("D*p"), op("p*D + p_x"));
        assert_eq!(op("D*D^-1*q"), op("q"));
        assert_eq!(
            op("D*alpha*beta"),
            op("alpha*beta*D + alpha_x*beta + alpha*beta_x")
        );
    }

    #[test]
    fn multipliers_merge_with_signs() {
        assert_eq!(op("beta*alpha"), op("-alpha*beta"));
        assert!(op("alpha*alpha").is_zero());
        assert_eq!(op("2*(p+r)"), op("2*p + 2*r"));
    }

    #[test]
    fn identity_operator_applies_to_vector() {
        let id = NonlocalOperator::identity(3);
        let v = vec![
            parse("p").unwrap(),
            parse("alpha*q").unwrap(),
            DiffPoly::zero(),
        ];
        assert_eq!(id.apply(&v).unwrap(), v);
    }

    #[test]
    fn nonlocal_row_groups_integrands() {
        let o = NonlocalOperator::parse(
            &[&["p*D^-1*q", "p*D^-1*p"]],
            &OpContext::new(MuMode::Symbolic),
        )
        .unwrap();
        // neither q·p_x nor p·q_x is exact on its own
        let w = vec![parse("p_x").unwrap(), parse("q_x").unwrap()];
        assert_eq!(o.apply(&w).unwrap()[0], parse("p*p*q").unwrap());
    }

    #[test]
    fn nonexact_reports_row() {
        let o = NonlocalOperator::parse(&[&["1"], &["D^-1"]], &OpContext::new(MuMode::Symbolic))
            .unwrap();
        let err = o.apply(&[parse("p").unwrap()]).unwrap_err();
        assert!(matches!(err, OperatorError::NotExact { row: 1, .. }));
    }

    #[test]
    fn composition_matches_sequential_application() {
        let ctx = OpContext::new(MuMode::Symbolic);
        let a =
            NonlocalOperator::parse(&[&["p*D^-1*D", "D"], &["alpha", "1/2*D + h"]], &ctx).unwrap();
        let b = NonlocalOperator::parse(&[&["D", "q"], &["0", "beta"]], &ctx).unwrap();
        let v = vec![parse("q_x*r").unwrap(), parse("alpha").unwrap()];
        let seq = a.apply(&b.apply(&v).unwrap()).unwrap();
        let comp = a.compose(&b).unwrap().apply(&v).unwrap();
        assert_eq!(seq, comp);
    }

    #[test]
    fn parity_of_entries() {
        assert_eq!(op("beta*D^-1*alpha").parity(), Some(Parity::Even));
        assert_eq!(op("q*D^-1*alpha").parity(), Some(Parity::Odd));
        assert_eq!(op("p + alpha").parity(), None);
    }

    #[test]
    fn named_symbols_and_text() {
        let ctx = OpContext::new(MuMode::Symbolic).with_symbol("X", op("D^-1*p"));
        let e = parse_entry("q*X", &ctx).unwrap();
        assert_eq!(e, op("q*D^-1*p"));
        assert_eq!(e.to_text(), "q*D^-1*p");
        assert!(parse_entry("q*Y", &ctx).is_err());
    }
}
