//! The differential polynomial ring in the potentials `p, q, r, s` (even) and
//! `α, β` (odd), with exact coefficients and a symbolic even constant `μ`.
//!
//! Besides the six potentials the ring carries eight placeholder symbols
//! `A, B, C, E, F, G` (even) and `ρ, δ` (odd) standing for the entries of the
//! generic stationary matrix; they let supertrace formulas be checked without
//! committing to a λ-expansion.

mod integrate;
mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::grassmann::{int, odd_concat, OddWord, Rational, Sign};

pub use integrate::NotExact;
pub use text::{h_of, parse, parse_with, DiffPolyJson, ParseError, ParseOptions};

/// Field symbols. Declaration order is the canonical variable order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Field {
    P,
    Q,
    R,
    S,
    Alpha,
    Beta,
    A,
    B,
    C,
    E,
    F,
    G,
    Rho,
    Delta,
}

impl Field {
    /// The potential vector `u = (p, q, α, β, r, s)` in its printed order.
    pub const POTENTIALS: [Field; 6] = [
        Field::P,
        Field::Q,
        Field::Alpha,
        Field::Beta,
        Field::R,
        Field::S,
    ];

    pub const PLACEHOLDERS: [Field; 8] = [
        Field::A,
        Field::B,
        Field::C,
        Field::E,
        Field::F,
        Field::G,
        Field::Rho,
        Field::Delta,
    ];

    pub fn is_odd(self) -> bool {
        matches!(self, Field::Alpha | Field::Beta | Field::Rho | Field::Delta)
    }

    pub fn is_potential(self) -> bool {
        matches!(
            self,
            Field::P | Field::Q | Field::R | Field::S | Field::Alpha | Field::Beta
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::P => "p",
            Field::Q => "q",
            Field::R => "r",
            Field::S => "s",
            Field::Alpha => "alpha",
            Field::Beta => "beta",
            Field::A => "A",
            Field::B => "B",
            Field::C => "C",
            Field::E => "E",
            Field::F => "F",
            Field::G => "G",
            Field::Rho => "rho",
            Field::Delta => "delta",
        }
    }

    pub fn latex(self) -> &'static str {
        match self {
            Field::Alpha => "\\alpha",
            Field::Beta => "\\beta",
            Field::Rho => "\\rho",
            Field::Delta => "\\delta",
            other => other.name(),
        }
    }

    pub fn from_name(s: &str) -> Option<Field> {
        Some(match s {
            "p" => Field::P,
            "q" => Field::Q,
            "r" => Field::R,
            "s" => Field::S,
            "alpha" => Field::Alpha,
            "beta" => Field::Beta,
            "A" => Field::A,
            "B" => Field::B,
            "C" => Field::C,
            "E" => Field::E,
            "F" => Field::F,
            "G" => Field::G,
            "rho" => Field::Rho,
            "delta" => Field::Delta,
            _ => return None,
        })
    }

    pub fn parity(self) -> Parity {
        if self.is_odd() {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// A field symbol together with its number of x-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Jet {
    pub field: Field,
    pub order: u16,
}

impl Jet {
    pub fn new(field: Field, order: u16) -> Self {
        Jet { field, order }
    }

    pub fn is_odd(self) -> bool {
        self.field.is_odd()
    }

    pub fn raised(self) -> Self {
        Jet::new(self.field, self.order + 1)
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 0 {
            write!(f, "{}", self.field.name())
        } else {
            write!(
                f,
                "{}_{}",
                self.field.name(),
                "x".repeat(self.order as usize)
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn add(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn from_bool(odd: bool) -> Parity {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// Which end an odd variable is moved to before it is stripped off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Grassmann derivative convention of the variational derivative.
///
/// Left derivatives are the only choice under which the supertrace identity
/// holds with a single γ: with right derivatives the odd rows of its `n = 0`
/// instance force γ = 2 while the even rows force γ = 0. The printed
/// formulas `Str(∂M/∂α N) = 2δ + 4μβ(2A+E)` and `Str(∂M/∂β N) = −2ρ − 4μα(2A+E)`
/// are the right-derivative versions; see `hamiltonian` for both.
pub const GRASSMANN_SIDE: Side = Side::Left;

/// How the even constant μ enters an expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum MuMode {
    Symbolic,
    Value(Rational),
}

impl From<MuMode> for String {
    fn from(m: MuMode) -> String {
        m.label()
    }
}

impl TryFrom<String> for MuMode {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        MuMode::parse(&s).ok_or_else(|| format!("invalid mu mode {s:?}"))
    }
}

impl MuMode {
    pub fn zero() -> Self {
        MuMode::Value(Rational::zero())
    }

    pub fn label(&self) -> String {
        match self {
            MuMode::Symbolic => "symbolic".to_string(),
            MuMode::Value(v) => crate::grassmann::format_rational(v),
        }
    }

    pub fn parse(s: &str) -> Option<MuMode> {
        if s.eq_ignore_ascii_case("symbolic") {
            Some(MuMode::Symbolic)
        } else {
            crate::grassmann::parse_rational(s).map(MuMode::Value)
        }
    }

    /// μ as a ring element.
    pub fn mu(&self) -> DiffPoly {
        match self {
            MuMode::Symbolic => DiffPoly::mu_power(1),
            MuMode::Value(v) => DiffPoly::constant(v.clone()),
        }
    }
}

/// A monomial `μ^k · Π even^e · (odd word)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    mu: u32,
    even: Vec<(Jet, u32)>,
    odd: OddWord,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    /// Builds a monomial from an ordered product of jets; `None` if it vanishes.
    pub fn from_jets(mu: u32, jets: &[Jet]) -> Option<(Sign, Monomial)> {
        let mut even: BTreeMap<Jet, u32> = BTreeMap::new();
        let mut odd = Vec::new();
        for &j in jets {
            if j.is_odd() {
                odd.push(j);
            } else {
                *even.entry(j).or_insert(0) += 1;
            }
        }
        let (sign, odd) = OddWord::from_factors(odd)?;
        Some((
            sign,
            Monomial {
                mu,
                even: even.into_iter().collect(),
                odd,
            },
        ))
    }

    pub fn mu_power(&self) -> u32 {
        self.mu
    }

    pub fn even_factors(&self) -> &[(Jet, u32)] {
        &self.even
    }

    pub fn odd_word(&self) -> &OddWord {
        &self.odd
    }

    pub fn is_constant(&self) -> bool {
        self.even.is_empty() && self.odd.is_empty()
    }

    pub fn parity(&self) -> Parity {
        Parity::from_bool(self.odd.is_odd())
    }

    pub fn degree(&self) -> u32 {
        self.even.iter().map(|(_, e)| *e).sum::<u32>() + self.odd.len() as u32
    }

    /// Sum of derivative orders over all factors.
    pub fn weight(&self) -> u32 {
        self.even
            .iter()
            .map(|(j, e)| j.order as u32 * e)
            .sum::<u32>()
            + self
                .odd
                .factors()
                .iter()
                .map(|j| j.order as u32)
                .sum::<u32>()
    }

    /// Jets listed with multiplicity: even factors first, then the odd word.
    pub fn jets(&self) -> Vec<Jet> {
        let mut out = Vec::new();
        for (j, e) in &self.even {
            for _ in 0..*e {
                out.push(*j);
            }
        }
        out.extend_from_slice(self.odd.factors());
        out
    }

    pub fn exponent(&self, j: Jet) -> u32 {
        if j.is_odd() {
            self.odd.factors().iter().filter(|&&o| o == j).count() as u32
        } else {
            self.even
                .iter()
                .find(|(k, _)| *k == j)
                .map(|(_, e)| *e)
                .unwrap_or(0)
        }
    }

    fn mul(&self, other: &Monomial) -> Option<(Sign, Monomial)> {
        let (sign, odd) = odd_concat(&self.odd, &other.odd)?;
        let mut even = Vec::with_capacity(self.even.len() + other.even.len());
        let (a, b) = (&self.even, &other.even);
        let (mut i, mut k) = (0, 0);
        while i < a.len() && k < b.len() {
            match a[i].0.cmp(&b[k].0) {
                std::cmp::Ordering::Less => {
                    even.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    even.push(b[k]);
                    k += 1;
                }
                std::cmp::Ordering::Equal => {
                    even.push((a[i].0, a[i].1 + b[k].1));
                    i += 1;
                    k += 1;
                }
            }
        }
        even.extend_from_slice(&a[i..]);
        even.extend_from_slice(&b[k..]);
        Some((
            sign,
            Monomial {
                mu: self.mu + other.mu,
                even,
                odd,
            },
        ))
    }

    fn with_even_changed(&self, j: Jet, delta: i32) -> Monomial {
        let mut even: BTreeMap<Jet, u32> = self.even.iter().copied().collect();
        let e = even.entry(j).or_insert(0);
        *e = (*e as i32 + delta) as u32;
        if *e == 0 {
            even.remove(&j);
        }
        Monomial {
            mu: self.mu,
            even: even.into_iter().collect(),
            odd: self.odd.clone(),
        }
    }

    fn even_only(&self) -> Monomial {
        Monomial {
            mu: self.mu,
            even: self.even.clone(),
            odd: OddWord::empty(),
        }
    }

    fn odd_only(word: OddWord) -> Monomial {
        Monomial {
            mu: 0,
            even: Vec::new(),
            odd: word,
        }
    }
}

/// A differential polynomial in canonical form: no zero coefficients, terms sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiffPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly::default()
    }

    pub fn one() -> Self {
        DiffPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        DiffPoly::from_term(Monomial::one(), c)
    }

    pub fn int(n: i64) -> Self {
        DiffPoly::constant(int(n))
    }

    pub fn mu_power(k: u32) -> Self {
        DiffPoly::from_term(
            Monomial {
                mu: k,
                ..Monomial::default()
            },
            Rational::one(),
        )
    }

    pub fn jet(j: Jet) -> Self {
        let (_, m) = Monomial::from_jets(0, &[j]).expect("single jet never vanishes");
        DiffPoly::from_term(m, Rational::one())
    }

    pub fn var(f: Field) -> Self {
        DiffPoly::jet(Jet::new(f, 0))
    }

    pub fn from_term(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        DiffPoly { terms }
    }

    /// Ordered product of jets with a coefficient, canonicalised.
    pub fn product(c: Rational, mu: u32, jets: &[Jet]) -> Self {
        match Monomial::from_jets(mu, jets) {
            Some((s, m)) => DiffPoly::from_term(m, s.apply(c)),
            None => DiffPoly::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// `None` for mixed parity; the zero polynomial counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| m.parity());
        let first = match it.next() {
            Some(p) => p,
            None => return Some(Parity::Even),
        };
        if it.all(|p| p == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.parity().is_some()
    }

    pub fn max_mu_power(&self) -> u32 {
        self.terms.keys().map(|m| m.mu).max().unwrap_or(0)
    }

    pub fn contains_mu(&self) -> bool {
        self.terms.keys().any(|m| m.mu > 0)
    }

    pub fn contains_field(&self, f: Field) -> bool {
        self.terms
            .keys()
            .any(|m| m.jets().iter().any(|j| j.field == f))
    }

    pub fn max_order(&self, f: Field) -> Option<u16> {
        self.terms
            .keys()
            .flat_map(|m| m.jets())
            .filter(|j| j.field == f)
            .map(|j| j.order)
            .max()
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    /// True when every term is free of jets (a polynomial in μ only).
    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(|m| m.is_constant())
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> DiffPoly {
        self.scale(&int(n))
    }

    pub fn pow(&self, k: u32) -> DiffPoly {
        let mut out = DiffPoly::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Graded product `self · other`.
    pub fn mul_poly(&self, other: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((s, m)) = m1.mul(m2) {
                    out.add_term(m, s.apply(c1 * c2));
                }
            }
        }
        out
    }

    /// Total x-derivative: an even derivation raising jet orders by one.
    pub fn d_total(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for &(j, e) in &m.even {
                let base = m.with_even_changed(j, -1).with_even_changed(j.raised(), 1);
                out.add_term(base, c * int(e as i64));
            }
            let word = m.odd.factors();
            for i in 0..word.len() {
                let mut f = word.to_vec();
                f[i] = f[i].raised();
                if let Some((s, w)) = OddWord::from_factors(f) {
                    let mono = Monomial {
                        mu: m.mu,
                        even: m.even.clone(),
                        odd: w,
                    };
                    out.add_term(mono, s.apply(c.clone()));
                }
            }
        }
        out
    }

    pub fn d_total_n(&self, n: u32) -> DiffPoly {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.d_total();
        }
        out
    }

    /// Applies the even derivation that sends each base jet to `image(jet)`.
    /// Odd images are inserted at the position of the factor they replace.
    pub fn derive_by<F>(&self, mut image: F) -> DiffPoly
    where
        F: FnMut(Jet) -> DiffPoly,
    {
        let mut cache: BTreeMap<Jet, DiffPoly> = BTreeMap::new();
        let mut img = |j: Jet| -> DiffPoly { cache.entry(j).or_insert_with(|| image(j)).clone() };
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for &(j, e) in &m.even {
                let rest = DiffPoly::from_term(m.with_even_changed(j, -1), c * int(e as i64));
                out += &(&rest * &img(j));
            }
            let word = m.odd.factors();
            for i in 0..word.len() {
                let left = DiffPoly::from_term(
                    m.even_only()
                        .mul(&Monomial::odd_only(
                            OddWord::from_factors(word[..i].to_vec()).unwrap().1,
                        ))
                        .unwrap()
                        .1,
                    c.clone(),
                );
                let right = DiffPoly::from_term(
                    Monomial::odd_only(OddWord::from_factors(word[i + 1..].to_vec()).unwrap().1),
                    Rational::one(),
                );
                out += &(&(&left * &img(word[i])) * &right);
            }
        }
        out
    }

    /// Graded partial derivative with respect to one jet variable.
    pub fn partial(&self, v: Jet, side: Side) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            if v.is_odd() {
                if let Some(pos) = m.odd.factors().iter().position(|&j| j == v) {
                    let (s, w) = match side {
                        Side::Left => m.odd.remove_left(pos),
                        Side::Right => m.odd.remove_right(pos),
                    };
                    let mono = Monomial {
                        mu: m.mu,
                        even: m.even.clone(),
                        odd: w,
                    };
                    out.add_term(mono, s.apply(c.clone()));
                }
            } else {
                let e = m.exponent(v);
                if e > 0 {
                    out.add_term(m.with_even_changed(v, -1), c * int(e as i64));
                }
            }
        }
        out
    }

    /// Euler operator `Σ_k (−∂)^k ∂f/∂u^{(k)}`.
    pub fn euler(&self, field: Field, side: Side) -> DiffPoly {
        let top = match self.max_order(field) {
            Some(k) => k,
            None => return DiffPoly::zero(),
        };
        let mut out = DiffPoly::zero();
        for k in 0..=top {
            let term = self.partial(Jet::new(field, k), side).d_total_n(k as u32);
            if k % 2 == 0 {
                out += &term;
            } else {
                out -= &term;
            }
        }
        out
    }

    /// Variational derivative under the crate-wide Grassmann convention.
    pub fn euler_variational(&self, field: Field) -> DiffPoly {
        self.euler(field, GRASSMANN_SIDE)
    }

    /// Replaces symbolic μ by a rational value.
    pub fn substitute_mu(&self, value: &Rational) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            let k = m2.mu;
            m2.mu = 0;
            let mut factor = Rational::one();
            for _ in 0..k {
                factor *= value;
            }
            out.add_term(m2, c * factor);
        }
        out
    }

    /// Coefficient of `μ^k`, as a μ-free polynomial.
    pub fn mu_coefficient(&self, k: u32) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            if m.mu == k {
                let mut m2 = m.clone();
                m2.mu = 0;
                out.add_term(m2, c.clone());
            }
        }
        out
    }

    /// Substitutes polynomials for base fields (order-0 jets); derivatives of
    /// a substituted field become total derivatives of its image.
    pub fn substitute_fields(&self, map: &BTreeMap<Field, DiffPoly>) -> DiffPoly {
        let mut cache: BTreeMap<Jet, DiffPoly> = BTreeMap::new();
        let mut image = |j: Jet| -> DiffPoly {
            cache
                .entry(j)
                .or_insert_with(|| match map.get(&j.field) {
                    Some(p) => p.d_total_n(j.order as u32),
                    None => DiffPoly::jet(j),
                })
                .clone()
        };
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let mut acc = DiffPoly::from_term(
                Monomial {
                    mu: m.mu,
                    ..Monomial::default()
                },
                c.clone(),
            );
            for j in m.jets() {
                acc = &acc * &image(j);
            }
            out += &acc;
        }
        out
    }

    /// Splits each term into `(scalar, unit)` with `scalar = c·μ^k` and `unit`
    /// the bare monomial with coefficient one.
    pub fn scalar_parts(&self) -> Vec<(DiffPoly, DiffPoly)> {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut unit = m.clone();
                unit.mu = 0;
                (
                    DiffPoly::from_term(
                        Monomial {
                            mu: m.mu,
                            ..Monomial::default()
                        },
                        c.clone(),
                    ),
                    DiffPoly::from_term(unit, Rational::one()),
                )
            })
            .collect()
    }

    /// Splits into parity components `(even part, odd part)`.
    pub fn split_parity(&self) -> (DiffPoly, DiffPoly) {
        let mut even = DiffPoly::zero();
        let mut odd = DiffPoly::zero();
        for (m, c) in &self.terms {
            if m.parity().is_odd() {
                odd.add_term(m.clone(), c.clone());
            } else {
                even.add_term(m.clone(), c.clone());
            }
        }
        (even, odd)
    }

    /// Largest coefficient magnitude; useful for reporting sizes.
    pub fn max_abs_coefficient(&self) -> Rational {
        use num_traits::Signed;
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Antiderivative with zero constant term, or `NotExact`.
    pub fn integrate_exact(&self) -> Result<DiffPoly, NotExact> {
        integrate::integrate_exact(self)
    }

    /// Whether `self` is a total derivative of some differential polynomial.
    pub fn is_total_derivative(&self) -> bool {
        self.integrate_exact().is_ok()
    }

    pub fn to_text(&self) -> String {
        text::to_text(self)
    }

    pub fn to_latex(&self) -> String {
        text::to_latex(self)
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl From<Field> for DiffPoly {
    fn from(f: Field) -> Self {
        DiffPoly::var(f)
    }
}

impl From<Jet> for DiffPoly {
    fn from(j: Jet) -> Self {
        DiffPoly::jet(j)
    }
}

impl AddAssign<&DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&DiffPoly> for DiffPoly {
    fn sub_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        self.mul_poly(rhs)
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(mut self, rhs: DiffPoly) -> DiffPoly {
        self += &rhs;
        self
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(mut self, rhs: DiffPoly) -> DiffPoly {
        self -= &rhs;
        self
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        self.mul_poly(&rhs)
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -&self
    }
}

impl std::iter::Sum for DiffPoly {
    fn sum<I: Iterator<Item = DiffPoly>>(iter: I) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for p in iter {
            out += &p;
        }
        out
    }
}

/// Shorthands used by the hierarchy and operator tables.
pub mod vars {
    use super::{DiffPoly, Field, Jet};

    pub fn p() -> DiffPoly {
        DiffPoly::var(Field::P)
    }
    pub fn q() -> DiffPoly {
        DiffPoly::var(Field::Q)
    }
    pub fn r() -> DiffPoly {
        DiffPoly::var(Field::R)
    }
    pub fn s() -> DiffPoly {
        DiffPoly::var(Field::S)
    }
    pub fn alpha() -> DiffPoly {
        DiffPoly::var(Field::Alpha)
    }
    pub fn beta() -> DiffPoly {
        DiffPoly::var(Field::Beta)
    }
    pub fn jet(f: Field, k: u16) -> DiffPoly {
        DiffPoly::jet(Jet::new(f, k))
    }
}

#[cfg(test)]
mod tests {
    use super::vars::*;
    use super::*;
    use crate::grassmann::rat;

    fn h_sym() -> DiffPoly {
        let mu = DiffPoly::mu_power(1);
        let inner = &(&(&(&p() * &s()) + &(&q() * &r())) + &(&r() * &s()))
            - &(&alpha() * &beta()).scale_int(2);
        &mu * &inner
    }

    #[test]
    fn addition_examples() {
        assert!((&p() + &(-&p())).is_zero());
        let half_px = jet(Field::P, 1).scale(&rat(1, 2));
        assert_eq!(&half_px + &half_px, jet(Field::P, 1));
        let ab2 = (&alpha() * &beta()).scale_int(2);
        let lhs = &(&(&p() * &q()) + &ab2) + &(&(&p() * &q()) - &ab2);
        assert_eq!(lhs, (&p() * &q()).scale_int(2));
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(&beta() * &alpha(), -&(&alpha() * &beta()));
        assert!((&alpha() * &alpha()).is_zero());
        let expected = parse("mu*(p^2*s + p*q*r + p*r*s - 2*p*alpha*beta)").unwrap();
        assert_eq!(&h_sym() * &p(), expected);
    }

    #[test]
    fn total_derivative_examples() {
        assert_eq!((&p() * &q()).d_total(), parse("p_x*q + p*q_x").unwrap());
        assert_eq!(
            (&alpha() * &beta()).d_total(),
            parse("alpha_x*beta + alpha*beta_x").unwrap()
        );
        let expected = parse(
            "mu*(p_x*s + p*s_x + q_x*r + q*r_x + r_x*s + r*s_x - 2*alpha_x*beta - 2*alpha*beta_x)",
        )
        .unwrap();
        assert_eq!(h_sym().d_total(), expected);
    }

    #[test]
    fn partial_examples() {
        assert_eq!(
            h_sym().partial(Jet::new(Field::P, 0), Side::Left),
            &DiffPoly::mu_power(1) * &s()
        );
        let f = (&alpha() * &beta()).scale_int(-2);
        assert_eq!(
            f.partial(Jet::new(Field::Alpha, 0), Side::Left),
            beta().scale_int(-2)
        );
        assert_eq!(
            f.partial(Jet::new(Field::Alpha, 0), Side::Right),
            beta().scale_int(2)
        );
    }

    /// Brute force in the algebra generated by two odd symbols g0 = α, g1 = α_x:
    /// write the element in the basis {1, g0, g1, g0g1} and strip g1 from the left.
    #[test]
    fn partial_left_two_generator_oracle() {
        // α·α_x has basis coefficient +1 on g0g1 = −g1g0, so ∂_L/∂g1 gives −g0.
        let basis_coeff_g0g1 = 1;
        let oracle = -basis_coeff_g0g1;
        let f = &alpha() * &jet(Field::Alpha, 1);
        let got = f.partial(Jet::new(Field::Alpha, 1), Side::Left);
        assert_eq!(got, alpha().scale_int(oracle));
    }

    #[test]
    fn euler_classical() {
        let f = jet(Field::P, 1).pow(2).scale(&rat(1, 2));
        assert_eq!(
            f.euler(Field::P, Side::Left),
            jet(Field::P, 2).scale_int(-1)
        );
    }

    #[test]
    fn side_convention_is_left() {
        assert_eq!(GRASSMANN_SIDE, Side::Left);
    }

    #[test]
    fn derive_by_matches_total_derivative() {
        let f = parse("p*q_x*alpha*beta_x + mu*alpha_x*beta*r^2 - s").unwrap();
        assert_eq!(f.derive_by(|j| DiffPoly::jet(j.raised())), f.d_total());
    }

    #[test]
    fn substitution_of_fields() {
        let f = parse("p_x*q").unwrap();
        let mut map = BTreeMap::new();
        map.insert(Field::P, parse("r*s").unwrap());
        assert_eq!(
            f.substitute_fields(&map),
            parse("r_x*s*q + r*s_x*q").unwrap()
        );
    }

    #[test]
    fn mu_substitution() {
        let f = parse("mu^2*p + 3*mu*q + 1").unwrap();
        assert_eq!(
            f.substitute_mu(&rat(1, 2)),
            parse("1/4*p + 3/2*q + 1").unwrap()
        );
        assert_eq!(f.mu_coefficient(1), parse("3*q").unwrap());
    }

    #[test]
    fn parity_classification() {
        assert_eq!(parse("alpha*p").unwrap().parity(), Some(Parity::Odd));
        assert_eq!(
            parse("alpha*beta + p").unwrap().parity(),
            Some(Parity::Even)
        );
        assert_eq!(parse("alpha + p").unwrap().parity(), None);
    }
}
