//! Exact coefficients and sign-correct products of odd jet variables.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::diffring::Jet;

/// Exact rational coefficient, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"3"`, `"-1/2"` and similar.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_negative(r: &Rational) -> bool {
    r.is_negative()
}

/// Permutation sign picked up while reordering anticommuting factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(odd: bool) -> Self {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn apply(self, r: Rational) -> Rational {
        match self {
            Sign::Plus => r,
            Sign::Minus => -r,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// A product of distinct odd jet variables in canonical (strictly increasing) order.
///
/// The word itself carries no sign; whoever owns it keeps the sign in its coefficient.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OddWord(Vec<Jet>);

impl OddWord {
    pub fn empty() -> Self {
        OddWord(Vec::new())
    }

    pub fn single(j: Jet) -> Self {
        OddWord(vec![j])
    }

    /// Canonicalises an arbitrary ordered product of odd factors.
    /// Returns `None` when a factor repeats (the product vanishes).
    pub fn from_factors(mut factors: Vec<Jet>) -> Option<(Sign, OddWord)> {
        // insertion sort, counting transpositions
        let mut swaps = 0usize;
        for i in 1..factors.len() {
            let mut k = i;
            while k > 0 && factors[k - 1] > factors[k] {
                factors.swap(k - 1, k);
                swaps += 1;
                k -= 1;
            }
        }
        if factors.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((Sign::from_parity(swaps % 2 == 1), OddWord(factors)))
    }

    pub fn factors(&self) -> &[Jet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_odd(&self) -> bool {
        self.0.len() % 2 == 1
    }

    /// Removes the factor at `pos`; the sign is that of moving it to the front.
    pub fn remove_left(&self, pos: usize) -> (Sign, OddWord) {
        let mut f = self.0.clone();
        f.remove(pos);
        (Sign::from_parity(pos % 2 == 1), OddWord(f))
    }

    /// Removes the factor at `pos`; the sign is that of moving it to the back.
    pub fn remove_right(&self, pos: usize) -> (Sign, OddWord) {
        let mut f = self.0.clone();
        f.remove(pos);
        let passes = self.0.len() - 1 - pos;
        (Sign::from_parity(passes % 2 == 1), OddWord(f))
    }
}

/// Product of two canonical odd words.
pub fn odd_concat(w1: &OddWord, w2: &OddWord) -> Option<(Sign, OddWord)> {
    if w1.is_empty() {
        return Some((Sign::Plus, w2.clone()));
    }
    if w2.is_empty() {
        return Some((Sign::Plus, w1.clone()));
    }
    // merge; each factor of w2 taken before remaining factors of w1 passes them all
    let (a, b) = (&w1.0, &w2.0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut swaps = 0usize;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                swaps += a.len() - i;
                j += 1;
            }
            std::cmp::Ordering::Equal => return None,
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((Sign::from_parity(swaps % 2 == 1), OddWord(out)))
}

impl fmt::Display for OddWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|j| j.to_string()).collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffring::{Field, Jet};

    fn a(k: u16) -> Jet {
        Jet::new(Field::Alpha, k)
    }
    fn b(k: u16) -> Jet {
        Jet::new(Field::Beta, k)
    }

    /// Sign of the sorting permutation by counting inversions pairwise.
    fn parity_oracle(seq: &[Jet]) -> Option<i32> {
        let mut inv = 0;
        for i in 0..seq.len() {
            for j in i + 1..seq.len() {
                if seq[i] == seq[j] {
                    return None;
                }
                if seq[i] > seq[j] {
                    inv += 1;
                }
            }
        }
        Some(if inv % 2 == 0 { 1 } else { -1 })
    }

    #[test]
    fn transposition_and_square() {
        let (s, w) = odd_concat(&OddWord::single(b(0)), &OddWord::single(a(0))).unwrap();
        assert_eq!(s, Sign::Minus);
        assert_eq!(w.factors(), &[a(0), b(0)]);
        assert!(odd_concat(&OddWord::single(a(0)), &OddWord::single(a(0))).is_none());
    }

    #[test]
    fn interleaved_words_sign_from_parity_oracle() {
        let ab = OddWord::from_factors(vec![a(0), b(0)]).unwrap().1;
        let axbx = OddWord::from_factors(vec![a(1), b(1)]).unwrap().1;
        let (s, w) = odd_concat(&ab, &axbx).unwrap();
        assert_eq!(w.factors(), &[a(0), a(1), b(0), b(1)]);
        let oracle = parity_oracle(&[a(0), b(0), a(1), b(1)]).unwrap();
        assert_eq!(oracle, -1);
        assert_eq!(s.as_i32(), oracle);
    }

    fn all_words(gens: &[Jet], max_len: usize) -> Vec<Vec<Jet>> {
        let mut out = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for g in gens {
                    let mut v: Vec<Jet> = w.clone();
                    v.push(*g);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn graded_commutation_exhaustive() {
        let gens = [a(0), a(1), a(2), b(0), b(1), b(2)];
        let words: Vec<OddWord> = all_words(&gens, 3)
            .into_iter()
            .filter_map(|w| OddWord::from_factors(w).map(|(_, w)| w))
            .collect();
        for u in &words {
            for v in &words {
                let uv = odd_concat(u, v);
                let vu = odd_concat(v, u);
                match (uv, vu) {
                    (None, None) => {}
                    (Some((s1, w1)), Some((s2, w2))) => {
                        assert_eq!(w1, w2);
                        let exch = Sign::from_parity(u.len() * v.len() % 2 == 1);
                        assert_eq!(s1, s2.times(exch), "{u} . {v}");
                        let mut seq = u.factors().to_vec();
                        seq.extend_from_slice(v.factors());
                        assert_eq!(parity_oracle(&seq), Some(s1.as_i32()));
                    }
                    _ => panic!("vanishing must be symmetric"),
                }
            }
        }
    }

    #[test]
    fn associativity_up_to_sign() {
        let gens = [a(0), a(1), b(0), b(1), b(2)];
        let words: Vec<OddWord> = all_words(&gens, 2)
            .into_iter()
            .filter_map(|w| OddWord::from_factors(w).map(|(_, w)| w))
            .collect();
        let mul = |x: Option<(Sign, OddWord)>, y: &OddWord| {
            x.and_then(|(s, w)| odd_concat(&w, y).map(|(t, w2)| (s.times(t), w2)))
        };
        for u in &words {
            for v in &words {
                for w in &words {
                    let left = mul(odd_concat(u, v), w);
                    let right = odd_concat(v, w)
                        .and_then(|(s, vw)| odd_concat(u, &vw).map(|(t, r)| (s.times(t), r)));
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn remove_sides() {
        let (_, w) = OddWord::from_factors(vec![a(0), b(0)]).unwrap();
        assert_eq!(w.remove_left(0).0, Sign::Plus);
        assert_eq!(w.remove_right(0).0, Sign::Minus);
        assert_eq!(w.remove_left(1).0, Sign::Minus);
        assert_eq!(w.remove_right(1).0, Sign::Plus);
    }

    #[test]
    fn rational_text() {
        assert_eq!(parse_rational("-2/4"), Some(rat(-1, 2)));
        assert_eq!(format_rational(&rat(3, 1)), "3");
        assert_eq!(format_rational(&rat(-1, 2)), "-1/2");
        assert!(parse_rational("1/0").is_none());
    }
}
