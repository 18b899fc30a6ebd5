//! Exact formal integration `∂⁻¹` on differential polynomials.
//!
//! The total derivative preserves the μ-power, the multiset of field symbols
//! and raises the weight (sum of derivative orders) by one. Terms of the
//! integrand are grouped by those invariants; inside each group the
//! antiderivative is a combination of *all* monomials with the same fields and
//! weight one lower, and its coefficients solve an exact linear system.
//! An inconsistent system proves the integrand is not a total derivative.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

use super::{DiffPoly, Field, Jet, Monomial};
use crate::grassmann::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a total derivative: {integrand}")]
pub struct NotExact {
    pub integrand: DiffPoly,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct GroupKey {
    mu: u32,
    fields: Vec<Field>,
    weight: u32,
}

fn key_of(m: &Monomial) -> GroupKey {
    let mut fields: Vec<Field> = m.jets().iter().map(|j| j.field).collect();
    fields.sort();
    GroupKey {
        mu: m.mu_power(),
        fields,
        weight: m.weight(),
    }
}

pub(super) fn integrate_exact(f: &DiffPoly) -> Result<DiffPoly, NotExact> {
    let mut groups: BTreeMap<GroupKey, Vec<(Monomial, Rational)>> = BTreeMap::new();
    for (m, c) in f.terms() {
        groups
            .entry(key_of(m))
            .or_default()
            .push((m.clone(), c.clone()));
    }
    let mut out = DiffPoly::zero();
    for (key, terms) in groups {
        if key.fields.is_empty() || key.weight == 0 {
            return Err(NotExact {
                integrand: f.clone(),
            });
        }
        match integrate_group(&key, &terms) {
            Some(g) => out += &g,
            None => {
                return Err(NotExact {
                    integrand: f.clone(),
                })
            }
        }
    }
    Ok(out)
}

/// Every monomial with the given field multiset and weight.
fn candidates(key: &GroupKey) -> Vec<Monomial> {
    let target = key.weight - 1;
    let n = key.fields.len();
    let mut seen = BTreeSet::new();
    let mut orders = vec![0u16; n];
    fn rec(
        pos: usize,
        remaining: u32,
        orders: &mut Vec<u16>,
        key: &GroupKey,
        seen: &mut BTreeSet<Monomial>,
    ) {
        let n = orders.len();
        if pos == n - 1 {
            orders[pos] = remaining as u16;
            // same fields must carry non-increasing orders, avoiding duplicates
            for i in 1..n {
                if key.fields[i] == key.fields[i - 1] && orders[i] > orders[i - 1] {
                    return;
                }
            }
            let jets: Vec<Jet> = key
                .fields
                .iter()
                .zip(orders.iter())
                .map(|(&f, &o)| Jet::new(f, o))
                .collect();
            if let Some((_, m)) = Monomial::from_jets(key.mu, &jets) {
                seen.insert(m);
            }
            return;
        }
        for k in 0..=remaining {
            orders[pos] = k as u16;
            rec(pos + 1, remaining - k, orders, key, seen);
        }
    }
    rec(0, target, &mut orders, key, &mut seen);
    seen.into_iter().collect()
}

fn integrate_group(key: &GroupKey, terms: &[(Monomial, Rational)]) -> Option<DiffPoly> {
    let cands = candidates(key);
    if cands.is_empty() {
        return None;
    }
    // columns: candidates; rows: monomials of weight w
    let mut row_index: HashMap<Monomial, usize> = HashMap::new();
    let mut rows: Vec<BTreeMap<usize, Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    let mut row_of =
        |m: &Monomial, rows: &mut Vec<BTreeMap<usize, Rational>>, rhs: &mut Vec<Rational>| {
            *row_index.entry(m.clone()).or_insert_with(|| {
                rows.push(BTreeMap::new());
                rhs.push(Rational::zero());
                rows.len() - 1
            })
        };
    for (col, c) in cands.iter().enumerate() {
        let d = DiffPoly::from_term(c.clone(), Rational::one()).d_total();
        for (m, k) in d.terms() {
            let r = row_of(m, &mut rows, &mut rhs);
            rows[r].insert(col, k.clone());
        }
    }
    for (m, c) in terms {
        let r = row_of(m, &mut rows, &mut rhs);
        rhs[r] = c.clone();
    }
    let solution = solve_sparse(rows, rhs, cands.len())?;
    let mut g = DiffPoly::zero();
    for (col, val) in solution {
        g += &DiffPoly::from_term(cands[col].clone(), val);
    }
    Some(g)
}

/// Sparse exact Gaussian elimination. Returns `None` for an inconsistent system.
/// Free columns are set to zero (the derivative is injective on non-constants,
/// so a consistent system has a unique solution anyway).
fn solve_sparse(
    rows: Vec<BTreeMap<usize, Rational>>,
    rhs: Vec<Rational>,
    ncols: usize,
) -> Option<Vec<(usize, Rational)>> {
    // pivot column -> (row coefficients normalised so pivot = 1, rhs)
    let mut pivots: BTreeMap<usize, (BTreeMap<usize, Rational>, Rational)> = BTreeMap::new();
    for (mut row, mut b) in rows.into_iter().zip(rhs) {
        loop {
            let col = row.keys().copied().find(|c| pivots.contains_key(c));
            let col = match col {
                Some(c) => c,
                None => break,
            };
            let factor = row.remove(&col).unwrap();
            let (prow, pb) = &pivots[&col];
            for (c, v) in prow {
                if *c == col {
                    continue;
                }
                let e = row.entry(*c).or_insert_with(Rational::zero);
                *e -= &factor * v;
                if e.is_zero() {
                    row.remove(c);
                }
            }
            b -= &factor * pb;
        }
        match row.keys().next().copied() {
            None => {
                if !b.is_zero() {
                    return None;
                }
            }
            Some(col) => {
                let lead = row[&col].clone();
                let inv = Rational::one() / lead;
                let row: BTreeMap<usize, Rational> =
                    row.into_iter().map(|(c, v)| (c, v * &inv)).collect();
                let b = b * &inv;
                pivots.insert(col, (row, b));
            }
        }
    }
    // back substitution; rows only reference non-earlier-eliminated columns
    let mut value: Vec<Option<Rational>> = vec![None; ncols];
    let cols: Vec<usize> = pivots.keys().copied().collect();
    // resolve in an order where dependencies are known: iterate until fixed point
    let mut remaining: Vec<usize> = cols;
    while !remaining.is_empty() {
        let mut progressed = false;
        let mut next = Vec::new();
        for col in remaining {
            let (row, b) = &pivots[&col];
            let mut acc = b.clone();
            let mut ready = true;
            for (c, v) in row {
                if *c == col {
                    continue;
                }
                if pivots.contains_key(c) {
                    match &value[*c] {
                        Some(x) => acc -= v * x,
                        None => {
                            ready = false;
                            break;
                        }
                    }
                }
                // free columns are zero
            }
            if ready {
                value[col] = Some(acc);
                progressed = true;
            } else {
                next.push(col);
            }
        }
        if !progressed {
            // cannot happen for a triangular pivot set; treat as failure
            return None;
        }
        remaining = next;
    }
    Some(
        value
            .into_iter()
            .enumerate()
            .filter_map(|(c, v)| v.filter(|x| !x.is_zero()).map(|x| (c, x)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    #[test]
    fn product_rule_inverse() {
        let f = parse("p_x*q + p*q_x").unwrap();
        assert_eq!(f.integrate_exact().unwrap(), parse("p*q").unwrap());
    }

    #[test]
    fn bare_field_is_not_exact() {
        assert!(parse("p").unwrap().integrate_exact().is_err());
        assert!(parse("3").unwrap().integrate_exact().is_err());
        assert!(parse("p*q_x").unwrap().integrate_exact().is_err());
    }

    #[test]
    fn cancelling_first_level_integrand() {
        let f = parse("p*q - q*p + alpha*beta + beta*alpha").unwrap();
        assert!(f.is_zero());
        assert!(f.integrate_exact().unwrap().is_zero());
    }

    #[test]
    fn odd_and_mu_terms() {
        let g = parse("mu^2*alpha*beta_x*p + 1/3*q_xx*r - alpha*alpha_x").unwrap();
        assert_eq!(g.d_total().integrate_exact().unwrap(), g);
    }

    #[test]
    fn quadratic_in_highest_derivative() {
        let g = parse("p_x^2*q + p*q_xx*s").unwrap();
        assert_eq!(g.d_total().integrate_exact().unwrap(), g);
        assert!(parse("p_xx^2").unwrap().integrate_exact().is_err());
    }
}
