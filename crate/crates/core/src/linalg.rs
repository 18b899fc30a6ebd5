//! Small dense exact linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::grassmann::Rational;

/// Solves `A x = b` for `A` given as rows. Returns `None` when inconsistent;
/// free variables are set to zero.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.push(v.clone());
            row
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / m[r][c].clone();
        for k in c..=cols {
            m[r][k] = &m[r][k] * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in c..=cols {
                    let t = &f * &m[r][k];
                    m[i][k] -= t;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivot_cols.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::int;

    #[test]
    fn unique_and_inconsistent() {
        let a = vec![
            vec![int(1), int(1)],
            vec![int(1), int(-1)],
            vec![int(2), int(0)],
        ];
        assert_eq!(
            solve(&a, &[int(3), int(1), int(4)]),
            Some(vec![int(2), int(1)])
        );
        assert_eq!(solve(&a, &[int(3), int(1), int(5)]), None);
    }
}
