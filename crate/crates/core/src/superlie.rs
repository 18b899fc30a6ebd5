//! Graded matrices over λ-Laurent polynomials, the bases of `sl(2,1)` and
//! `sl(4,1)`, and verification of their (anti)commutator tables.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffring::{DiffPoly, Parity};
use crate::grassmann::{format_rational, int, Rational};
use crate::linalg;

/// A finite Laurent polynomial in λ with differential-polynomial coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Laurent(BTreeMap<i32, DiffPoly>);

impl Laurent {
    pub fn zero() -> Self {
        Laurent::default()
    }

    pub fn constant(p: DiffPoly) -> Self {
        Laurent::monomial(0, p)
    }

    pub fn int(n: i64) -> Self {
        Laurent::constant(DiffPoly::int(n))
    }

    pub fn monomial(k: i32, p: DiffPoly) -> Self {
        let mut m = BTreeMap::new();
        if !p.is_zero() {
            m.insert(k, p);
        }
        Laurent(m)
    }

    pub fn lambda() -> Self {
        Laurent::monomial(1, DiffPoly::one())
    }

    pub fn coeff(&self, k: i32) -> DiffPoly {
        self.0.get(&k).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &DiffPoly)> {
        self.0.iter().map(|(k, p)| (*k, p))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_power(&self) -> Option<i32> {
        self.0.keys().next().copied()
    }

    pub fn max_power(&self) -> Option<i32> {
        self.0.keys().next_back().copied()
    }

    fn add_at(&mut self, k: i32, p: &DiffPoly) {
        if p.is_zero() {
            return;
        }
        let e = self.0.entry(k).or_default();
        *e += p;
        if e.is_zero() {
            self.0.remove(&k);
        }
    }

    pub fn add(&self, other: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (k, p) in &other.0 {
            out.add_at(*k, p);
        }
        out
    }

    pub fn sub(&self, other: &Laurent) -> Laurent {
        let mut out = self.clone();
        for (k, p) in &other.0 {
            out.add_at(*k, &-p);
        }
        out
    }

    pub fn neg(&self) -> Laurent {
        self.map(|p| -p)
    }

    pub fn mul(&self, other: &Laurent) -> Laurent {
        let mut out = Laurent::zero();
        for (k1, p1) in &self.0 {
            for (k2, p2) in &other.0 {
                out.add_at(k1 + k2, &(p1 * p2));
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Laurent {
        self.map(|p| p.scale(c))
    }

    pub fn map<F: Fn(&DiffPoly) -> DiffPoly>(&self, f: F) -> Laurent {
        let mut out = Laurent::zero();
        for (k, p) in &self.0 {
            out.add_at(*k, &f(p));
        }
        out
    }

    pub fn d_total(&self) -> Laurent {
        self.map(|p| p.d_total())
    }

    /// ∂/∂λ.
    pub fn d_lambda(&self) -> Laurent {
        let mut out = Laurent::zero();
        for (k, p) in &self.0 {
            if *k != 0 {
                out.add_at(k - 1, &p.scale_int(*k as i64));
            }
        }
        out
    }

    /// Multiplies by λ^k.
    pub fn shift(&self, k: i32) -> Laurent {
        Laurent(self.0.iter().map(|(e, p)| (e + k, p.clone())).collect())
    }

    /// Parity of every coefficient, if homogeneous.
    pub fn parity(&self) -> Option<Parity> {
        let mut out = None;
        for p in self.0.values() {
            let par = p.parity()?;
            match out {
                None => out = Some(par),
                Some(o) if o != par => return None,
                _ => {}
            }
        }
        Some(out.unwrap_or(Parity::Even))
    }

    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .rev()
            .map(|(k, p)| match k {
                0 => format!("({p})"),
                1 => format!("({p})*lambda"),
                k => format!("({p})*lambda^{k}"),
            })
            .collect();
        parts.join(" + ")
    }

    pub fn to_latex(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .rev()
            .map(|(k, p)| match k {
                0 => p.to_latex(),
                1 => format!("({})\\lambda", p.to_latex()),
                k => format!("({})\\lambda^{{{k}}}", p.to_latex()),
            })
            .collect();
        parts.join("+")
    }
}

impl From<DiffPoly> for Laurent {
    fn from(p: DiffPoly) -> Self {
        Laurent::constant(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuperLieError {
    #[error("shape mismatch: {0}x{1} against {2}x{3}")]
    Shape(usize, usize, usize, usize),
    #[error("grading mismatch between operands")]
    Grading,
    #[error("supertrace needs a square matrix, got {0}x{1}")]
    NotSquare(usize, usize),
}

/// A matrix whose rows and columns carry a ℤ₂ grading; `parity` is the
/// parity of the matrix as an element of the superalgebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperMatrix {
    rows: usize,
    cols: usize,
    row_grading: Vec<Parity>,
    col_grading: Vec<Parity>,
    parity: Parity,
    entries: Vec<Laurent>,
}

/// Block grading `even^m | odd^n`.
pub fn grading(even: usize, odd: usize) -> Vec<Parity> {
    let mut g = vec![Parity::Even; even];
    g.extend(std::iter::repeat_n(Parity::Odd, odd));
    g
}

impl SuperMatrix {
    pub fn zeros(row_grading: Vec<Parity>, col_grading: Vec<Parity>, parity: Parity) -> Self {
        let (rows, cols) = (row_grading.len(), col_grading.len());
        SuperMatrix {
            rows,
            cols,
            row_grading,
            col_grading,
            parity,
            entries: vec![Laurent::zero(); rows * cols],
        }
    }

    pub fn square(grading: Vec<Parity>, parity: Parity) -> Self {
        SuperMatrix::zeros(grading.clone(), grading, parity)
    }

    pub fn identity(grading: Vec<Parity>) -> Self {
        let mut m = SuperMatrix::square(grading, Parity::Even);
        for i in 0..m.rows {
            m.set(i, i, Laurent::int(1));
        }
        m
    }

    pub fn from_ints(grading: Vec<Parity>, parity: Parity, rows: &[&[i64]]) -> Self {
        let mut m = SuperMatrix::square(grading, parity);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                m.set(i, j, Laurent::int(*v));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn with_parity(mut self, p: Parity) -> Self {
        self.parity = p;
        self
    }

    pub fn row_grading(&self) -> &[Parity] {
        &self.row_grading
    }

    pub fn get(&self, i: usize, j: usize) -> &Laurent {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Laurent) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn map<F: Fn(&Laurent) -> Laurent>(&self, f: F) -> SuperMatrix {
        let mut out = self.clone();
        for e in out.entries.iter_mut() {
            *e = f(e);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    fn same_shape(&self, o: &SuperMatrix) -> Result<(), SuperLieError> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(SuperLieError::Shape(self.rows, self.cols, o.rows, o.cols));
        }
        if self.row_grading != o.row_grading || self.col_grading != o.col_grading {
            return Err(SuperLieError::Grading);
        }
        Ok(())
    }

    pub fn add(&self, o: &SuperMatrix) -> Result<SuperMatrix, SuperLieError> {
        self.same_shape(o)?;
        let mut out = self.clone();
        for (e, f) in out.entries.iter_mut().zip(&o.entries) {
            *e = e.add(f);
        }
        Ok(out)
    }

    pub fn sub(&self, o: &SuperMatrix) -> Result<SuperMatrix, SuperLieError> {
        self.same_shape(o)?;
        let mut out = self.clone();
        for (e, f) in out.entries.iter_mut().zip(&o.entries) {
            *e = e.sub(f);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> SuperMatrix {
        self.map(|e| e.scale(c))
    }

    pub fn mul(&self, o: &SuperMatrix) -> Result<SuperMatrix, SuperLieError> {
        if self.cols != o.rows {
            return Err(SuperLieError::Shape(self.rows, self.cols, o.rows, o.cols));
        }
        if self.col_grading != o.row_grading {
            return Err(SuperLieError::Grading);
        }
        let mut out = SuperMatrix::zeros(
            self.row_grading.clone(),
            o.col_grading.clone(),
            self.parity.add(o.parity),
        );
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = Laurent::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = o.get(k, j);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Graded bracket `XY − (−1)^{|X||Y|} YX`.
    pub fn supercommutator(&self, o: &SuperMatrix) -> Result<SuperMatrix, SuperLieError> {
        let xy = self.mul(o)?;
        let yx = o.mul(self)?;
        if self.parity.is_odd() && o.parity.is_odd() {
            xy.add(&yx)
        } else {
            xy.sub(&yx)
        }
    }

    /// Even diagonal entries minus odd diagonal entries.
    pub fn supertrace(&self) -> Result<Laurent, SuperLieError> {
        if self.rows != self.cols {
            return Err(SuperLieError::NotSquare(self.rows, self.cols));
        }
        let mut acc = Laurent::zero();
        for i in 0..self.rows {
            acc = match self.row_grading[i] {
                Parity::Even => acc.add(self.get(i, i)),
                Parity::Odd => acc.sub(self.get(i, i)),
            };
        }
        Ok(acc)
    }

    pub fn d_total(&self) -> SuperMatrix {
        self.map(|e| e.d_total())
    }

    pub fn d_lambda(&self) -> SuperMatrix {
        self.map(|e| e.d_lambda())
    }

    pub fn map_poly<F: Fn(&DiffPoly) -> DiffPoly>(&self, f: F) -> SuperMatrix {
        self.map(|e| e.map(&f))
    }

    /// Entries violating the block discipline: entry `(i,j)` must have parity
    /// `|i| + |j| + |X|`.
    pub fn grading_violations(&self) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let want = self.row_grading[i]
                    .add(self.col_grading[j])
                    .add(self.parity);
                let e = self.get(i, j);
                if e.is_zero() {
                    continue;
                }
                if e.parity() != Some(want) {
                    bad.push((i, j));
                }
            }
        }
        bad
    }

    pub fn check_grading(&self) -> bool {
        self.grading_violations().is_empty()
    }

    /// The coefficient matrix of λ^k.
    pub fn lambda_coeff(&self, k: i32) -> SuperMatrix {
        self.map(|e| Laurent::constant(e.coeff(k)))
    }

    pub fn lambda_range(&self) -> Option<(i32, i32)> {
        let lo = self.entries.iter().filter_map(|e| e.min_power()).min()?;
        let hi = self.entries.iter().filter_map(|e| e.max_power()).max()?;
        Some((lo, hi))
    }

    /// Numeric entries (λ⁰, scalar) as rationals, if the matrix is constant.
    pub fn constant_entries(&self) -> Option<Vec<Rational>> {
        self.entries
            .iter()
            .map(|e| {
                if e.is_zero() {
                    return Some(Rational::zero());
                }
                if e.max_power() != Some(0) || e.min_power() != Some(0) {
                    return None;
                }
                let p = e.coeff(0);
                (p.is_scalar() && !p.contains_mu()).then(|| p.constant_term())
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_text()).collect();
            out.push_str(&format!("[{}]\n", row.join(", ")));
        }
        out
    }
}

impl fmt::Display for SuperMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algebra {
    Sl21,
    Sl41,
}

impl Algebra {
    pub fn name(self) -> &'static str {
        match self {
            Algebra::Sl21 => "sl(2,1)",
            Algebra::Sl41 => "sl(4,1)",
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Algebra::Sl21 => "E",
            Algebra::Sl41 => "e",
        }
    }

    pub fn grading(self) -> Vec<Parity> {
        match self {
            Algebra::Sl21 => grading(2, 1),
            Algebra::Sl41 => grading(4, 1),
        }
    }

    /// Basis matrices, index 0 is `E₁`/`e₁`.
    pub fn basis(self) -> Vec<SuperMatrix> {
        use Parity::{Even as Ev, Odd as Od};
        let g = self.grading();
        match self {
            Algebra::Sl21 => vec![
                SuperMatrix::from_ints(g.clone(), Ev, &[&[1, 0, 0], &[0, -1, 0], &[0, 0, 0]]),
                SuperMatrix::from_ints(g.clone(), Ev, &[&[0, 1, 0], &[0, 0, 0], &[0, 0, 0]]),
                SuperMatrix::from_ints(g.clone(), Ev, &[&[0, 0, 0], &[1, 0, 0], &[0, 0, 0]]),
                SuperMatrix::from_ints(g.clone(), Od, &[&[0, 0, 1], &[0, 0, 0], &[0, -1, 0]]),
                SuperMatrix::from_ints(g, Od, &[&[0, 0, 0], &[0, 0, 1], &[1, 0, 0]]),
            ],
            Algebra::Sl41 => vec![
                SuperMatrix::from_ints(
                    g.clone(),
                    Ev,
                    &[
                        &[1, 0, 0, 0, 0],
                        &[0, -1, 0, 0, 0],
                        &[0, 0, 1, 0, 0],
                        &[0, 0, 0, -1, 0],
                        &[0, 0, 0, 0, 0],
                    ],
                ),
                SuperMatrix::from_ints(
                    g.clone(),
                    Ev,
                    &[
                        &[0, 1, 0, 0, 0],
                        &[0, 0, 0, 0, 0],
                        &[0, 0, 0, 1, 0],
                        &[0, 0, 0, 0, 0],
                        &[0, 0, 0, 0, 0],
                    ],
                ),
                SuperMatrix::from_ints(
                    g.clone(),
                    Ev,
                    &[
                        &[0, 0, 0, 0, 0],
                        &[1, 0, 0, 0, 0],
                        &[0, 0, 0, 0, 0],
                        &[0, 0, 1, 0, 0],
                        &[0, 0, 0, 0, 0],
                    ],
                ),
                SuperMatrix::from_ints(
                    g.clone(),
                    Ev,
                    &[
                        &[0, 0, 1, 0, 0],
                        &[0, 0, 0, -1, 0],
                        &[0, 0, 1, 0, 0],
                        &[0, 0, 0, -1, 0],
                        &[0, 0, 0, 0, 0],
                    ],
                ),
                SuperMatrix::from_ints(
                    g.clone(),
                    Ev,
                    &[
                        &[0, 0, 0, 1, 0],
                        &[0, 0, 0, 0, 0],
                        &[0, 0, 0, 1, 0],
                        &[0, 0, 0, 0, 0],
                        &[0, 0, 0, 0, 0],
                    ],
                ),
                SuperMatrix::from_ints(
                    g.clone(),
                    Ev,
                    &[
                        &[0, 0, 0, 0, 0],
                        &[0, 0, 1, 0, 0],
                        &[0, 0, 0, 0, 0],
                        &[0, 0, 1, 0, 0],
                        &[0, 0, 0, 0, 0],
                    ],
                ),
                SuperMatrix::from_ints(
                    g.clone(),
                    Od,
                    &[
                        &[0, 0, 0, 0, 1],
                        &[0, 0, 0, 0, 0],
                        &[0, 0, 0, 0, 0],
                        &[0, 0, 0, 0, 0],
                        &[0, -1, 0, 1, 0],
                    ],
                ),
                SuperMatrix::from_ints(
                    g,
                    Od,
                    &[
                        &[0, 0, 0, 0, 0],
                        &[0, 0, 0, 0, 1],
                        &[0, 0, 0, 0, 0],
                        &[0, 0, 0, 0, 0],
                        &[1, 0, -1, 0, 0],
                    ],
                ),
            ],
        }
    }

    /// The printed relation table, as `(i, j, rhs)` with 1-based indices and
    /// `rhs` a list of `(basis index, integer coefficient)`.
    pub fn printed_relations(self) -> Vec<PrintedRelation> {
        let r = |i, j, rhs: &[(usize, i64)]| PrintedRelation {
            i,
            j,
            rhs: rhs.to_vec(),
        };
        match self {
            Algebra::Sl21 => vec![
                r(1, 2, &[(2, 2)]),
                r(1, 3, &[(3, -2)]),
                r(2, 3, &[(1, 1)]),
                r(1, 4, &[(4, 1)]),
                r(2, 5, &[(4, 1)]),
                r(1, 5, &[(5, -1)]),
                r(4, 3, &[(5, -1)]),
                r(2, 4, &[]),
                r(3, 5, &[]),
                r(4, 4, &[(2, -2)]),
                r(5, 5, &[(3, 2)]),
                r(4, 5, &[(1, 1)]),
                r(5, 4, &[(1, 1)]),
            ],
            Algebra::Sl41 => vec![
                r(1, 2, &[(2, 2)]),
                r(1, 3, &[(3, -2)]),
                r(1, 5, &[(5, 2)]),
                r(2, 4, &[(5, -2)]),
                r(4, 5, &[(5, 2)]),
                r(2, 3, &[(1, 1)]),
                r(1, 6, &[(6, -2)]),
                r(3, 4, &[(6, 2)]),
                r(4, 6, &[(6, -2)]),
                r(1, 7, &[(7, 1)]),
                r(2, 8, &[(7, 1)]),
                r(1, 8, &[(8, -1)]),
                r(3, 7, &[(8, 1)]),
                r(2, 6, &[(4, 1)]),
                r(3, 5, &[(4, -1)]),
                r(5, 6, &[(4, 1)]),
                r(1, 4, &[]),
                r(2, 5, &[]),
                r(2, 7, &[]),
                r(3, 6, &[]),
                r(3, 8, &[]),
                r(4, 7, &[]),
                r(4, 8, &[]),
                r(5, 7, &[]),
                r(5, 8, &[]),
                r(6, 7, &[]),
                r(6, 8, &[]),
                r(7, 8, &[(1, 1), (4, -1)]),
                r(7, 7, &[(5, 2), (2, -2)]),
                r(8, 8, &[(3, 2), (6, -2)]),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrintedRelation {
    pub i: usize,
    pub j: usize,
    pub rhs: Vec<(usize, i64)>,
}

fn format_combination(sym: &str, coeffs: &[(usize, Rational)]) -> String {
    let mut out = String::new();
    for (k, c) in coeffs {
        if c.is_zero() {
            continue;
        }
        let neg = c < &Rational::zero();
        let mag = if neg { -c.clone() } else { c.clone() };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if !mag.is_one() {
            out.push_str(&format_rational(&mag));
        }
        out.push_str(&format!("{sym}{k}"));
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

/// Coordinates of a constant matrix in a basis, if it lies in the span.
pub fn expand_in_basis(x: &SuperMatrix, basis: &[SuperMatrix]) -> Option<Vec<Rational>> {
    let target = x.constant_entries()?;
    let cols: Vec<Vec<Rational>> = basis
        .iter()
        .map(|b| b.constant_entries().unwrap())
        .collect();
    let a: Vec<Vec<Rational>> = (0..target.len())
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    linalg::solve(&a, &target)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub label: String,
    pub printed: String,
    pub computed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub label: String,
    /// `None` when the bracket leaves the span of the basis.
    pub expansion: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub algebra: Algebra,
    pub relations: Vec<RelationCheck>,
    pub closed: bool,
    /// Brackets of basis pairs that the printed table does not mention.
    pub unprinted: Vec<BracketEntry>,
    /// Basis elements whose block pattern contradicts their declared parity.
    pub grading_violations: Vec<String>,
}

impl RelationReport {
    pub fn all_pass(&self) -> bool {
        self.relations.iter().all(|r| r.pass) && self.closed && self.grading_violations.is_empty()
    }

    pub fn failures(&self) -> Vec<&RelationCheck> {
        self.relations.iter().filter(|r| !r.pass).collect()
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{} relations\n", self.algebra.name());
        for r in &self.relations {
            out.push_str(&format!(
                "  {:<4} {:<14} printed: {:<14} computed: {}\n",
                if r.pass { "ok" } else { "FAIL" },
                r.label,
                r.printed,
                r.computed
            ));
        }
        out.push_str(&format!(
            "  closure under the bracket: {}\n",
            if self.closed { "yes" } else { "NO" }
        ));
        if !self.unprinted.is_empty() {
            out.push_str("  brackets not listed in the printed table:\n");
            for u in &self.unprinted {
                out.push_str(&format!(
                    "    {} = {}\n",
                    u.label,
                    u.expansion.as_deref().unwrap_or("(outside span)")
                ));
            }
        }
        out
    }
}

fn bracket_label(sym: &str, i: usize, j: usize, both_odd: bool) -> String {
    if both_odd {
        format!("[{sym}{i},{sym}{j}]+")
    } else {
        format!("[{sym}{i},{sym}{j}]")
    }
}

/// Checks every printed relation by explicit matrix computation and expands
/// every bracket of basis elements back into the basis.
pub fn verify_relations(alg: Algebra) -> RelationReport {
    let basis = alg.basis();
    let sym = alg.symbol();
    let mut relations = Vec::new();
    let mut printed_pairs = std::collections::BTreeSet::new();
    for rel in alg.printed_relations() {
        let (x, y) = (&basis[rel.i - 1], &basis[rel.j - 1]);
        let both_odd = x.parity().is_odd() && y.parity().is_odd();
        let computed = x.supercommutator(y).expect("basis shapes agree");
        let mut expected = SuperMatrix::square(alg.grading(), x.parity().add(y.parity()));
        for (k, c) in &rel.rhs {
            expected = expected
                .add(&basis[k - 1].scale(&int(*c)).with_parity(expected.parity()))
                .unwrap();
        }
        let pass = computed
            .sub(&expected.with_parity(computed.parity()))
            .unwrap()
            .is_zero();
        let coords = expand_in_basis(&computed, &basis);
        let computed_txt = match &coords {
            Some(c) => format_combination(
                sym,
                &c.iter()
                    .cloned()
                    .enumerate()
                    .map(|(k, v)| (k + 1, v))
                    .collect::<Vec<_>>(),
            ),
            None => "(outside span)".into(),
        };
        let printed = format_combination(
            sym,
            &rel.rhs
                .iter()
                .map(|(k, c)| (*k, int(*c)))
                .collect::<Vec<_>>(),
        );
        printed_pairs.insert((rel.i.min(rel.j), rel.i.max(rel.j)));
        relations.push(RelationCheck {
            label: bracket_label(sym, rel.i, rel.j, both_odd),
            printed,
            computed: computed_txt,
            pass,
        });
    }
    let mut closed = true;
    let mut unprinted = Vec::new();
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let c = basis[i].supercommutator(&basis[j]).unwrap();
            let coords = expand_in_basis(&c, &basis);
            if coords.is_none() {
                closed = false;
            }
            if !printed_pairs.contains(&(i + 1, j + 1)) {
                let both_odd = basis[i].parity().is_odd() && basis[j].parity().is_odd();
                unprinted.push(BracketEntry {
                    label: bracket_label(sym, i + 1, j + 1, both_odd),
                    expansion: coords.map(|c| {
                        format_combination(
                            sym,
                            &c.into_iter()
                                .enumerate()
                                .map(|(k, v)| (k + 1, v))
                                .collect::<Vec<_>>(),
                        )
                    }),
                });
            }
        }
    }
    let grading_violations = basis
        .iter()
        .enumerate()
        .filter(|(_, b)| !b.check_grading())
        .map(|(k, _)| format!("{sym}{}", k + 1))
        .collect();
    RelationReport {
        algebra: alg,
        relations,
        closed,
        unprinted,
        grading_violations,
    }
}

/// Block-parity table of the basis: for each element, its declared parity and
/// whether its nonzero entries sit in the matching blocks.
pub fn grading_audit(alg: Algebra) -> Vec<(String, Parity, bool)> {
    alg.basis()
        .iter()
        .enumerate()
        .map(|(k, b)| {
            (
                format!("{}{}", alg.symbol(), k + 1),
                b.parity(),
                b.check_grading(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::rat;

    fn e(k: usize) -> SuperMatrix {
        Algebra::Sl41.basis()[k - 1].clone()
    }

    #[test]
    fn printed_examples() {
        let c = e(1).supercommutator(&e(2)).unwrap();
        assert_eq!(c, e(2).scale(&int(2)));
        let c = e(7).supercommutator(&e(8)).unwrap();
        assert_eq!(c, e(1).sub(&e(4)).unwrap());
        assert!(e(1).supercommutator(&e(1)).unwrap().is_zero());
        let c = e(4).supercommutator(&e(5)).unwrap();
        assert_eq!(c, e(5).scale(&int(2)));
    }

    #[test]
    fn supertrace_of_identity() {
        let id = SuperMatrix::identity(grading(4, 1));
        assert_eq!(id.supertrace().unwrap(), Laurent::int(3));
        let rect = SuperMatrix::zeros(grading(2, 1), grading(1, 1), Parity::Even);
        assert_eq!(rect.supertrace(), Err(SuperLieError::NotSquare(3, 2)));
    }

    #[test]
    fn shape_errors() {
        let a = SuperMatrix::identity(grading(2, 1));
        let b = SuperMatrix::identity(grading(4, 1));
        assert!(a.mul(&b).is_err());
        let c = SuperMatrix::identity(grading(3, 0));
        assert_eq!(a.add(&c), Err(SuperLieError::Grading));
    }

    #[test]
    fn sl21_relations_all_pass() {
        let rep = verify_relations(Algebra::Sl21);
        assert_eq!(rep.relations.len(), 13);
        assert!(rep.all_pass(), "{}", rep.to_table());
    }

    #[test]
    fn sl41_relations_all_pass() {
        let rep = verify_relations(Algebra::Sl41);
        assert!(rep.all_pass(), "{}", rep.to_table());
        assert!(rep.unprinted.iter().all(|u| u.expansion.is_some()));
    }

    #[test]
    fn graded_antisymmetry_on_basis_pairs() {
        for alg in [Algebra::Sl21, Algebra::Sl41] {
            let b = alg.basis();
            for x in &b {
                for y in &b {
                    let xy = x.supercommutator(y).unwrap();
                    let yx = y.supercommutator(x).unwrap();
                    let sign = if x.parity().is_odd() && y.parity().is_odd() {
                        1
                    } else {
                        -1
                    };
                    assert_eq!(xy, yx.scale(&int(sign)));
                }
            }
        }
    }

    #[test]
    fn graded_jacobi_exhaustive_sl41() {
        let b = Algebra::Sl41.basis();
        let sgn = |x: &SuperMatrix, y: &SuperMatrix| -> i64 {
            if x.parity().is_odd() && y.parity().is_odd() {
                -1
            } else {
                1
            }
        };
        for x in &b {
            for y in &b {
                for z in &b {
                    // (−1)^{|x||z|}[x,[y,z]] + (−1)^{|y||x|}[y,[z,x]] + (−1)^{|z||y|}[z,[x,y]] = 0
                    let t1 = x
                        .supercommutator(&y.supercommutator(z).unwrap())
                        .unwrap()
                        .scale(&int(sgn(x, z)));
                    let t2 = y
                        .supercommutator(&z.supercommutator(x).unwrap())
                        .unwrap()
                        .scale(&int(sgn(y, x)));
                    let t3 = z
                        .supercommutator(&x.supercommutator(y).unwrap())
                        .unwrap()
                        .scale(&int(sgn(z, y)));
                    let p = t1.parity();
                    let sum = t1
                        .add(&t2.with_parity(p))
                        .unwrap()
                        .add(&t3.with_parity(p))
                        .unwrap();
                    assert!(sum.is_zero());
                }
            }
        }
    }

    #[test]
    fn basis_expansion_is_exact() {
        let b = Algebra::Sl41.basis();
        let x = b[0].scale(&rat(1, 2)).add(&b[3].scale(&int(-3))).unwrap();
        let c = expand_in_basis(&x, &b).unwrap();
        assert_eq!(c[0], rat(1, 2));
        assert_eq!(c[3], int(-3));
        let mut off = SuperMatrix::square(grading(4, 1), Parity::Even);
        off.set(4, 4, Laurent::int(1));
        assert!(expand_in_basis(&off, &b).is_none());
    }

    #[test]
    fn grading_audit_clean() {
        for alg in [Algebra::Sl21, Algebra::Sl41] {
            assert!(grading_audit(alg).iter().all(|(_, _, ok)| *ok));
        }
    }

    #[test]
    fn laurent_lambda_derivative() {
        let l = Laurent::lambda()
            .mul(&Laurent::lambda())
            .add(&Laurent::int(3));
        assert_eq!(l.d_lambda(), Laurent::lambda().scale(&int(2)));
        assert_eq!(
            Laurent::monomial(-2, DiffPoly::one()).d_lambda(),
            Laurent::monomial(-3, DiffPoly::int(-2))
        );
    }
}
