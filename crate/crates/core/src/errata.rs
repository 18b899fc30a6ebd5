//! Reference values as printed, the errata ledger, and the three-way
//! comparison of derived objects against them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffring::{parse_with, DiffPoly, MuMode, ParseError, ParseOptions};
use crate::hierarchy::{build_flow, build_time_matrix, flow_from_level, HierarchyLevel, U_ORDER};
use crate::superlie::Laurent;

#[derive(Debug, Error)]
pub enum ErrataError {
    #[error("ledger is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("reference value {id} does not parse: {source}")]
    Parse { id: String, source: ParseError },
    #[error("levels through {0} are needed")]
    MissingLevel(usize),
}

const LEDGER_JSON: &str = include_str!("../data/errata.json");

/// One recorded discrepancy between a printed form and the derived one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Erratum {
    pub id: String,
    pub location: String,
    pub printed: String,
    pub derived: String,
    pub resolution: String,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    pub schema: u32,
    pub errata: Vec<Erratum>,
}

impl Ledger {
    /// The ledger shipped with the crate.
    pub fn bundled() -> Ledger {
        Ledger::from_json(LEDGER_JSON).expect("bundled ledger parses")
    }

    pub fn from_json(s: &str) -> Result<Ledger, ErrataError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn get(&self, id: &str) -> Option<&Erratum> {
        self.errata.iter().find(|e| e.id == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.get(id).is_some()
    }
}

/// Outcome of comparing one derived object with its printed counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Class {
    Match,
    /// Equal to the printed form once a ledgered correction is applied.
    ErratumMatch,
    Mismatch,
}

impl Class {
    pub fn label(self) -> &'static str {
        match self {
            Class::Match => "match",
            Class::ErratumMatch => "erratum",
            Class::Mismatch => "MISMATCH",
        }
    }
}

/// A printed value with an optional ledgered correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reference {
    pub id: &'static str,
    pub printed: &'static str,
    /// `(erratum id, corrected form)`.
    pub corrected: Option<(&'static str, &'static str)>,
}

const fn r(id: &'static str, printed: &'static str) -> Reference {
    Reference {
        id,
        printed,
        corrected: None,
    }
}

const fn rc(
    id: &'static str,
    printed: &'static str,
    erratum: &'static str,
    corrected: &'static str,
) -> Reference {
    Reference {
        id,
        printed,
        corrected: Some((erratum, corrected)),
    }
}

/// Levels one to three, keyed `<component><m>`.
pub const LEVELS: [Reference; 24] = [
    r("a1", "0"),
    r("e1", "0"),
    r("b1", "p"),
    r("c1", "q"),
    rc(
        "f1",
        "p + r",
        "level-f1-g1",
        "p + 2*r",
    ),
    rc(
        "g1",
        "q + s",
        "level-f1-g1",
        "q + 2*s",
    ),
    r("rho1", "alpha"),
    r("delta1", "beta"),
    r("a2", "-(1/2)*(p*q + 2*alpha*beta)"),
    r("b2", "(1/2)*p_x - h*p"),
    r("c2", "-(1/2)*q_x - h*q"),
    r("e2", "-(p*s + q*r + r*s + (1/2)*p*q - alpha*beta)"),
    rc(
        "f2",
        "(1/2)*p_x + (1/2)*r_x - h*p - h*r",
        "level-f2-g2",
        "(1/2)*p_x + r_x - h*p - 2*h*r",
    ),
    rc(
        "g2",
        "-(1/2)*q_x - (1/2)*s_x - h*q - h*s",
        "level-f2-g2",
        "-(1/2)*q_x - s_x - h*q - 2*h*s",
    ),
    r("rho2", "alpha_x - h*alpha"),
    r("delta2", "-beta_x - h*beta"),
    r("a3", "(1/4)*(p*q_x - p_x*q) + alpha*beta_x - alpha_x*beta + h*(p*q + 2*alpha*beta)"),
    r("b3", "(1/4)*p_xx - (1/2)*h_x*p - h*p_x - (1/2)*(p*q + 2*alpha*beta)*p + alpha*alpha_x + h^2*p"),
    r("c3", "(1/4)*q_xx + (1/2)*h_x*q + h*q_x - (1/2)*(p*q + 2*alpha*beta)*q - beta*beta_x + h^2*q"),
    r("e3", "(1/2)*(p*s_x - p_x*s + q_x*r - q*r_x + r*s_x - r_x*s + (1/2)*p*q_x - (1/2)*p_x*q) - (alpha*beta_x - alpha_x*beta) + 2*h*(p*s + q*r + r*s + (1/2)*p*q - alpha*beta)"),
    r("f3", "(1/4)*p_xx + (1/2)*r_xx - (1/2)*h_x*(p + 2*r) - h*p_x - 2*h*r_x - (1/2)*(p*q + 2*alpha*beta)*r - alpha*alpha_x + h^2*(p + 2*r) - (p + r)*((1/2)*p*q + p*s + q*r + r*s - alpha*beta)"),
    r("g3", "(1/4)*q_xx + (1/2)*s_xx + (1/2)*h_x*(q + 2*s) + h*q_x + 2*h*s_x - (1/2)*(p*q + 2*alpha*beta)*s + beta*beta_x + h^2*(q + 2*s) - (q + s)*((1/2)*p*q + p*s + q*r + r*s - alpha*beta)"),
    r("rho3", "alpha_xx - h_x*alpha - 2*h*alpha_x - (1/2)*(p*q + 2*alpha*beta)*alpha + h^2*alpha + (1/2)*p_x*beta + p*beta_x"),
    r("delta3", "beta_xx + h_x*beta + 2*h*beta_x - (1/2)*(p*q + 2*alpha*beta)*beta + h^2*beta + (1/2)*q_x*alpha + q*alpha_x"),
];

/// The second flow, rows in the order of `U_ORDER`.
pub const FLOW2: [Reference; 6] = [
    r(
        "p",
        "(1/2)*p_xx - p^2*q - 2*p*alpha*beta + 2*alpha*alpha_x + mu*(p*p_x*q - p*p_x*s - 3*p*r*q_x - 3*p*r*s_x + p*r_x*q + p*r_x*s - 2*p_x*q*r - 2*p_x*s*r - p^2*q_x - 3*p^2*s_x + 4*p*alpha*beta_x - 4*p*alpha_x*beta + 4*p_x*alpha*beta) - 2*mu^2*p*(2*p^2*s*q + 2*p*q^2*r + 3*q^2*r^2 + 3*s^2*r^2 + 3*p^2*s^2 + 6*p*s^2*r + 6*s*q*r^2 + 8*p*s*q*r) + 16*mu^2*p*alpha*beta*(p*s + q*r + s*r + (1/2)*p*q)",
    ),
    r(
        "q",
        "-(1/2)*q_xx + p*q^2 + 2*q*alpha*beta + 2*beta*beta_x + mu*(p*q_x*q + p*q*s_x - 3*q*s*p_x - 3*q*s*r_x + q*r*q_x + q*r*s_x - 2*p*s*q_x - 2*s*r*q_x - q^2*p_x - 3*q^2*r_x - 4*q*alpha*beta_x + 4*q*alpha_x*beta + 4*q_x*alpha*beta) + 2*mu^2*q*(2*p^2*s*q + 2*p*q^2*r + 3*q^2*r^2 + 3*s^2*r^2 + 3*p^2*s^2 + 6*p*s^2*r + 6*s*q*r^2 + 8*p*s*q*r) - 16*mu^2*q*alpha*beta*(p*s + q*r + s*r + (1/2)*p*q)",
    ),
    r(
        "alpha",
        "alpha_xx + (1/2)*alpha*q_x + q*alpha_x - (1/2)*p*q*alpha + mu*((1/2)*alpha*q*p_x - (1/2)*alpha*p*q_x - 2*alpha*p*s_x - 2*alpha*r*s_x - 2*alpha*r*q_x - 2*p*s*alpha_x - 2*q*r*alpha_x - 2*s*r*alpha_x + 2*alpha*alpha_x*beta) - mu^2*alpha*(2*p^2*s*q + 2*p*q^2*r + 3*q^2*r^2 + 3*s^2*r^2 + 3*p^2*s^2 + 6*p*s^2*r + 6*s*q*r^2 + 8*p*s*q*r)",
    ),
    r(
        "beta",
        "-beta_xx - (1/2)*p_x*beta - p*beta_x + (1/2)*p*q*beta + mu*((1/2)*beta*p*q_x - (1/2)*beta*q*p_x - 2*beta*s*p_x - 2*beta*s*r_x - 2*beta*q*r_x - 2*p*s*beta_x - 2*q*r*beta_x - 2*s*r*beta_x + 2*alpha*beta_x*beta) + mu^2*beta*(2*p^2*s*q + 2*p*q^2*r + 3*q^2*r^2 + 3*s^2*r^2 + 3*p^2*s^2 + 6*p*s^2*r + 6*s*q*r^2 + 8*p*s*q*r)",
    ),
    r(
        "r",
        "r_xx + (1/2)*p_xx - p^2*q + 2*p*alpha*beta - 2*alpha*alpha_x - 2*r^2*s - 2*q*r^2 - 2*p^2*s - 4*p*s*r - 4*p*q*r + mu*( - 3*p*s*p_x - 2*p*r*q_x - p*q*r_x - q*r*p_x - 5*p*r*s_x - 5*p*s*r_x - 2*s*r*p_x - 4*q*r*r_x - 4*s*r*r_x - 4*r^2*q_x - 4*r^2*s_x - p^2*s_x + 4*p_x*alpha*beta + 4*r*alpha*beta_x - 4*r*alpha_x*beta + 4*r_x*alpha*beta) + 8*mu^2*alpha*beta*(r^2*q + r^2*s - p^2*s) - 2*mu^2*(p*q^2*r^2 - p^3*s^2 + 2*r^3*q^2 + 2*r^3*s^2 + 3*p*s^2*r^2 + 4*r^3*q*s + 4*r^2*p*s*q)",
    ),
    r(
        "s",
        "-s_xx - (1/2)*q_xx + p*q^2 - 2*q*alpha*beta - 2*beta*beta_x + 2*r*s^2 + 2*r*q^2 + 2*p*s^2 + 4*p*q*s + 4*q*r*s*mu*( - 3*q*r*q_x - 2*s*r*q_x - p*q*s_x - p*s*q_x - 5*q*r*s_x - 5*q*s*r_x - 2*s*q*p_x - 4*p*s*s_x - 4*r*s*s_x - 4*s^2*p_x - 4*s^2*r_x - q^2*r_x + 4*q_x*alpha*beta - 4*s*alpha*beta_x + 4*s*alpha_x*beta + 8*s_x*alpha*beta) - 8*mu^2*alpha*beta*(r^2*s + p^2*s - r^2*q) + 2*mu^2*(q*p^2*s^2 - q^3*r^2 + 2*s^3*r^2 + 2*s^3*p^2 + 3*q*s^2*r^2 + 4*s^3*p*r + 4*s^2*p*r*q)",
    ),
];

/// A printed entry of a λ-polynomial matrix, by powers of λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntryReference {
    pub id: &'static str,
    /// 1-based position.
    pub row: usize,
    pub col: usize,
    pub parts: &'static [(i32, &'static str)],
    pub corrected: Option<(&'static str, &'static [(i32, &'static str)])>,
}

const fn n(
    id: &'static str,
    row: usize,
    col: usize,
    parts: &'static [(i32, &'static str)],
) -> EntryReference {
    EntryReference {
        id,
        row,
        col,
        parts,
        corrected: None,
    }
}

const fn nc(
    id: &'static str,
    row: usize,
    col: usize,
    parts: &'static [(i32, &'static str)],
    erratum: &'static str,
    corrected: &'static [(i32, &'static str)],
) -> EntryReference {
    EntryReference {
        id,
        row,
        col,
        parts,
        corrected: Some((erratum, corrected)),
    }
}

// the diagonal correction −2μe₃ of the time matrix, with e₃ as listed
const N11_FULL: &str = "-(1/2)*(p*q + 2*alpha*beta) - 2*mu*((1/2)*(p*s_x - p_x*s + q_x*r - q*r_x + r*s_x - r_x*s + (1/2)*p*q_x - (1/2)*p_x*q) - (alpha*beta_x - alpha_x*beta) + 2*h*(p*s + q*r + r*s + (1/2)*p*q - alpha*beta))";
const N33_FULL: &str = "-(p*s + q*r + r*s + p*q) - 2*mu*((1/2)*(p*s_x - p_x*s + q_x*r - q*r_x + r*s_x - r_x*s + (1/2)*p*q_x - (1/2)*p_x*q) - (alpha*beta_x - alpha_x*beta) + 2*h*(p*s + q*r + r*s + (1/2)*p*q - alpha*beta))";

/// Listed entries of the second time matrix.
pub const TIME_MATRIX2: [EntryReference; 11] = [
    nc(
        "N11",
        1,
        1,
        &[(2, "1"), (0, "-(1/2)*(p*q + 2*alpha*beta)")],
        "time2-diagonal",
        &[(2, "1"), (0, N11_FULL)],
    ),
    n("N12", 1, 2, &[(1, "p"), (0, "(1/2)*p_x - h*p")]),
    n(
        "N13",
        1,
        3,
        &[(2, "1"), (0, "-(p*s + q*r + r*s + (1/2)*p*q - alpha*beta)")],
    ),
    nc(
        "N14",
        1,
        4,
        &[(1, "p + 2*r"), (0, "(1/2)*p_x + (1/2)*r_x - h*p - h*r")],
        "level-f2-g2",
        &[(1, "p + 2*r"), (0, "(1/2)*p_x + r_x - h*p - 2*h*r")],
    ),
    nc(
        "N15",
        1,
        5,
        &[(1, "alpha"), (0, "(1/2)*alpha_x - h*alpha")],
        "time2-odd",
        &[(1, "alpha"), (0, "alpha_x - h*alpha")],
    ),
    n("N21", 2, 1, &[(1, "q"), (0, "-(1/2)*q_x - h*q")]),
    nc(
        "N23",
        2,
        3,
        &[(1, "q + 2*s"), (0, "-(1/2)*q_x - (1/2)*s_x - h*q - h*s")],
        "level-f2-g2",
        &[(1, "q + 2*s"), (0, "-(1/2)*q_x - s_x - h*q - 2*h*s")],
    ),
    nc(
        "N25",
        2,
        5,
        &[(1, "beta"), (0, "-(1/2)*beta_x - h*beta")],
        "time2-odd",
        &[(1, "beta"), (0, "-beta_x - h*beta")],
    ),
    nc(
        "N33",
        3,
        3,
        &[(2, "2"), (0, "-(p*s + q*r + r*s + p*q)")],
        "time2-diagonal",
        &[(2, "2"), (0, N33_FULL)],
    ),
    nc(
        "N34",
        3,
        4,
        &[(1, "2*(p + r)"), (0, "p_x + (1/2)*r_x - 2*h*p - h*r")],
        "level-f2-g2",
        &[(1, "2*(p + r)"), (0, "p_x + r_x - 2*h*p - 2*h*r")],
    ),
    nc(
        "N43",
        4,
        3,
        &[(1, "2*(q + s)"), (0, "-q_x - (1/2)*s_x - 2*h*q - h*s")],
        "level-f2-g2",
        &[(1, "2*(q + s)"), (0, "-q_x - s_x - 2*h*q - 2*h*s")],
    ),
];

fn parse_ref(id: &str, s: &str, mu: &MuMode) -> Result<DiffPoly, ErrataError> {
    parse_with(s, &ParseOptions { mu: mu.clone() }).map_err(|source| ErrataError::Parse {
        id: id.to_string(),
        source,
    })
}

fn parse_laurent(id: &str, parts: &[(i32, &str)], mu: &MuMode) -> Result<Laurent, ErrataError> {
    let mut out = Laurent::zero();
    for (k, s) in parts {
        out = out.add(&Laurent::monomial(*k, parse_ref(id, s, mu)?));
    }
    Ok(out)
}

/// One row of a comparison report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemComparison {
    pub id: String,
    pub class: Class,
    pub erratum: Option<String>,
    pub printed: String,
    pub derived: String,
    /// `derived − printed`, empty on a match.
    pub difference: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub title: String,
    pub mu: MuMode,
    pub items: Vec<ItemComparison>,
}

impl ComparisonReport {
    pub fn counts(&self) -> BTreeMap<Class, usize> {
        let mut out = BTreeMap::new();
        for i in &self.items {
            *out.entry(i.class).or_insert(0) += 1;
        }
        out
    }

    pub fn count(&self, class: Class) -> usize {
        self.items.iter().filter(|i| i.class == class).count()
    }

    /// True when nothing outside the ledger disagrees.
    pub fn pass(&self) -> bool {
        self.count(Class::Mismatch) == 0
    }

    pub fn item(&self, id: &str) -> Option<&ItemComparison> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} (mu {}): {} match, {} erratum, {} mismatch\n",
            self.title,
            self.mu.label(),
            self.count(Class::Match),
            self.count(Class::ErratumMatch),
            self.count(Class::Mismatch)
        );
        for i in &self.items {
            out.push_str(&format!("  {:<8} {}", i.class.label(), i.id));
            if let Some(e) = &i.erratum {
                out.push_str(&format!(" [{e}]"));
            }
            out.push('\n');
            if i.class == Class::Mismatch {
                out.push_str(&format!(
                    "           derived - printed = {}\n",
                    i.difference
                ));
            }
        }
        out
    }
}

fn classify(
    id: &str,
    derived: &DiffPoly,
    printed: &DiffPoly,
    corrected: Option<(&str, DiffPoly)>,
    ledger: &Ledger,
) -> ItemComparison {
    let (class, erratum) = if derived == printed {
        (Class::Match, None)
    } else {
        match corrected {
            Some((e, c)) if &c == derived && ledger.contains(e) => {
                (Class::ErratumMatch, Some(e.to_string()))
            }
            _ => (Class::Mismatch, None),
        }
    };
    ItemComparison {
        id: id.to_string(),
        class,
        erratum,
        printed: printed.to_text(),
        derived: derived.to_text(),
        difference: if class == Class::Match {
            String::new()
        } else {
            (derived - printed).to_text()
        },
    }
}

fn level_component<'a>(
    levels: &'a [HierarchyLevel],
    id: &str,
) -> Result<&'a DiffPoly, ErrataError> {
    let split = id
        .find(|c: char| c.is_ascii_digit())
        .expect("ids end in a level index");
    let m: usize = id[split..].parse().expect("level index");
    let level = levels.get(m).ok_or(ErrataError::MissingLevel(m))?;
    Ok(level.component(&id[..split]).expect("known component"))
}

/// Derived levels against the printed list. Printed levels beyond the
/// derived range are skipped.
pub fn compare_levels(
    levels: &[HierarchyLevel],
    mu: &MuMode,
    ledger: &Ledger,
) -> Result<ComparisonReport, ErrataError> {
    let mut items = Vec::new();
    for rf in &LEVELS {
        let derived = match level_component(levels, rf.id) {
            Ok(d) => d,
            Err(ErrataError::MissingLevel(_)) => continue,
            Err(e) => return Err(e),
        };
        let printed = parse_ref(rf.id, rf.printed, mu)?;
        let corrected = match rf.corrected {
            Some((e, c)) => Some((e, parse_ref(rf.id, c, mu)?)),
            None => None,
        };
        items.push(classify(rf.id, derived, &printed, corrected, ledger));
    }
    Ok(ComparisonReport {
        title: "levels 1-3".into(),
        mu: mu.clone(),
        items,
    })
}

/// Level three rebuilt from the printed list alone.
pub fn printed_level(m: usize, mu: &MuMode) -> Result<HierarchyLevel, ErrataError> {
    let mut level = HierarchyLevel {
        m,
        ..HierarchyLevel::initial()
    };
    let suffix = m.to_string();
    for rf in LEVELS.iter().filter(|rf| {
        rf.id.ends_with(&suffix)
            && rf.id[..rf.id.len() - suffix.len()]
                .chars()
                .all(|c| c.is_alphabetic())
    }) {
        let v = parse_ref(rf.id, rf.printed, mu)?;
        let name = &rf.id[..rf.id.len() - suffix.len()];
        let slot = match name {
            "a" => &mut level.a,
            "b" => &mut level.b,
            "c" => &mut level.c,
            "e" => &mut level.e,
            "f" => &mut level.f,
            "g" => &mut level.g,
            "rho" => &mut level.rho,
            _ => &mut level.delta,
        };
        *slot = v;
    }
    Ok(level)
}

/// The second flow against its printed form. The ledgered correction of a row
/// is the flow formula applied to the printed level-three list, so a row is
/// an erratum only when the printed text is inconsistent with itself.
pub fn compare_flow2(
    levels: &[HierarchyLevel],
    mu: &MuMode,
    ledger: &Ledger,
) -> Result<ComparisonReport, ErrataError> {
    let derived = build_flow(2, levels, mu).map_err(|_| ErrataError::MissingLevel(3))?;
    let reassembled = flow_from_level(2, &printed_level(3, mu)?, mu);
    let mut items = Vec::new();
    for (i, rf) in FLOW2.iter().enumerate() {
        let printed = parse_ref(rf.id, rf.printed, mu)?;
        let erratum = format!("flow2-{}", U_ORDER[i].name());
        let id = format!("{}_t2", rf.id);
        items.push(classify(
            &id,
            &derived.rhs[i],
            &printed,
            Some((erratum.as_str(), reassembled.rhs[i].clone())),
            ledger,
        ));
    }
    Ok(ComparisonReport {
        title: "second flow".into(),
        mu: mu.clone(),
        items,
    })
}

/// Listed entries of the second time matrix, one item per power of λ.
pub fn compare_time_matrix2(
    levels: &[HierarchyLevel],
    mu: &MuMode,
    ledger: &Ledger,
) -> Result<ComparisonReport, ErrataError> {
    let nm = build_time_matrix(2, levels, mu).map_err(|_| ErrataError::MissingLevel(3))?;
    let mut items = Vec::new();
    for rf in &TIME_MATRIX2 {
        let printed = parse_laurent(rf.id, rf.parts, mu)?;
        let corrected = match rf.corrected {
            Some((e, parts)) => Some((e, parse_laurent(rf.id, parts, mu)?)),
            None => None,
        };
        let derived = nm.get(rf.row - 1, rf.col - 1);
        let mut powers: Vec<i32> = derived
            .terms()
            .map(|(k, _)| k)
            .chain(printed.terms().map(|(k, _)| k))
            .collect();
        powers.sort_unstable_by(|a, b| b.cmp(a));
        powers.dedup();
        for k in powers {
            let id = format!("{} lambda^{k}", rf.id);
            let c = corrected.as_ref().map(|(e, l)| (*e, l.coeff(k)));
            items.push(classify(
                &id,
                &derived.coeff(k),
                &printed.coeff(k),
                c,
                ledger,
            ));
        }
    }
    Ok(ComparisonReport {
        title: "second time matrix".into(),
        mu: mu.clone(),
        items,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{build_flow, derive_levels, flow_from_level};

    #[test]
    fn bundled_ledger_parses() {
        let l = Ledger::bundled();
        assert_eq!(l.schema, 1);
        assert!(l.contains("level-f1-g1"));
        assert!(!l.contains("no-such-entry"));
    }

    #[test]
    fn every_referenced_erratum_is_ledgered() {
        let l = Ledger::bundled();
        let ids = LEVELS
            .iter()
            .chain(FLOW2.iter())
            .filter_map(|r| r.corrected.map(|c| c.0))
            .chain(TIME_MATRIX2.iter().filter_map(|r| r.corrected.map(|c| c.0)));
        for id in ids {
            assert!(l.contains(id), "{id} missing");
        }
    }

    #[test]
    fn f1_is_an_erratum_match() {
        let mu = MuMode::Symbolic;
        let lv = derive_levels(2, &mu).unwrap();
        let rep = compare_levels(&lv, &mu, &Ledger::bundled()).unwrap();
        assert_eq!(rep.item("f1").unwrap().class, Class::ErratumMatch);
        assert_eq!(rep.item("a1").unwrap().class, Class::Match);
        assert_eq!(rep.item("delta2").unwrap().class, Class::Match);
    }

    #[test]
    fn empty_ledger_turns_errata_into_mismatches() {
        let mu = MuMode::zero();
        let lv = derive_levels(1, &mu).unwrap();
        let empty = Ledger::from_json(r#"{"schema":1,"errata":[]}"#).unwrap();
        let rep = compare_levels(&lv, &mu, &empty).unwrap();
        assert_eq!(rep.item("g1").unwrap().class, Class::Mismatch);
        assert!(!rep.pass());
    }

    #[test]
    fn printed_levels_reassemble_the_derived_flow() {
        for mu in [MuMode::Symbolic, MuMode::zero()] {
            let lv = derive_levels(3, &mu).unwrap();
            let re = flow_from_level(2, &printed_level(3, &mu).unwrap(), &mu);
            assert_eq!(re, build_flow(2, &lv, &mu).unwrap());
        }
    }

    #[test]
    fn no_unexplained_discrepancies() {
        let l = Ledger::bundled();
        for mu in [MuMode::Symbolic, MuMode::zero()] {
            let lv = derive_levels(3, &mu).unwrap();
            assert!(compare_levels(&lv, &mu, &l).unwrap().pass());
            assert!(compare_flow2(&lv, &mu, &l).unwrap().pass());
            assert!(compare_time_matrix2(&lv, &mu, &l).unwrap().pass());
        }
    }
}
