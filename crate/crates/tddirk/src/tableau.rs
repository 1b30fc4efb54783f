//! Butcher tableaux for two-derivative DIRK methods, a named-scheme
//! registry, and verifiers for the row assumption and the order conditions.
//!
//! The method coefficients are the usual `(A, b, c)` triple with `A`
//! strictly lower triangular plus diagonal. Order conditions up to order 6
//! take the form of polynomial sums in the coefficients; together with the
//! row assumption `sum_j a_ij = c_i^2 / 2` they determine the classical
//! order of a scheme. Built-in coefficients are evaluated from their exact
//! radical closed forms (e.g. `(9 - sqrt(33))/24`) so residuals sit at
//! round-off level.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of an s-stage two-derivative DIRK scheme.
///
/// Invariants (enforced by [`ButcherTableau::new`]):
/// - `A` is s-by-s with `a_ij = 0` for `j > i` (diagonal implicitness),
/// - `b` and `c` have length s,
/// - every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    name: String,
    s: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    claimed_order: u32,
}

impl ButcherTableau {
    pub fn new(
        name: impl Into<String>,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
        claimed_order: u32,
    ) -> Result<Self> {
        let name = name.into();
        let s = b.len();
        let fail = |reason: &str| Error::InvalidTableau {
            name: name.clone(),
            reason: reason.to_string(),
        };
        if s == 0 {
            return Err(fail("stage count must be positive"));
        }
        if claimed_order == 0 {
            return Err(fail("claimed order must be positive"));
        }
        if c.len() != s {
            return Err(fail(&format!("c has length {}, expected {}", c.len(), s)));
        }
        if a.len() != s {
            return Err(fail(&format!("A has {} rows, expected {}", a.len(), s)));
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != s {
                return Err(fail(&format!(
                    "A row {} has length {}, expected {}",
                    i,
                    row.len(),
                    s
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(fail(&format!("a[{i}][{j}] is not finite")));
                }
                if j > i && v != 0.0 {
                    return Err(fail(&format!(
                        "a[{i}][{j}] = {v} breaks diagonal implicitness (must be exactly 0)"
                    )));
                }
            }
        }
        if b.iter().any(|v| !v.is_finite()) || c.iter().any(|v| !v.is_finite()) {
            return Err(fail("b and c entries must be finite"));
        }
        Ok(ButcherTableau {
            name,
            s,
            a,
            b,
            c,
            claimed_order,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Stage count.
    pub fn stages(&self) -> usize {
        self.s
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn claimed_order(&self) -> u32 {
        self.claimed_order
    }

    /// Largest diagonal magnitude, the quantity entering the fixed-point
    /// step restriction `h < 1 / sqrt(L_g max|a_ii|)`.
    pub fn max_diagonal(&self) -> f64 {
        (0..self.s).map(|i| self.a[i][i].abs()).fold(0.0, f64::max)
    }

    /// Same coefficients under a different name / claimed order. Used by the
    /// CLI to re-verify a scheme against an overridden order claim.
    pub fn with_claimed_order(&self, claimed_order: u32) -> Self {
        let mut t = self.clone();
        t.claimed_order = claimed_order;
        t
    }

    /// Maximum absolute difference over all of `A`, `b`, `c`.
    pub fn max_coefficient_difference(&self, other: &ButcherTableau) -> f64 {
        if self.s != other.s {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for i in 0..self.s {
            for j in 0..self.s {
                d = d.max((self.a[i][j] - other.a[i][j]).abs());
            }
            d = d.max((self.b[i] - other.b[i]).abs());
            d = d.max((self.c[i] - other.c[i]).abs());
        }
        d
    }
}

impl fmt::Display for ButcherTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} (s = {}, claimed order {})",
            self.name, self.s, self.claimed_order
        )?;
        for i in 0..self.s {
            write!(f, "  {:>12.8} |", self.c[i])?;
            for j in 0..=i {
                write!(f, " {:>12.8}", self.a[i][j])?;
            }
            writeln!(f)?;
        }
        write!(f, "  {:>12} |", "")?;
        for i in 0..self.s {
            write!(f, " {:>12.8}", self.b[i])?;
        }
        Ok(())
    }
}

/// Identifies a verified condition: either the row assumption for one stage
/// or one of the numbered order conditions 1..=8.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionId {
    /// Row assumption `sum_j a_ij = c_i^2 / 2` for stage `i` (0-based).
    Row(usize),
    /// Numbered order condition, 1..=8.
    Order(u8),
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionId::Row(i) => write!(f, "ROW({})", i + 1),
            ConditionId::Order(n) => write!(f, "No.{n}"),
        }
    }
}

/// One condition together with its residual (left side minus right side).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionResidual {
    pub condition_id: ConditionId,
    pub value: f64,
}

/// Residuals of the row assumption, one entry per stage:
/// `sum_{j} a_ij - c_i^2 / 2`.
pub fn row_assumption_residuals(t: &ButcherTableau) -> Vec<ConditionResidual> {
    (0..t.stages())
        .map(|i| {
            let row_sum: f64 = (0..t.stages()).map(|j| t.a(i, j)).sum();
            ConditionResidual {
                condition_id: ConditionId::Row(i),
                value: row_sum - t.c()[i] * t.c()[i] / 2.0,
            }
        })
        .collect()
}

/// The eight order conditions: `(sum over the tableau, right-hand side)`.
fn condition_sum(t: &ButcherTableau, no: u8) -> (f64, f64) {
    let s = t.stages();
    let b = t.b();
    let c = t.c();
    let pair_sum = |weight: &dyn Fn(usize, usize) -> f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..s {
            for j in 0..=i {
                acc += weight(i, j) * t.a(i, j);
            }
        }
        acc
    };
    match no {
        1 => (b.iter().sum(), 1.0 / 2.0),
        2 => ((0..s).map(|i| b[i] * c[i]).sum(), 1.0 / 6.0),
        3 => ((0..s).map(|i| b[i] * c[i] * c[i]).sum(), 1.0 / 12.0),
        4 => (pair_sum(&|i, j| b[i] * c[j]), 1.0 / 120.0),
        5 => ((0..s).map(|i| b[i] * c[i].powi(3)).sum(), 1.0 / 20.0),
        6 => (pair_sum(&|i, j| b[i] * c[j] * c[j]), 1.0 / 360.0),
        7 => (pair_sum(&|i, j| b[i] * c[i] * c[j]), 1.0 / 180.0),
        8 => ((0..s).map(|i| b[i] * c[i].powi(4)).sum(), 1.0 / 30.0),
        _ => unreachable!("condition numbers run 1..=8"),
    }
}

/// Index of the last condition required for a given order.
fn last_condition_of_order(order: u32) -> u8 {
    match order {
        2 => 1,
        3 => 2,
        4 => 3,
        5 => 5,
        6 => 8,
        _ => unreachable!(),
    }
}

/// Residuals of order conditions No. 1 through the last condition of
/// `up_to_order` (2 -> No. 1; 3 -> 1..2; 4 -> 1..3; 5 -> 1..5; 6 -> 1..8).
pub fn order_condition_residuals(
    t: &ButcherTableau,
    up_to_order: u32,
) -> Result<Vec<ConditionResidual>> {
    if !(2..=6).contains(&up_to_order) {
        return Err(Error::OrderOutOfRange(up_to_order));
    }
    let last = last_condition_of_order(up_to_order);
    Ok((1..=last)
        .map(|no| {
            let (lhs, rhs) = condition_sum(t, no);
            ConditionResidual {
                condition_id: ConditionId::Order(no),
                value: lhs - rhs,
            }
        })
        .collect())
}

/// Classifies the order of a tableau by testing the row assumption and the
/// order conditions against an absolute tolerance.
///
/// Returns the largest `p` in 1..=6 such that every row residual and every
/// condition through order `p` has magnitude <= `tol`. The method form is
/// first order by construction, so 1 is returned when even condition No. 1
/// (or the row assumption) fails.
pub fn classify_order(t: &ButcherTableau, tol: f64) -> u32 {
    let rows_ok = row_assumption_residuals(t)
        .iter()
        .all(|r| r.value.abs() <= tol);
    if !rows_ok {
        return 1;
    }
    let mut order = 1;
    for p in 2..=6 {
        let lo = if p == 2 {
            1
        } else {
            last_condition_of_order(p - 1) + 1
        };
        let hi = last_condition_of_order(p);
        let ok = (lo..=hi).all(|no| {
            let (lhs, rhs) = condition_sum(t, no);
            (lhs - rhs).abs() <= tol
        });
        if ok {
            order = p;
        } else {
            break;
        }
    }
    order
}

fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

fn otddirk4s2a() -> ButcherTableau {
    let r = sqrt(33.0);
    ButcherTableau::new(
        "OTDDIRK4s2a",
        vec![
            vec![(19.0 - 3.0 * r) / 192.0, 0.0],
            vec![23.0 * (1.0 + r) / 960.0, (9.0 - r) / 120.0],
        ],
        vec![(33.0 + r) / 132.0, (33.0 - r) / 132.0],
        vec![(9.0 - r) / 24.0, (9.0 + r) / 24.0],
        4,
    )
    .expect("built-in tableau")
}

fn otddirk4s2b() -> ButcherTableau {
    // alpha is the unique real root of 2 - 20a + 35a^2 - 35a^3 = 0, in its
    // radical closed form; the remaining entries follow the two-stage
    // fourth-order family formulas.
    let u = 34300.0 + 525.0 * sqrt(6699.0);
    let cbrt_u = u.cbrt();
    let alpha = 1.0 / 3.0 - (cbrt_u * cbrt_u - 875.0) / (105.0 * cbrt_u);
    let beta = (3.0 - 4.0 * alpha - 10.0 * alpha * alpha)
        / (40.0 * (1.0 - 3.0 * alpha) * (1.0 - 3.0 * alpha));
    let one_m3 = 1.0 - 3.0 * alpha;
    let c2 = (1.0 - 2.0 * alpha) / (2.0 * one_m3);
    ButcherTableau::new(
        "OTDDIRK4s2b",
        vec![
            vec![alpha * alpha / 2.0, 0.0],
            vec![
                beta,
                (1.0 - 2.0 * alpha) * (1.0 - 2.0 * alpha) / (8.0 * one_m3 * one_m3) - beta,
            ],
        ],
        vec![
            1.0 / (6.0 - 24.0 * alpha + 36.0 * alpha * alpha),
            one_m3 * one_m3 / (3.0 * (1.0 - 4.0 * alpha + 6.0 * alpha * alpha)),
        ],
        vec![alpha, c2],
        4,
    )
    .expect("built-in tableau")
}

fn tddirk5s2() -> ButcherTableau {
    let r = sqrt(6.0);
    ButcherTableau::new(
        "TDDIRK5s2",
        vec![
            vec![(11.0 - 4.0 * r) / 100.0, 0.0],
            vec![(2.0 + 3.0 * r) / 50.0, (7.0 - 2.0 * r) / 100.0],
        ],
        vec![(9.0 + r) / 36.0, (9.0 - r) / 36.0],
        vec![(4.0 - r) / 10.0, (4.0 + r) / 10.0],
        5,
    )
    .expect("built-in tableau")
}

fn otddirk5s3() -> ButcherTableau {
    let r = sqrt(5.0);
    ButcherTableau::new(
        "OTDDIRK5s3",
        vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0 / 10.0 - 6.0 * r / 175.0, 1.0 / 20.0 - 11.0 * r / 700.0, 0.0],
            vec![
                (20.0 + 19.0 * r) / 1050.0,
                17.0 * (5.0 + 3.0 * r) / 1050.0,
                (3.0 - r) / 60.0,
            ],
        ],
        vec![1.0 / 12.0, (5.0 + r) / 24.0, 5.0 / (6.0 * (5.0 + r))],
        vec![0.0, (5.0 - r) / 10.0, (5.0 + r) / 10.0],
        5,
    )
    .expect("built-in tableau")
}

/// Names of the built-in schemes, in registry order.
pub const BUILTIN_SCHEMES: [&str; 4] = ["OTDDIRK4s2a", "OTDDIRK4s2b", "TDDIRK5s2", "OTDDIRK5s3"];

/// Returns a built-in scheme by name, with coefficients evaluated from
/// their exact closed forms at full working precision.
pub fn get_scheme(name: &str) -> Result<ButcherTableau> {
    match name {
        "OTDDIRK4s2a" => Ok(otddirk4s2a()),
        "OTDDIRK4s2b" => Ok(otddirk4s2b()),
        "TDDIRK5s2" => Ok(tddirk5s2()),
        "OTDDIRK5s3" => Ok(otddirk5s3()),
        _ => Err(Error::UnknownScheme {
            name: name.to_string(),
            available: BUILTIN_SCHEMES.join(", "),
        }),
    }
}

/// Serialized tableau layout: `A` is given as full rows whose entries above
/// the diagonal must be exactly zero. Numbers are IEEE doubles in decimal
/// text.
#[derive(Debug, Serialize, Deserialize)]
struct TableauFile {
    name: String,
    order: u32,
    c: Vec<f64>,
    b: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
}

/// Parses a tableau from its JSON representation.
pub fn tableau_from_json(json: &str) -> Result<ButcherTableau> {
    let file: TableauFile = serde_json::from_str(json).map_err(|e| Error::Malformed {
        path: "<json>".to_string(),
        reason: e.to_string(),
    })?;
    ButcherTableau::new(file.name, file.a, file.b, file.c, file.order)
}

/// Renders a tableau in the JSON file format.
pub fn tableau_to_json(t: &ButcherTableau) -> String {
    let file = TableauFile {
        name: t.name().to_string(),
        order: t.claimed_order(),
        c: t.c().to_vec(),
        b: t.b().to_vec(),
        a: (0..t.stages())
            .map(|i| (0..t.stages()).map(|j| t.a(i, j)).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("tableau serializes")
}

/// Registry of named schemes: the four built-ins plus any tableaux loaded
/// from JSON files (e.g. externally published comparison schemes).
///
/// Tableaux are immutable once registered and can be shared freely across
/// threads.
#[derive(Debug, Clone)]
pub struct SchemeRegistry {
    schemes: BTreeMap<String, ButcherTableau>,
    order: Vec<String>,
}

impl SchemeRegistry {
    /// Registry preloaded with the built-in schemes.
    pub fn with_builtins() -> Self {
        let mut reg = SchemeRegistry {
            schemes: BTreeMap::new(),
            order: Vec::new(),
        };
        for name in BUILTIN_SCHEMES {
            reg.insert(get_scheme(name).expect("built-in"))
                .expect("built-ins are distinct");
        }
        reg
    }

    pub fn insert(&mut self, t: ButcherTableau) -> Result<()> {
        let name = t.name().to_string();
        if self.schemes.contains_key(&name) {
            return Err(Error::InvalidTableau {
                name,
                reason: "a scheme with this name is already registered".to_string(),
            });
        }
        self.order.push(name.clone());
        self.schemes.insert(name, t);
        Ok(())
    }

    /// Loads one tableau from a JSON file and registers it. Returns the
    /// registered name.
    pub fn load_json_file(&mut self, path: &Path) -> Result<String> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let t = tableau_from_json(&text).map_err(|e| match e {
            Error::Malformed { reason, .. } => Error::Malformed {
                path: path.display().to_string(),
                reason,
            },
            other => other,
        })?;
        let name = t.name().to_string();
        self.insert(t)?;
        Ok(name)
    }

    pub fn get(&self, name: &str) -> Result<&ButcherTableau> {
        self.schemes.get(name).ok_or_else(|| Error::UnknownScheme {
            name: name.to_string(),
            available: self.order.join(", "),
        })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Registered schemes in insertion order (built-ins first).
    pub fn iter(&self) -> impl Iterator<Item = &ButcherTableau> {
        self.order.iter().map(|n| &self.schemes[n])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_residual(rs: &[ConditionResidual]) -> f64 {
        rs.iter().map(|r| r.value.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn builtin_row_assumption_holds_at_round_off() {
        for name in BUILTIN_SCHEMES {
            let t = get_scheme(name).unwrap();
            let rs = row_assumption_residuals(&t);
            assert_eq!(rs.len(), t.stages());
            assert!(
                max_abs_residual(&rs) <= 1e-15,
                "{name}: row residuals {rs:?}"
            );
        }
    }

    #[test]
    fn one_stage_zero_tableau_has_zero_row_residual() {
        let t = ButcherTableau::new("zero1", vec![vec![0.0]], vec![0.0], vec![0.0], 1).unwrap();
        let rs = row_assumption_residuals(&t);
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].value, 0.0);
    }

    #[test]
    fn row_residual_is_linear_in_a11_perturbation() {
        let t = get_scheme("OTDDIRK4s2a").unwrap();
        let perturbed = ButcherTableau::new(
            "perturbed",
            vec![
                vec![t.a(0, 0) + 1e-3, 0.0],
                vec![t.a(1, 0), t.a(1, 1)],
            ],
            t.b().to_vec(),
            t.c().to_vec(),
            4,
        )
        .unwrap();
        let rs = row_assumption_residuals(&perturbed);
        assert!((rs[0].value - 1e-3).abs() < 1e-16);
    }

    #[test]
    fn fifth_order_schemes_satisfy_conditions_one_to_five() {
        for name in ["TDDIRK5s2", "OTDDIRK5s3"] {
            let t = get_scheme(name).unwrap();
            let rs = order_condition_residuals(&t, 5).unwrap();
            assert_eq!(rs.len(), 5);
            assert!(max_abs_residual(&rs) <= 1e-14, "{name}: {rs:?}");
        }
    }

    #[test]
    fn otddirk4s2a_is_fourth_order_but_not_fifth() {
        let t = get_scheme("OTDDIRK4s2a").unwrap();
        let rs = order_condition_residuals(&t, 5).unwrap();
        assert!(max_abs_residual(&rs[..3]) <= 1e-14);
        let beyond = rs[3].value.abs().max(rs[4].value.abs());
        assert!(beyond > 1e-6, "conditions 4-5 should fail, got {beyond:e}");
    }

    #[test]
    fn order_condition_range_is_validated() {
        let t = get_scheme("TDDIRK5s2").unwrap();
        assert!(matches!(
            order_condition_residuals(&t, 1),
            Err(Error::OrderOutOfRange(1))
        ));
        assert!(matches!(
            order_condition_residuals(&t, 7),
            Err(Error::OrderOutOfRange(7))
        ));
    }

    #[test]
    fn classify_order_matches_claims_on_builtins() {
        for name in BUILTIN_SCHEMES {
            let t = get_scheme(name).unwrap();
            assert_eq!(classify_order(&t, 1e-12), t.claimed_order(), "{name}");
        }
    }

    #[test]
    fn classify_order_is_one_when_weights_vanish() {
        // b = 0 leaves condition No.1 with residual -1/2.
        let t = ButcherTableau::new(
            "zero-b",
            vec![vec![0.0, 0.0], vec![0.1, 0.1]],
            vec![0.0, 0.0],
            vec![0.0, 0.6324555320336759],
            2,
        )
        .unwrap();
        assert_eq!(classify_order(&t, 1e-12), 1);
    }

    #[test]
    fn get_scheme_rejects_unknown_names_and_lists_available() {
        let err = get_scheme("RK4").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("RK4"));
        for name in BUILTIN_SCHEMES {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn otddirk4s2a_closed_forms() {
        let t = get_scheme("OTDDIRK4s2a").unwrap();
        let r = 33f64.sqrt();
        assert_eq!(t.c()[0], (9.0 - r) / 24.0);
        assert_eq!(t.c()[1], (9.0 + r) / 24.0);
        assert_eq!(t.b()[0], (33.0 + r) / 132.0);
        assert_eq!(t.b()[1], (33.0 - r) / 132.0);
        assert_eq!(t.a(0, 0), (19.0 - 3.0 * r) / 192.0);
        assert_eq!(t.a(1, 0), 23.0 * (1.0 + r) / 960.0);
        assert_eq!(t.a(1, 1), (9.0 - r) / 120.0);
    }

    #[test]
    fn tddirk5s2_closed_forms() {
        let t = get_scheme("TDDIRK5s2").unwrap();
        let r = 6f64.sqrt();
        assert_eq!(t.c()[0], (4.0 - r) / 10.0);
        assert_eq!(t.c()[1], (4.0 + r) / 10.0);
        assert_eq!(t.a(0, 0), (11.0 - 4.0 * r) / 100.0);
        assert_eq!(t.a(1, 0), (2.0 + 3.0 * r) / 50.0);
        assert_eq!(t.a(1, 1), (7.0 - 2.0 * r) / 100.0);
        assert_eq!(t.b()[0], (9.0 + r) / 36.0);
        assert_eq!(t.b()[1], (9.0 - r) / 36.0);
    }

    #[test]
    fn otddirk5s3_closed_forms() {
        let t = get_scheme("OTDDIRK5s3").unwrap();
        let r = 5f64.sqrt();
        assert_eq!(t.c(), &[0.0, (5.0 - r) / 10.0, (5.0 + r) / 10.0]);
        assert_eq!(t.b(), &[1.0 / 12.0, (5.0 + r) / 24.0, 5.0 / (6.0 * (5.0 + r))]);
        assert_eq!(t.a(1, 0), 0.1 - 6.0 * r / 175.0);
        assert_eq!(t.a(1, 1), 0.05 - 11.0 * r / 700.0);
        assert_eq!(t.a(2, 0), (20.0 + 19.0 * r) / 1050.0);
        assert_eq!(t.a(2, 1), 17.0 * (5.0 + 3.0 * r) / 1050.0);
        assert_eq!(t.a(2, 2), (3.0 - r) / 60.0);
    }

    #[test]
    fn tableau_json_round_trip_preserves_bits() {
        for name in BUILTIN_SCHEMES {
            let t = get_scheme(name).unwrap();
            let back = tableau_from_json(&tableau_to_json(&t)).unwrap();
            assert_eq!(t.max_coefficient_difference(&back), 0.0, "{name}");
        }
    }

    #[test]
    fn tableau_new_rejects_upper_triangular_and_bad_dims() {
        let upper = ButcherTableau::new(
            "bad",
            vec![vec![0.0, 0.5], vec![0.0, 0.0]],
            vec![0.5, 0.0],
            vec![0.0, 1.0],
            2,
        );
        assert!(matches!(upper, Err(Error::InvalidTableau { .. })));
        let dims = ButcherTableau::new("bad", vec![vec![0.0]], vec![0.5, 0.0], vec![0.0], 2);
        assert!(matches!(dims, Err(Error::InvalidTableau { .. })));
        let nan = ButcherTableau::new("bad", vec![vec![f64::NAN]], vec![0.5], vec![0.0], 2);
        assert!(matches!(nan, Err(Error::InvalidTableau { .. })));
    }

    #[test]
    fn registry_lists_builtins_and_accepts_external_tableaux() {
        let mut reg = SchemeRegistry::with_builtins();
        assert_eq!(reg.len(), 4);
        let json = r#"{
            "name": "midpointish",
            "order": 2,
            "c": [0.5],
            "b": [0.5],
            "A": [[0.125]]
        }"#;
        reg.insert(tableau_from_json(json).unwrap()).unwrap();
        assert_eq!(reg.len(), 5);
        assert!(reg.get("midpointish").is_ok());
        let err = reg.get("nope").unwrap_err().to_string();
        assert!(err.contains("midpointish"));
    }

    #[test]
    fn identity_stage_reorder_is_a_no_op() {
        // The only stage permutation preserving lower-triangular structure is
        // the identity; residuals must be unchanged by a rebuild.
        let t = get_scheme("OTDDIRK5s3").unwrap();
        let rebuilt = ButcherTableau::new(
            t.name(),
            (0..3).map(|i| (0..3).map(|j| t.a(i, j)).collect()).collect(),
            t.b().to_vec(),
            t.c().to_vec(),
            t.claimed_order(),
        )
        .unwrap();
        let r1 = order_condition_residuals(&t, 5).unwrap();
        let r2 = order_condition_residuals(&rebuilt, 5).unwrap();
        for (a, b) in r1.iter().zip(&r2) {
            assert_eq!(a.value, b.value);
        }
    }
}
