//! Factorizable (local-realistic) probability models over a discretized
//! hidden-variable space.
//!
//! A model is a finite set of cells with weights, plus one response table
//! per side giving the probability of the "yes" result for each setting in
//! each cell. Every measurable probability is a finite sum over cells.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::ProbabilitySet;

/// Weights must sum to one within this tolerance for constructed models.
pub const MODEL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub fn number(self) -> u8 {
        match self {
            Side::One => 1,
            Side::Two => 2,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// JSON interchange form of a model. Rows of `table` are cells, columns are settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub cells: Vec<String>,
    pub weights: Vec<f64>,
    pub side1: TableDocument,
    pub side2: TableDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDocument {
    pub settings: Vec<String>,
    pub table: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    Negativity,
    Normalization,
    Range,
    Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setting: Option<String>,
    /// Offending value; for normalization this is the deficit `1 - sum(weights)`.
    pub value: f64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks weight positivity, normalization, response ranges and table shapes.
pub fn validate_model(doc: &ModelDocument) -> ValidationReport {
    let mut violations = Vec::new();

    if doc.weights.len() != doc.cells.len() {
        violations.push(Violation {
            kind: ViolationKind::Shape,
            cell: None,
            side: None,
            setting: None,
            value: doc.weights.len() as f64,
            message: format!(
                "{} weights for {} cells",
                doc.weights.len(),
                doc.cells.len()
            ),
        });
    }

    for (cell, &w) in doc.cells.iter().zip(&doc.weights) {
        if w < 0.0 || !w.is_finite() {
            violations.push(Violation {
                kind: ViolationKind::Negativity,
                cell: Some(cell.clone()),
                side: None,
                setting: None,
                value: w,
                message: format!("weight of cell {cell} is {w}"),
            });
        }
    }

    let total: f64 = doc.weights.iter().sum();
    let deficit = 1.0 - total;
    if deficit.abs() > MODEL_TOLERANCE {
        violations.push(Violation {
            kind: ViolationKind::Normalization,
            cell: None,
            side: None,
            setting: None,
            value: deficit,
            message: format!("weights sum to {total}, deficit {deficit:.3e}"),
        });
    }

    for (side, table) in [(1u8, &doc.side1), (2u8, &doc.side2)] {
        if table.table.len() != doc.cells.len() {
            violations.push(Violation {
                kind: ViolationKind::Shape,
                cell: None,
                side: Some(side),
                setting: None,
                value: table.table.len() as f64,
                message: format!(
                    "side {side} table has {} rows for {} cells",
                    table.table.len(),
                    doc.cells.len()
                ),
            });
        }
        for (row_idx, row) in table.table.iter().enumerate() {
            let cell = doc.cells.get(row_idx).cloned();
            if row.len() != table.settings.len() {
                violations.push(Violation {
                    kind: ViolationKind::Shape,
                    cell: cell.clone(),
                    side: Some(side),
                    setting: None,
                    value: row.len() as f64,
                    message: format!(
                        "side {side} row {row_idx} has {} entries for {} settings",
                        row.len(),
                        table.settings.len()
                    ),
                });
            }
            for (setting, &v) in table.settings.iter().zip(row) {
                if !(0.0..=1.0).contains(&v) {
                    violations.push(Violation {
                        kind: ViolationKind::Range,
                        cell: cell.clone(),
                        side: Some(side),
                        setting: Some(setting.clone()),
                        value: v,
                        message: format!(
                            "response {v} at (cell {}, side {side}, setting {setting}) outside [0, 1]",
                            cell.as_deref().unwrap_or("?")
                        ),
                    });
                }
            }
        }
    }

    ValidationReport { violations }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiddenVariableSpace {
    cells: Vec<String>,
    weights: Vec<f64>,
}

impl HiddenVariableSpace {
    pub fn cells(&self) -> &[String] {
        &self.cells
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Detection probabilities for one side. The value at (cell, setting) does
/// not depend on anything measured on the other side.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseTable {
    side: Side,
    settings: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl ResponseTable {
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn settings(&self) -> &[String] {
        &self.settings
    }

    pub fn value(&self, cell: usize, setting: usize) -> f64 {
        self.values[cell][setting]
    }

    fn column(&self, setting: &str) -> Result<usize> {
        self.settings
            .iter()
            .position(|s| s == setting)
            .ok_or_else(|| Error::UnknownSetting {
                side: self.side.number(),
                setting: setting.to_string(),
            })
    }
}

/// A validated local-realistic model.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizableModel {
    space: HiddenVariableSpace,
    response1: ResponseTable,
    response2: ResponseTable,
}

impl FactorizableModel {
    pub fn new(doc: ModelDocument) -> Result<Self> {
        let report = validate_model(&doc);
        if let Some(first) = report.violations.first() {
            return Err(Error::InvalidModel(format!(
                "{} ({} violation(s) in total)",
                first.message,
                report.violations.len()
            )));
        }
        let ModelDocument {
            cells,
            weights,
            side1,
            side2,
        } = doc;
        Ok(Self {
            space: HiddenVariableSpace { cells, weights },
            response1: ResponseTable {
                side: Side::One,
                settings: side1.settings,
                values: side1.table,
            },
            response2: ResponseTable {
                side: Side::Two,
                settings: side2.settings,
                values: side2.table,
            },
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            cells: self.space.cells.clone(),
            weights: self.space.weights.clone(),
            side1: TableDocument {
                settings: self.response1.settings.clone(),
                table: self.response1.values.clone(),
            },
            side2: TableDocument {
                settings: self.response2.settings.clone(),
                table: self.response2.values.clone(),
            },
        }
    }

    pub fn space(&self) -> &HiddenVariableSpace {
        &self.space
    }

    pub fn response(&self, side: Side) -> &ResponseTable {
        match side {
            Side::One => &self.response1,
            Side::Two => &self.response2,
        }
    }

    /// `p(X) = sum_cells w * P_side(cell, X)`.
    pub fn marginal_probability(&self, side: Side, setting: &str) -> Result<f64> {
        let table = self.response(side);
        let col = table.column(setting)?;
        Ok(self
            .space
            .weights
            .iter()
            .zip(&table.values)
            .map(|(w, row)| w * row[col])
            .sum())
    }

    /// `p(X, Y) = sum_cells w * P_1(cell, X) * P_2(cell, Y)`.
    pub fn joint_probability(&self, setting1: &str, setting2: &str) -> Result<f64> {
        let c1 = self.response1.column(setting1)?;
        let c2 = self.response2.column(setting2)?;
        Ok(self
            .space
            .weights
            .iter()
            .zip(self.response1.values.iter().zip(&self.response2.values))
            .map(|(w, (r1, r2))| w * r1[c1] * r2[c2])
            .sum())
    }

    /// Joint distribution of the yes/no results of all four observables, two
    /// per side, built cell by cell as a product of independent local results.
    pub fn formal_joint_distribution(
        &self,
        a: &str,
        c: &str,
        b: &str,
        d: &str,
    ) -> Result<FourOutcomeJoint> {
        let ca = self.response1.column(a)?;
        let cc = self.response1.column(c)?;
        let cb = self.response2.column(b)?;
        let cd = self.response2.column(d)?;
        let mut probabilities = [0.0; 16];
        for (cell, &w) in self.space.weights.iter().enumerate() {
            let r1 = &self.response1.values[cell];
            let r2 = &self.response2.values[cell];
            let yes = [r1[ca], r1[cc], r2[cb], r2[cd]];
            for (idx, p) in probabilities.iter_mut().enumerate() {
                let mut term = w;
                for (k, &y) in yes.iter().enumerate() {
                    term *= if FourOutcomeJoint::bit(idx, k) {
                        y
                    } else {
                        1.0 - y
                    };
                }
                *p += term;
            }
        }
        Ok(FourOutcomeJoint {
            observables: [a.to_string(), c.to_string(), b.to_string(), d.to_string()],
            probabilities,
        })
    }

    /// The six measurable probabilities entering the CH inequality.
    pub fn probability_set(&self, a: &str, c: &str, b: &str, d: &str) -> Result<ProbabilitySet> {
        ProbabilitySet::new(
            self.marginal_probability(Side::One, a)?,
            self.marginal_probability(Side::Two, b)?,
            self.joint_probability(a, b)?,
            self.joint_probability(a, d)?,
            self.joint_probability(c, b)?,
            self.joint_probability(c, d)?,
        )
    }
}

/// Probabilities of the 16 yes/no tuples `(a, c, b, d)`.
///
/// Index bit 3 is `a`, bit 2 `c`, bit 1 `b`, bit 0 `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourOutcomeJoint {
    pub observables: [String; 4],
    pub probabilities: [f64; 16],
}

impl FourOutcomeJoint {
    /// Whether observable `k` (0 = A, 1 = C, 2 = B, 3 = D) reads "yes" in tuple `idx`.
    pub fn bit(idx: usize, k: usize) -> bool {
        (idx >> (3 - k)) & 1 == 1
    }

    pub fn probability(&self, a: bool, c: bool, b: bool, d: bool) -> f64 {
        let idx = (a as usize) << 3 | (c as usize) << 2 | (b as usize) << 1 | d as usize;
        self.probabilities[idx]
    }

    /// Probability that observable `k` reads "yes".
    pub fn single(&self, k: usize) -> f64 {
        (0..16)
            .filter(|&i| Self::bit(i, k))
            .map(|i| self.probabilities[i])
            .sum()
    }

    /// Probability that observables `k` and `l` both read "yes".
    pub fn pair(&self, k: usize, l: usize) -> f64 {
        (0..16)
            .filter(|&i| Self::bit(i, k) && Self::bit(i, l))
            .map(|i| self.probabilities[i])
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}
