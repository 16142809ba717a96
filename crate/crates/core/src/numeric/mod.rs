//! Numerical claim verification: a closed taxonomy of arithmetic claims,
//! grounded extraction from text, and exact rational evaluation.

mod evaluate;
mod exact;
mod extract;

pub use evaluate::{evaluate, DEFAULT_TOLERANCE};
pub use exact::Exact;
pub use extract::{extract_claims, ground_candidates, has_numeric_assertion, numbers_in, Extraction};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("ill-typed numeric claim: {0}")]
    IllTyped(String),
    #[error("tolerance must be finite and non-negative, got {0}")]
    InvalidTolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    Relation,
    PercentageOf,
    Sum,
    Difference,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelationOp {
    #[serde(rename = "=", alias = "==")]
    Eq,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=", alias = "≤")]
    Le,
    #[serde(rename = ">=", alias = "≥")]
    Ge,
}

impl fmt::Display for RelationOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationOp::Eq => "=",
            RelationOp::Lt => "<",
            RelationOp::Gt => ">",
            RelationOp::Le => "<=",
            RelationOp::Ge => ">=",
        })
    }
}

/// An exact value with an optional unit string (`"%"` for percentages).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: Exact,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl Quantity {
    pub fn new(value: Exact, unit: Option<&str>) -> Quantity {
        Quantity {
            value,
            unit: unit.map(str::to_string),
        }
    }

    pub fn plain(value: Exact) -> Quantity {
        Quantity { value, unit: None }
    }

    fn is_percent(&self) -> bool {
        self.unit.as_deref() == Some("%")
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit.as_deref() {
            Some("%") => write!(f, "{}%", self.value),
            Some(u) => write!(f, "{} {u}", self.value),
            None => write!(f, "{}", self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumericClaim {
    pub kind: ClaimKind,
    pub operands: Vec<Quantity>,
    /// Absent for `relation` claims, required otherwise.
    pub asserted_value: Option<Quantity>,
    pub relation_op: Option<RelationOp>,
    /// Character range `[start, end)` in the source text.
    pub source_span: [usize; 2],
}

fn units_agree<'a>(qs: impl IntoIterator<Item = &'a Quantity>) -> Result<(), NumericError> {
    let units: BTreeSet<&str> = qs.into_iter().filter_map(|q| q.unit.as_deref()).collect();
    if units.len() > 1 {
        let list: Vec<&str> = units.into_iter().collect();
        return Err(NumericError::IllTyped(format!(
            "mismatched units {}",
            list.join(" vs ")
        )));
    }
    Ok(())
}

impl NumericClaim {
    /// Operand count, relation operator and unit consistency per kind.
    pub fn check_well_typed(&self) -> Result<(), NumericError> {
        let ill = |m: &str| Err(NumericError::IllTyped(m.to_string()));
        let n = self.operands.len();
        match self.kind {
            ClaimKind::Relation => {
                if n != 2 {
                    return ill("relation needs exactly 2 operands");
                }
                if self.relation_op.is_none() {
                    return ill("relation needs a relation_op");
                }
                if self.asserted_value.is_some() {
                    return ill("relation carries no asserted value");
                }
                units_agree(&self.operands)
            }
            kind => {
                if self.relation_op.is_some() {
                    return ill("relation_op is only valid for relation claims");
                }
                let Some(asserted) = &self.asserted_value else {
                    return ill("missing asserted value");
                };
                match kind {
                    ClaimKind::Sum | ClaimKind::Difference => {
                        if n < 2 {
                            return ill("sum/difference needs at least 2 operands");
                        }
                        units_agree(self.operands.iter().chain([asserted]))
                    }
                    ClaimKind::PercentageOf => {
                        if n != 2 {
                            return ill("percentage_of needs [percent, base]");
                        }
                        if self.operands[0].unit.as_deref().is_some_and(|u| u != "%") {
                            return ill("percentage_of first operand must be a percentage");
                        }
                        units_agree([&self.operands[1], asserted])
                    }
                    ClaimKind::Ratio => {
                        if n != 2 {
                            return ill("ratio needs [numerator, denominator]");
                        }
                        if asserted.unit.as_deref().is_some_and(|u| u != "%") {
                            return ill("ratio result must be unitless or a percentage");
                        }
                        units_agree(&self.operands)
                    }
                    ClaimKind::Relation => unreachable!(),
                }
            }
        }
    }
}

/// Outcome of evaluating one claim. `holds` is absent when the computation
/// is ill-defined (division by zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericVerdict {
    pub claim: NumericClaim,
    pub computed_value: Option<Exact>,
    pub holds: Option<bool>,
    pub tolerance_used: f64,
    pub explanation: String,
}
