//! The record-matching language: include/exclude clauses over record columns.
//!
//! A [`FilterSet`] is the compiled conjunction of all clauses: a record is
//! accepted iff every include clause matches and no exclude clause matches.
//! Missing columns and failed numeric coercions fail closed for include
//! clauses and open for exclude clauses, so malformed data never leaks past
//! an include gate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::PropertyValue;
use crate::reader::Record;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FilterCompileError {
    #[error("filter on column '{column}': operator '{op}' requires a list value")]
    ListValueRequired { column: String, op: String },
    #[error("filter on column '{column}': operator '{op}' requires a scalar value")]
    ScalarValueRequired { column: String, op: String },
    #[error("filter on column '{column}': operator '{op}' requires a numeric value")]
    NumericValueRequired { column: String, op: String },
}

/// Whether a clause gates records in or out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    Include,
    Exclude,
}

/// The eight comparison operators of the matching language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    NotIn,
}

impl FilterOp {
    pub fn is_ordering(self) -> bool {
        matches!(self, FilterOp::Lt | FilterOp::Le | FilterOp::Gt | FilterOp::Ge)
    }

    pub fn is_membership(self) -> bool {
        matches!(self, FilterOp::In | FilterOp::NotIn)
    }

    fn name(self) -> &'static str {
        match self {
            FilterOp::Eq => "eq",
            FilterOp::Ne => "ne",
            FilterOp::Lt => "lt",
            FilterOp::Le => "le",
            FilterOp::Gt => "gt",
            FilterOp::Ge => "ge",
            FilterOp::In => "in",
            FilterOp::NotIn => "not_in",
        }
    }
}

/// One declarative clause as it appears in configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub column: String,
    #[serde(rename = "inclusion")]
    pub mode: FilterMode,
    #[serde(rename = "filter_code")]
    pub op: FilterOp,
    pub value: PropertyValue,
}

/// The comparison payload after compile-time type checking.
#[derive(Debug, Clone, PartialEq)]
enum CompiledValue {
    Text(String),
    Number(f64),
    Boolean(bool),
    List(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
struct CompiledFilter {
    column: String,
    mode: FilterMode,
    op: FilterOp,
    value: CompiledValue,
}

/// An immutable, executable set of clauses; evaluation order matches
/// declaration order. Safe to share across threads.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterSet {
    filters: Vec<CompiledFilter>,
}

/// Validates operator/value compatibility and produces an executable set.
pub fn compile_filters(specs: &[FilterSpec]) -> Result<FilterSet, FilterCompileError> {
    let mut filters = Vec::with_capacity(specs.len());
    for spec in specs {
        let value = compile_value(spec)?;
        filters.push(CompiledFilter {
            column: spec.column.clone(),
            mode: spec.mode,
            op: spec.op,
            value,
        });
    }
    Ok(FilterSet { filters })
}

fn compile_value(spec: &FilterSpec) -> Result<CompiledValue, FilterCompileError> {
    let op = spec.op.name().to_string();
    let column = spec.column.clone();
    if spec.op.is_membership() {
        return match &spec.value {
            PropertyValue::TextList(items) => Ok(CompiledValue::List(items.clone())),
            _ => Err(FilterCompileError::ListValueRequired { column, op }),
        };
    }
    if spec.op.is_ordering() {
        return match &spec.value {
            PropertyValue::Integer(i) => Ok(CompiledValue::Number(*i as f64)),
            PropertyValue::Decimal(d) => Ok(CompiledValue::Number(*d)),
            _ => Err(FilterCompileError::NumericValueRequired { column, op }),
        };
    }
    // eq / ne accept any scalar; the value's type picks the comparison.
    match &spec.value {
        PropertyValue::Text(s) => Ok(CompiledValue::Text(s.clone())),
        PropertyValue::Integer(i) => Ok(CompiledValue::Number(*i as f64)),
        PropertyValue::Decimal(d) => Ok(CompiledValue::Number(*d)),
        PropertyValue::Boolean(b) => Ok(CompiledValue::Boolean(*b)),
        PropertyValue::TextList(_) => Err(FilterCompileError::ScalarValueRequired { column, op }),
    }
}

impl FilterSet {
    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    /// Evaluates the conjunction over all clauses. Pure and deterministic.
    pub fn accept(&self, record: &Record) -> bool {
        for filter in &self.filters {
            let matched = filter.matches(record);
            match filter.mode {
                FilterMode::Include if !matched => return false,
                FilterMode::Exclude if matched => return false,
                _ => {}
            }
        }
        true
    }
}

impl CompiledFilter {
    /// Raw predicate: does the record's column satisfy the comparison?
    /// Missing columns and coercion failures yield `false`.
    fn matches(&self, record: &Record) -> bool {
        let Some(value) = record.get(&self.column) else {
            return false;
        };
        match (&self.value, self.op) {
            (CompiledValue::List(items), FilterOp::In) => {
                scalar_text(value).is_some_and(|s| items.contains(&s))
            }
            (CompiledValue::List(items), FilterOp::NotIn) => {
                scalar_text(value).is_some_and(|s| !items.contains(&s))
            }
            (CompiledValue::Number(n), op) => {
                let Some(v) = value.as_number() else {
                    return false;
                };
                match op {
                    FilterOp::Eq => v == *n,
                    FilterOp::Ne => v != *n,
                    FilterOp::Lt => v < *n,
                    FilterOp::Le => v <= *n,
                    FilterOp::Gt => v > *n,
                    FilterOp::Ge => v >= *n,
                    _ => false,
                }
            }
            (CompiledValue::Text(t), FilterOp::Eq) => {
                scalar_text(value).is_some_and(|s| s == *t)
            }
            (CompiledValue::Text(t), FilterOp::Ne) => {
                scalar_text(value).is_some_and(|s| s != *t)
            }
            (CompiledValue::Boolean(b), op) => {
                let Some(v) = as_bool(value) else {
                    return false;
                };
                match op {
                    FilterOp::Eq => v == *b,
                    FilterOp::Ne => v != *b,
                    _ => false,
                }
            }
            _ => false,
        }
    }
}

/// Text view of a scalar record value; lists are not comparable.
fn scalar_text(value: &PropertyValue) -> Option<String> {
    match value {
        PropertyValue::TextList(_) => None,
        other => Some(other.render_cell()),
    }
}

fn as_bool(value: &PropertyValue) -> Option<bool> {
    match value {
        PropertyValue::Boolean(b) => Some(*b),
        PropertyValue::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        },
        _ => None,
    }
}
