//! Property-graph model: CURIEs, property values, nodes, edges, and schema
//! validation.
//!
//! Everything in here is immutable after construction and free of I/O, so
//! values can be shared across threads and validation stays a pure function.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Separator reserved for multivalued cells in tabular output.
pub const MULTIVALUE_SEPARATOR: char = '|';

/// Errors produced while constructing model values.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed CURIE {raw:?}: {reason}")]
    MalformedCurie { raw: String, reason: String },
    #[error("invalid list value {value:?}: {reason}")]
    InvalidListValue { value: String, reason: String },
    #[error("non-finite decimal value")]
    NonFiniteDecimal,
    #[error("failed to read schema file: {0}")]
    SchemaIo(String),
    #[error("failed to parse schema file: {0}")]
    SchemaParse(String),
}

/// A compact identifier of the form `prefix:local_id`.
///
/// The prefix must match `[A-Za-z_][A-Za-z0-9_.-]*`; the local part is any
/// nonempty string without whitespace. The original case is preserved.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Curie {
    prefix: String,
    local_id: String,
}

impl Curie {
    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn local_id(&self) -> &str {
        &self.local_id
    }

    /// Renders the `prefix:local_id` form.
    pub fn render(&self) -> String {
        format!("{}:{}", self.prefix, self.local_id)
    }
}

impl fmt::Display for Curie {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix, self.local_id)
    }
}

impl FromStr for Curie {
    type Err = ModelError;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        parse_curie(raw)
    }
}

impl Serialize for Curie {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Curie {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        parse_curie(&raw).map_err(de::Error::custom)
    }
}

fn valid_prefix(prefix: &str) -> bool {
    let mut chars = prefix.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

/// Parses a raw string into a [`Curie`], splitting at the first colon.
pub fn parse_curie(raw: &str) -> Result<Curie, ModelError> {
    let err = |reason: &str| ModelError::MalformedCurie {
        raw: raw.to_string(),
        reason: reason.to_string(),
    };
    let (prefix, local_id) = raw.split_once(':').ok_or_else(|| err("missing colon"))?;
    if prefix.is_empty() {
        return Err(err("empty prefix"));
    }
    if local_id.is_empty() {
        return Err(err("empty local id"));
    }
    if !valid_prefix(prefix) {
        return Err(err("prefix must match [A-Za-z_][A-Za-z0-9_.-]*"));
    }
    if local_id.chars().any(char::is_whitespace) {
        return Err(err("local id contains whitespace"));
    }
    Ok(Curie {
        prefix: prefix.to_string(),
        local_id: local_id.to_string(),
    })
}

/// A single field value: scalar text, integer, decimal, boolean, or a list
/// of text values.
#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue {
    Text(String),
    Integer(i64),
    Decimal(f64),
    Boolean(bool),
    TextList(Vec<String>),
}

impl PropertyValue {
    /// Builds a list value, rejecting empty elements and elements containing
    /// the reserved multivalue separator.
    pub fn text_list<I, S>(items: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Vec::new();
        for item in items {
            let item = item.into();
            if item.is_empty() {
                return Err(ModelError::InvalidListValue {
                    value: item,
                    reason: "empty list element".to_string(),
                });
            }
            if item.contains(MULTIVALUE_SEPARATOR) {
                return Err(ModelError::InvalidListValue {
                    value: item,
                    reason: "list element contains reserved '|'".to_string(),
                });
            }
            out.push(item);
        }
        Ok(PropertyValue::TextList(out))
    }

    /// Builds a decimal value, rejecting NaN and infinities.
    pub fn decimal(value: f64) -> Result<Self, ModelError> {
        if !value.is_finite() {
            return Err(ModelError::NonFiniteDecimal);
        }
        Ok(PropertyValue::Decimal(value))
    }

    pub fn text(value: impl Into<String>) -> Self {
        PropertyValue::Text(value.into())
    }

    /// Renders the value the way a tabular cell would hold it: lists joined
    /// with `|`, booleans as `true`/`false`.
    pub fn render_cell(&self) -> String {
        match self {
            PropertyValue::Text(s) => s.clone(),
            PropertyValue::Integer(i) => i.to_string(),
            PropertyValue::Decimal(d) => d.to_string(),
            PropertyValue::Boolean(b) => b.to_string(),
            PropertyValue::TextList(items) => items.join("|"),
        }
    }

    /// True for absent-like values: empty text or an empty list.
    pub fn is_empty_value(&self) -> bool {
        match self {
            PropertyValue::Text(s) => s.is_empty(),
            PropertyValue::TextList(items) => items.is_empty(),
            _ => false,
        }
    }

    /// Numeric view used by filters; `None` when the value is not a number
    /// and not numeric-looking text.
    pub fn as_number(&self) -> Option<f64> {
        match self {
            PropertyValue::Integer(i) => Some(*i as f64),
            PropertyValue::Decimal(d) => Some(*d),
            PropertyValue::Text(s) => s.trim().parse::<f64>().ok().filter(|v| v.is_finite()),
            _ => None,
        }
    }
}

impl Serialize for PropertyValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            PropertyValue::Text(s) => serializer.serialize_str(s),
            PropertyValue::Integer(i) => serializer.serialize_i64(*i),
            PropertyValue::Decimal(d) => serializer.serialize_f64(*d),
            PropertyValue::Boolean(b) => serializer.serialize_bool(*b),
            PropertyValue::TextList(items) => {
                let mut seq = serializer.serialize_seq(Some(items.len()))?;
                for item in items {
                    seq.serialize_element(item)?;
                }
                seq.end()
            }
        }
    }
}

struct PropertyValueVisitor;

impl<'de> Visitor<'de> for PropertyValueVisitor {
    type Value = PropertyValue;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a string, number, boolean, or list of strings")
    }

    fn visit_bool<E: de::Error>(self, v: bool) -> Result<Self::Value, E> {
        Ok(PropertyValue::Boolean(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
        Ok(PropertyValue::Integer(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
        i64::try_from(v)
            .map(PropertyValue::Integer)
            .map_err(|_| E::custom("integer out of range"))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
        PropertyValue::decimal(v).map_err(E::custom)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
        Ok(PropertyValue::Text(v.to_string()))
    }

    fn visit_string<E: de::Error>(self, v: String) -> Result<Self::Value, E> {
        Ok(PropertyValue::Text(v))
    }

    fn visit_seq<A: de::SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
        let mut items: Vec<String> = Vec::new();
        while let Some(item) = seq.next_element::<String>()? {
            items.push(item);
        }
        PropertyValue::text_list(items).map_err(de::Error::custom)
    }
}

impl<'de> Deserialize<'de> for PropertyValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(PropertyValueVisitor)
    }
}

/// Column names a node row always carries, in output order.
pub const NODE_CORE_COLUMNS: [&str; 5] = ["id", "category", "name", "description", "provided_by"];

/// Column names an edge row always carries, in output order.
pub const EDGE_CORE_COLUMNS: [&str; 6] = [
    "id",
    "subject",
    "predicate",
    "object",
    "category",
    "knowledge_source",
];

/// A graph entity. `provided_by` and `properties` may be empty; empty means
/// absent on serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct KgNode {
    pub id: Curie,
    pub category: Vec<Curie>,
    pub name: Option<String>,
    pub description: Option<String>,
    pub provided_by: Vec<String>,
    pub properties: IndexMap<String, PropertyValue>,
}

impl KgNode {
    pub fn new(id: Curie, category: Vec<Curie>) -> Self {
        KgNode {
            id,
            category,
            name: None,
            description: None,
            provided_by: Vec::new(),
            properties: IndexMap::new(),
        }
    }
}

/// An association between two entities, with optional qualifiers.
///
/// `id` is a deterministic content hash over subject/predicate/object and the
/// qualifiers (see [`edge_identity`]); leave it empty to have the writer fill
/// it in at write time.
#[derive(Debug, Clone, PartialEq)]
pub struct KgEdge {
    pub id: String,
    pub subject: Curie,
    pub predicate: Curie,
    pub object: Curie,
    pub category: Vec<Curie>,
    pub qualifiers: IndexMap<String, PropertyValue>,
    pub knowledge_source: Option<String>,
    pub properties: IndexMap<String, PropertyValue>,
}

impl KgEdge {
    pub fn new(subject: Curie, predicate: Curie, object: Curie) -> Self {
        KgEdge {
            id: String::new(),
            subject,
            predicate,
            object,
            category: Vec::new(),
            qualifiers: IndexMap::new(),
            knowledge_source: None,
            properties: IndexMap::new(),
        }
    }
}

/// Either kind of graph item; what a transform hands to the write sink.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphItem {
    Node(KgNode),
    Edge(KgEdge),
}

impl From<KgNode> for GraphItem {
    fn from(node: KgNode) -> Self {
        GraphItem::Node(node)
    }
}

impl From<KgEdge> for GraphItem {
    fn from(edge: KgEdge) -> Self {
        GraphItem::Edge(edge)
    }
}

/// Computes the deterministic edge id: the lowercase-hex SHA-256 digest of
/// `subject TAB predicate TAB object TAB qualifiers`, where qualifiers are
/// `name=value` pairs sorted by name and joined with `;`, values in cell form.
pub fn edge_identity(edge: &KgEdge) -> String {
    let mut quals: Vec<(&str, String)> = edge
        .qualifiers
        .iter()
        .map(|(k, v)| (k.as_str(), v.render_cell()))
        .collect();
    quals.sort_by(|a, b| a.0.cmp(b.0));
    let qual_text = quals
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";");
    let canonical = format!(
        "{}\t{}\t{}\t{}",
        edge.subject.render(),
        edge.predicate.render(),
        edge.object.render(),
        qual_text
    );
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// How serious a validation finding is. Strict schemas escalate membership
/// findings to errors; non-strict schemas keep them as warnings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub severity: Severity,
    pub message: String,
}

/// Zero or more validation findings. Violations are data, not exceptions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn error(&mut self, message: impl Into<String>) {
        self.violations.push(Violation {
            severity: Severity::Error,
            message: message.into(),
        });
    }

    pub fn warning(&mut self, message: impl Into<String>) {
        self.violations.push(Violation {
            severity: Severity::Warning,
            message: message.into(),
        });
    }

    pub fn push(&mut self, severity: Severity, message: impl Into<String>) {
        self.violations.push(Violation {
            severity,
            message: message.into(),
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    /// True when the report carries no error-severity findings; warnings do
    /// not block.
    pub fn is_clean(&self) -> bool {
        !self
            .violations
            .iter()
            .any(|v| v.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            let tag = match v.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "{tag}: {}", v.message)?;
        }
        Ok(())
    }
}

/// The configurable slice of the target schema that artifacts are validated
/// against: allowed category and predicate CURIEs plus a strictness switch.
///
/// Empty allowed sets mean "no membership restriction"; the prefix checks
/// always apply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemaSubset {
    pub categories: BTreeSet<Curie>,
    pub predicates: BTreeSet<Curie>,
    pub strict: bool,
    pub category_prefix: String,
    pub predicate_prefix: String,
}

impl Default for SchemaSubset {
    fn default() -> Self {
        SchemaSubset {
            categories: BTreeSet::new(),
            predicates: BTreeSet::new(),
            strict: false,
            category_prefix: "biolink".to_string(),
            predicate_prefix: "biolink".to_string(),
        }
    }
}

impl SchemaSubset {
    /// Loads a schema subset from a YAML file with `categories:`,
    /// `predicates:`, and `strict:` keys.
    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::SchemaIo(format!("{}: {e}", path.display())))?;
        serde_yaml::from_str(&text)
            .map_err(|e| ModelError::SchemaParse(format!("{}: {e}", path.display())))
    }

    fn membership_severity(&self) -> Severity {
        if self.strict {
            Severity::Error
        } else {
            Severity::Warning
        }
    }
}

/// Shared handle to a schema; cheap to clone into contexts and writers.
pub type SharedSchema = Arc<SchemaSubset>;

/// Checks a node against its invariants and the schema subset. Pure: the same
/// input always yields the same report.
pub fn validate_node(node: &KgNode, schema: &SchemaSubset) -> ValidationReport {
    let mut report = ValidationReport::new();
    if node.category.is_empty() {
        report.error(format!("node {}: missing category", node.id));
    }
    for category in &node.category {
        if category.prefix() != schema.category_prefix {
            report.error(format!(
                "node {}: category {category} does not use prefix '{}'",
                node.id, schema.category_prefix
            ));
        } else if !schema.categories.is_empty() && !schema.categories.contains(category) {
            report.push(
                schema.membership_severity(),
                format!("node {}: category {category} not in schema", node.id),
            );
        }
    }
    for name in node.properties.keys() {
        if NODE_CORE_COLUMNS.contains(&name.as_str()) {
            report.error(format!(
                "node {}: property name '{name}' collides with a core field",
                node.id
            ));
        }
    }
    report
}

/// Checks an edge against its invariants and the schema subset.
pub fn validate_edge(edge: &KgEdge, schema: &SchemaSubset) -> ValidationReport {
    let mut report = ValidationReport::new();
    if edge.predicate.prefix() != schema.predicate_prefix {
        report.error(format!(
            "edge {}-[{}]->{}: predicate does not use prefix '{}'",
            edge.subject, edge.predicate, edge.object, schema.predicate_prefix
        ));
    } else if !schema.predicates.is_empty() && !schema.predicates.contains(&edge.predicate) {
        report.push(
            schema.membership_severity(),
            format!(
                "edge {}-[{}]->{}: predicate {} not in schema",
                edge.subject, edge.predicate, edge.object, edge.predicate
            ),
        );
    }
    for name in edge.properties.keys() {
        if EDGE_CORE_COLUMNS.contains(&name.as_str()) {
            report.error(format!(
                "edge {}-[{}]->{}: property name '{name}' collides with a core field",
                edge.subject, edge.predicate, edge.object
            ));
        }
    }
    report
}
