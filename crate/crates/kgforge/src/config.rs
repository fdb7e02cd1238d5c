//! Declarative per-ingest configuration: one YAML file describing metadata,
//! sources, reader, filters, transform mode, and writer.
//!
//! [`load_config`] is pure — it parses text, applies defaults, and checks
//! invariants without touching the filesystem or network. [`validate_config`]
//! does the environment-dependent checks (file existence, schema readability)
//! and reports findings as data.

use std::fmt;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{compile_filters, FilterSpec};
use crate::model::{SchemaSubset, ValidationReport, EDGE_CORE_COLUMNS, NODE_CORE_COLUMNS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Semantic(String),
}

/// Source file formats the readers understand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReaderFormat {
    Csv,
    Jsonl,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compression {
    #[default]
    None,
    Gzip,
}

/// Types a declared CSV column may coerce cells into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    #[default]
    Text,
    Int,
    Float,
    Bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredColumn {
    pub name: String,
    #[serde(rename = "type", default)]
    pub column_type: ColumnType,
}

/// How the CSV header row is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaderMode {
    /// First non-blank, non-comment line is the header.
    #[default]
    Infer,
    /// No header; column names come from `columns`.
    None,
    /// The given 1-based physical line is the header; earlier lines are
    /// skipped entirely.
    Explicit(u64),
}

/// One input file or URL, with optional checksum and compression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceFileSpec {
    pub path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checksum: Option<String>,
    #[serde(skip_serializing_if = "is_default_compression")]
    pub compression: Compression,
}

fn is_default_compression(c: &Compression) -> bool {
    *c == Compression::None
}

impl SourceFileSpec {
    pub fn local(path: impl Into<String>) -> Self {
        SourceFileSpec {
            path: path.into(),
            checksum: None,
            compression: Compression::None,
        }
    }

    pub fn is_url(&self) -> bool {
        self.path.starts_with("http://")
            || self.path.starts_with("https://")
            || self.path.starts_with("file://")
    }
}

impl<'de> Deserialize<'de> for SourceFileSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct SpecVisitor;

        impl<'de> Visitor<'de> for SpecVisitor {
            type Value = SourceFileSpec;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a path string or a map with path/checksum/compression")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                Ok(SourceFileSpec::local(v))
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut path = None;
                let mut checksum = None;
                let mut compression = Compression::None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "path" => path = Some(map.next_value()?),
                        "checksum" => checksum = map.next_value()?,
                        "compression" => compression = map.next_value()?,
                        other => {
                            return Err(de::Error::unknown_field(
                                other,
                                &["path", "checksum", "compression"],
                            ))
                        }
                    }
                }
                Ok(SourceFileSpec {
                    path: path.ok_or_else(|| de::Error::missing_field("path"))?,
                    checksum,
                    compression,
                })
            }
        }

        deserializer.deserialize_any(SpecVisitor)
    }
}

/// Reader parameters. `delimiter` is filled at load time when absent: TAB
/// for `.tsv`/`.tsv.gz` source names, comma otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReaderConfig {
    pub format: ReaderFormat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delimiter: Option<char>,
    pub comment: char,
    pub quote: char,
    pub header_mode: HeaderMode,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub columns: Vec<DeclaredColumn>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_path: Option<String>,
}

impl Default for ReaderConfig {
    fn default() -> Self {
        ReaderConfig {
            format: ReaderFormat::Csv,
            delimiter: None,
            comment: '#',
            quote: '"',
            header_mode: HeaderMode::Infer,
            columns: Vec::new(),
            record_path: None,
        }
    }
}

impl ReaderConfig {
    /// The delimiter to use for the given file name: the configured one, or
    /// TAB for `.tsv`(.gz) names and comma otherwise.
    pub fn effective_delimiter(&self, file_name: &str) -> char {
        if let Some(d) = self.delimiter {
            return d;
        }
        default_delimiter_for(file_name)
    }
}

fn default_delimiter_for(file_name: &str) -> char {
    let lower = file_name.to_ascii_lowercase();
    let stem = lower.strip_suffix(".gz").unwrap_or(&lower);
    if stem.ends_with(".tsv") {
        '\t'
    } else {
        ','
    }
}

/// One field assignment in a mapping rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assignment {
    /// Copy the record's column value.
    #[serde(rename = "column")]
    Column(String),
    /// A fixed text value.
    #[serde(rename = "const")]
    Const(String),
    /// Render `prefix ":" cell` from the record's column.
    #[serde(rename = "curie")]
    Curie { prefix: String, column: String },
}

/// A list of assignments that also accepts a single bare assignment in YAML.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct Assignments(pub Vec<Assignment>);

impl std::ops::Deref for Assignments {
    type Target = [Assignment];

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl<'de> Deserialize<'de> for Assignments {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct OneOrMany;

        impl<'de> Visitor<'de> for OneOrMany {
            type Value = Assignments;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an assignment or a list of assignments")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let mut items = Vec::new();
                while let Some(item) = seq.next_element::<Assignment>()? {
                    items.push(item);
                }
                Ok(Assignments(items))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<Self::Value, A::Error> {
                let one =
                    Assignment::deserialize(de::value::MapAccessDeserializer::new(map))?;
                Ok(Assignments(vec![one]))
            }
        }

        deserializer.deserialize_any(OneOrMany)
    }
}

/// Declarative node construction rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRule {
    /// Skip this rule when the named column is absent or empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<String>,
    pub id: Assignment,
    pub category: Assignments,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<Assignment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<Assignment>,
    #[serde(default, skip_serializing_if = "Assignments::is_empty_list")]
    pub provided_by: Assignments,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub properties: IndexMap<String, Assignment>,
}

impl Assignments {
    fn is_empty_list(&self) -> bool {
        self.0.is_empty()
    }
}

/// Declarative edge construction rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<String>,
    pub subject: Assignment,
    pub predicate: Assignment,
    pub object: Assignment,
    #[serde(default, skip_serializing_if = "Assignments::is_empty_list")]
    pub category: Assignments,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knowledge_source: Option<Assignment>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub qualifiers: IndexMap<String, Assignment>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub properties: IndexMap<String, Assignment>,
}

/// The declarative transform: node and edge rules applied per record.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingSpec {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<NodeRule>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeRule>,
}

/// Exactly one of `mapping` or `hooks` must be present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping: Option<MappingSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hooks: Option<String>,
}

/// A validated view of the transform mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformMode<'a> {
    Mapping(&'a MappingSpec),
    Hooks(&'a str),
}

impl TransformSpec {
    pub fn mode(&self) -> Option<TransformMode<'_>> {
        match (&self.mapping, &self.hooks) {
            (Some(m), None) => Some(TransformMode::Mapping(m)),
            (None, Some(h)) => Some(TransformMode::Hooks(h)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Tsv,
    Jsonl,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Tsv => "tsv",
            OutputFormat::Jsonl => "jsonl",
        }
    }
}

/// What to do with a property that has no declared output column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndeclaredPropertyPolicy {
    Error,
    #[default]
    DropWithWarning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WriterConfig {
    pub format: OutputFormat,
    pub output_dir: PathBuf,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub node_property_columns: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub edge_property_columns: Vec<String>,
    pub undeclared_property_policy: UndeclaredPropertyPolicy,
    pub deduplicate: bool,
}

impl Default for WriterConfig {
    fn default() -> Self {
        WriterConfig {
            format: OutputFormat::Tsv,
            output_dir: PathBuf::from("output"),
            node_property_columns: Vec::new(),
            edge_property_columns: Vec::new(),
            undeclared_property_policy: UndeclaredPropertyPolicy::DropWithWarning,
            deduplicate: true,
        }
    }
}

/// Log verbosity captured in a run's log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogLevel {
    Debug,
    #[default]
    Info,
    Warning,
    Error,
}

/// The full declarative description of one ingest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    pub name: String,
    pub source_files: Vec<SourceFileSpec>,
    #[serde(default)]
    pub reader: ReaderConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub filters: Vec<FilterSpec>,
    pub transform: TransformSpec,
    #[serde(default)]
    pub writer: WriterConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    #[serde(default)]
    pub log_level: LogLevel,
    #[serde(default = "default_true")]
    pub continue_on_record_error: bool,
}

fn default_true() -> bool {
    true
}

fn is_slug(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Parses YAML text into a fully defaulted [`IngestConfig`]. Deterministic
/// and side-effect free: no file reads beyond the given text.
pub fn load_config(yaml_text: &str) -> Result<IngestConfig, ConfigError> {
    let de = serde_yaml::Deserializer::from_str(yaml_text);
    let mut config: IngestConfig = serde_yaml::with::singleton_map_recursive::deserialize(de)
        .map_err(|e| ConfigError::Parse(e.to_string()))?;
    apply_defaults(&mut config);
    check_invariants(&config)?;
    Ok(config)
}

/// Reads and loads a config file, returning the config and the directory all
/// relative paths inside it resolve against.
pub fn load_config_file(path: &Path) -> Result<(IngestConfig, PathBuf), ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let config = load_config(&text)?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((config, base))
}

/// Serializes a config back to YAML. Loading the result yields an equal
/// config (round trip after default expansion).
pub fn to_yaml(config: &IngestConfig) -> Result<String, ConfigError> {
    let mut out = Vec::new();
    let mut ser = serde_yaml::Serializer::new(&mut out);
    serde_yaml::with::singleton_map_recursive::serialize(config, &mut ser)
        .map_err(|e| ConfigError::Semantic(format!("cannot serialize config: {e}")))?;
    drop(ser);
    String::from_utf8(out).map_err(|e| ConfigError::Semantic(e.to_string()))
}

fn apply_defaults(config: &mut IngestConfig) {
    if config.reader.delimiter.is_none() {
        let first = config
            .source_files
            .first()
            .map(|s| s.path.as_str())
            .unwrap_or("");
        config.reader.delimiter = Some(default_delimiter_for(first));
    }
}

fn check_invariants(config: &IngestConfig) -> Result<(), ConfigError> {
    let err = |msg: String| Err(ConfigError::Semantic(msg));
    if !is_slug(&config.name) {
        return err(format!(
            "ingest name {:?} is not a slug ([a-z0-9_]+)",
            config.name
        ));
    }
    if config.source_files.is_empty() {
        return err("at least one source file is required".to_string());
    }
    match (&config.transform.mapping, &config.transform.hooks) {
        (Some(_), Some(_)) => {
            return err("exactly one transform mode: both 'mapping' and 'hooks' given".to_string())
        }
        (None, None) => {
            return err("exactly one transform mode: neither 'mapping' nor 'hooks' given".to_string())
        }
        _ => {}
    }
    let delimiter = config.reader.delimiter.unwrap_or(',');
    if delimiter == config.reader.comment {
        return err(format!(
            "delimiter equals comment character ({:?})",
            delimiter
        ));
    }
    if delimiter == config.reader.quote {
        return err(format!("delimiter equals quote character ({:?})", delimiter));
    }
    if config.reader.header_mode == HeaderMode::None && config.reader.columns.is_empty() {
        return err("header_mode 'none' requires declared columns".to_string());
    }
    if let HeaderMode::Explicit(row) = config.reader.header_mode {
        if row == 0 {
            return err("explicit header row index is 1-based; 0 is invalid".to_string());
        }
    }
    if config.reader.format == ReaderFormat::Json && config.reader.record_path.is_none() {
        return err("json format requires record_path".to_string());
    }
    for column in &config.reader.columns {
        if column.name.is_empty() {
            return err("declared column with empty name".to_string());
        }
    }
    for rule in config
        .transform
        .mapping
        .iter()
        .flat_map(|m| m.nodes.iter())
    {
        if rule.category.is_empty() {
            return err("node rule must assign at least one category".to_string());
        }
    }
    Ok(())
}

/// Environment-dependent checks: source existence/URL shape, schema
/// readability, output column uniqueness, filter compilability, and static
/// mapping/column cross-references. Empty report means runnable.
pub fn validate_config(config: &IngestConfig, base: &Path) -> ValidationReport {
    let mut report = ValidationReport::new();

    for source in &config.source_files {
        if source.is_url() {
            if source.path.split_once("://").map(|x| x.1).unwrap_or("").is_empty() {
                report.error(format!("malformed URL: {}", source.path));
            }
        } else {
            let resolved = resolve_path(base, &source.path);
            if !resolved.is_file() {
                report.error(format!("source file not found: {}", resolved.display()));
            }
        }
        if let Some(checksum) = &source.checksum {
            if checksum.len() != 64 || !checksum.chars().all(|c| c.is_ascii_hexdigit()) {
                report.error(format!(
                    "checksum for {} is not a 64-char hex digest",
                    source.path
                ));
            }
        }
    }

    if let Some(schema_path) = &config.schema {
        let resolved = resolve_path(base, schema_path);
        if let Err(e) = SchemaSubset::load(&resolved) {
            report.error(format!("schema not loadable: {e}"));
        }
    }

    check_columns(&mut report, "node", &config.writer.node_property_columns, &NODE_CORE_COLUMNS);
    check_columns(&mut report, "edge", &config.writer.edge_property_columns, &EDGE_CORE_COLUMNS);

    if let Err(e) = compile_filters(&config.filters) {
        report.error(format!("filter does not compile: {e}"));
    }

    if !config.reader.columns.is_empty() {
        if let Some(mapping) = &config.transform.mapping {
            let declared: Vec<&str> = config.reader.columns.iter().map(|c| c.name.as_str()).collect();
            for column in mapping_column_refs(mapping) {
                if !declared.contains(&column) {
                    report.error(format!(
                        "mapping references column '{column}' not in declared columns"
                    ));
                }
            }
        }
    }

    report
}

fn check_columns(
    report: &mut ValidationReport,
    kind: &str,
    columns: &[String],
    core: &[&str],
) {
    for (i, name) in columns.iter().enumerate() {
        if core.contains(&name.as_str()) {
            report.error(format!(
                "{kind} property column '{name}' collides with a core column"
            ));
        }
        if columns[..i].contains(name) {
            report.error(format!("duplicate {kind} property column '{name}'"));
        }
    }
}

fn mapping_column_refs(mapping: &MappingSpec) -> Vec<&str> {
    let mut refs = Vec::new();
    fn collect<'a>(refs: &mut Vec<&'a str>, assignment: &'a Assignment) {
        match assignment {
            Assignment::Column(c) => refs.push(c),
            Assignment::Curie { column, .. } => refs.push(column),
            Assignment::Const(_) => {}
        }
    }
    for rule in &mapping.nodes {
        if let Some(g) = &rule.guard {
            refs.push(g.as_str());
        }
        collect(&mut refs, &rule.id);
        for a in rule.category.iter() {
            collect(&mut refs, a);
        }
        if let Some(a) = &rule.name {
            collect(&mut refs, a);
        }
        if let Some(a) = &rule.description {
            collect(&mut refs, a);
        }
        for a in rule.provided_by.iter() {
            collect(&mut refs, a);
        }
        for a in rule.properties.values() {
            collect(&mut refs, a);
        }
    }
    for rule in &mapping.edges {
        if let Some(g) = &rule.guard {
            refs.push(g.as_str());
        }
        collect(&mut refs, &rule.subject);
        collect(&mut refs, &rule.predicate);
        collect(&mut refs, &rule.object);
        for a in rule.category.iter() {
            collect(&mut refs, a);
        }
        if let Some(a) = &rule.knowledge_source {
            collect(&mut refs, a);
        }
        for a in rule.qualifiers.values() {
            collect(&mut refs, a);
        }
        for a in rule.properties.values() {
            collect(&mut refs, a);
        }
    }
    refs
}

/// Joins a possibly relative config path against the config's directory.
pub fn resolve_path(base: &Path, path: impl AsRef<Path>) -> PathBuf {
    let path = path.as_ref();
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
name: demo
source_files:
  - data.csv
transform:
  mapping:
    nodes:
      - id: {curie: {prefix: X, column: id}}
        category: {const: 'biolink:Gene'}
writer:
  output_dir: out
";

    #[test]
    fn minimal_config_gets_defaults() {
        let config = load_config(MINIMAL).unwrap();
        assert_eq!(config.name, "demo");
        assert_eq!(config.reader.delimiter, Some(','));
        assert_eq!(config.reader.comment, '#');
        assert_eq!(config.reader.header_mode, HeaderMode::Infer);
        assert_eq!(
            config.writer.undeclared_property_policy,
            UndeclaredPropertyPolicy::DropWithWarning
        );
        assert!(config.writer.deduplicate);
        assert!(config.continue_on_record_error);
        assert_eq!(config.log_level, LogLevel::Info);
    }

    #[test]
    fn tsv_source_defaults_to_tab_delimiter() {
        let text = MINIMAL.replace("data.csv", "data.tsv");
        assert_eq!(load_config(&text).unwrap().reader.delimiter, Some('\t'));
        let text = MINIMAL.replace("data.csv", "data.tsv.gz");
        assert_eq!(load_config(&text).unwrap().reader.delimiter, Some('\t'));
    }

    #[test]
    fn both_transform_modes_is_a_semantic_error() {
        let text = MINIMAL.replace(
            "transform:",
            "transform:\n  hooks: some_ingest",
        );
        let err = load_config(&text).unwrap_err();
        assert!(
            matches!(&err, ConfigError::Semantic(m) if m.contains("exactly one transform mode")),
            "got: {err}"
        );
    }

    #[test]
    fn neither_transform_mode_is_a_semantic_error() {
        let text = "\
name: demo
source_files: [data.csv]
transform: {}
writer: {output_dir: out}
";
        let err = load_config(text).unwrap_err();
        assert!(matches!(&err, ConfigError::Semantic(m) if m.contains("exactly one")));
    }

    #[test]
    fn delimiter_equal_to_comment_is_rejected() {
        let text = MINIMAL.to_string()
            + "reader:\n  format: csv\n  delimiter: ','\n  comment: ','\n";
        let err = load_config(&text).unwrap_err();
        assert!(matches!(&err, ConfigError::Semantic(m) if m.contains("comment")));
    }

    #[test]
    fn header_none_without_columns_is_rejected() {
        let text = MINIMAL.to_string() + "reader:\n  format: csv\n  header_mode: none\n";
        let err = load_config(&text).unwrap_err();
        assert!(matches!(&err, ConfigError::Semantic(m) if m.contains("declared columns")));
    }

    #[test]
    fn bad_slug_is_rejected() {
        let text = MINIMAL.replace("name: demo", "name: 'Demo Ingest'");
        assert!(load_config(&text).is_err());
    }

    #[test]
    fn malformed_yaml_is_a_parse_error() {
        assert!(matches!(
            load_config("name: [unclosed"),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn round_trip_after_default_expansion() {
        let with_extras = "\
name: demo
source_files:
  - path: data.tsv
    checksum: 0123456789abcdef0123456789abcdef0123456789abcdef0123456789abcdef
filters:
  - column: taxon
    inclusion: include
    filter_code: in
    value: ['NCBITaxon:9606']
transform:
  mapping:
    nodes:
      - id: {column: id}
        category: [{const: 'biolink:Gene'}, {const: 'biolink:NamedThing'}]
        name: {column: symbol}
        properties:
          taxon: {column: taxon}
    edges:
      - subject: {column: id}
        predicate: {const: 'biolink:orthologous_to'}
        object: {column: other}
        qualifiers:
          taxon: {column: taxon}
writer:
  output_dir: out
  format: jsonl
  node_property_columns: [taxon]
  deduplicate: false
schema: schema.yaml
log_level: debug
";
        let config = load_config(with_extras).unwrap();
        let yaml = to_yaml(&config).unwrap();
        let reloaded = load_config(&yaml).unwrap();
        assert_eq!(config, reloaded);
    }

    #[test]
    fn explicit_header_mode_round_trips() {
        let text = MINIMAL.to_string() + "reader:\n  format: csv\n  header_mode:\n    explicit: 3\n";
        let config = load_config(&text).unwrap();
        assert_eq!(config.reader.header_mode, HeaderMode::Explicit(3));
        let reloaded = load_config(&to_yaml(&config).unwrap()).unwrap();
        assert_eq!(config, reloaded);
    }

    #[test]
    fn validate_config_reports_missing_source() {
        let config = load_config(MINIMAL).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let report = validate_config(&config, dir.path());
        assert!(!report.is_clean());
        assert!(report.violations()[0].message.contains("not found"));
    }

    #[test]
    fn validate_config_reports_duplicate_columns() {
        let text = MINIMAL.replace(
            "writer:\n  output_dir: out",
            "writer:\n  output_dir: out\n  node_property_columns: [a, a]",
        );
        let config = load_config(&text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("data.csv"), "id\n1\n").unwrap();
        let report = validate_config(&config, dir.path());
        assert!(report
            .violations()
            .iter()
            .any(|v| v.message.contains("duplicate node property column")));
    }

    #[test]
    fn validate_config_accepts_a_complete_setup() {
        let config = load_config(MINIMAL).unwrap();
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("data.csv"), "id\n1\n").unwrap();
        let report = validate_config(&config, dir.path());
        assert!(report.is_clean(), "unexpected: {report}");
    }

    #[test]
    fn validate_config_cross_checks_mapping_against_declared_columns() {
        let text = "\
name: demo
source_files: [data.csv]
reader:
  format: csv
  columns:
    - name: id
transform:
  mapping:
    nodes:
      - id: {column: wrong}
        category: {const: 'biolink:Gene'}
writer:
  output_dir: out
";
        let config = load_config(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("data.csv"), "id\n1\n").unwrap();
        let report = validate_config(&config, dir.path());
        assert!(report
            .violations()
            .iter()
            .any(|v| v.message.contains("column 'wrong'")));
    }

    #[test]
    fn source_file_spec_accepts_bare_strings_and_maps() {
        let text = "\
name: demo
source_files:
  - plain.csv
  - path: other.csv
    compression: gzip
transform:
  hooks: registered
writer:
  output_dir: out
";
        let config = load_config(text).unwrap();
        assert_eq!(config.source_files[0].path, "plain.csv");
        assert_eq!(config.source_files[1].compression, Compression::Gzip);
        assert!(config.transform.mode().is_some());
    }
}
