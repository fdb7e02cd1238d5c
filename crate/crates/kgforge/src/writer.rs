//! KGX-style artifact serialization: paired node/edge files in TSV or
//! JSON-lines form, plus the read-back path used by validation and merge.
//!
//! TSV cells follow fixed rules: lists joined with `|`, absent values as the
//! empty string, TAB/newline inside text replaced by a single space with a
//! warning. Column order is core columns first, then the declared property
//! columns, and the header row is always present. JSONL keeps lists as
//! arrays and nests edge qualifiers under a `qualifiers` key so a write →
//! read round trip preserves them.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{OutputFormat, UndeclaredPropertyPolicy, WriterConfig};
use crate::model::{
    edge_identity, parse_curie, Curie, KgEdge, KgNode, PropertyValue, ValidationReport,
    EDGE_CORE_COLUMNS, NODE_CORE_COLUMNS,
};

#[derive(Debug, Error)]
pub enum WriterError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{kind} property '{name}' has no declared column")]
    UndeclaredProperty { kind: &'static str, name: String },
    #[error("invalid column layout: {0}")]
    Layout(String),
    #[error("cannot parse {path}:{line}: {reason}")]
    Parse {
        path: String,
        line: u64,
        reason: String,
    },
}

impl WriterError {
    /// Errors that reject the offending record but let the run continue.
    pub fn is_record_scoped(&self) -> bool {
        matches!(self, WriterError::UndeclaredProperty { .. })
    }
}

/// Node or edge file of an artifact pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Node,
    Edge,
}

impl RowKind {
    pub fn core_columns(self) -> &'static [&'static str] {
        match self {
            RowKind::Node => &NODE_CORE_COLUMNS,
            RowKind::Edge => &EDGE_CORE_COLUMNS,
        }
    }

    fn label(self) -> &'static str {
        match self {
            RowKind::Node => "node",
            RowKind::Edge => "edge",
        }
    }
}

/// Fixed column order for one artifact pair: core columns followed by the
/// declared property columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabularLayout {
    pub node_columns: Vec<String>,
    pub edge_columns: Vec<String>,
}

impl TabularLayout {
    /// Builds the layout from declared property column lists, rejecting
    /// duplicates and collisions with core columns.
    pub fn new(
        node_properties: &[String],
        edge_properties: &[String],
    ) -> Result<Self, WriterError> {
        Ok(TabularLayout {
            node_columns: build_columns(RowKind::Node, node_properties)?,
            edge_columns: build_columns(RowKind::Edge, edge_properties)?,
        })
    }

    pub fn columns(&self, kind: RowKind) -> &[String] {
        match kind {
            RowKind::Node => &self.node_columns,
            RowKind::Edge => &self.edge_columns,
        }
    }
}

fn build_columns(kind: RowKind, extra: &[String]) -> Result<Vec<String>, WriterError> {
    let core = kind.core_columns();
    let mut columns: Vec<String> = core.iter().map(|c| c.to_string()).collect();
    for name in extra {
        if core.contains(&name.as_str()) {
            return Err(WriterError::Layout(format!(
                "{} property column '{name}' collides with a core column",
                kind.label()
            )));
        }
        if columns.contains(name) {
            return Err(WriterError::Layout(format!(
                "duplicate {} property column '{name}'",
                kind.label()
            )));
        }
        columns.push(name.clone());
    }
    Ok(columns)
}

/// A serialized row in column → value form; `qualifiers` is populated for
/// edges read from JSONL (TSV cannot distinguish qualifiers from properties).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawRow {
    pub values: IndexMap<String, PropertyValue>,
    pub qualifiers: IndexMap<String, PropertyValue>,
}

/// Per-file entry of the output manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub rows: u64,
    pub sha256: String,
}

/// What a finalized writer produced: file names, row counts, and content
/// digests, sorted by file name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileManifest {
    pub files: Vec<ManifestEntry>,
}

impl FileManifest {
    pub fn digest_for(&self, file: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|e| e.file == file)
            .map(|e| e.sha256.as_str())
    }
}

/// Paths an artifact pair occupies for a given ingest name and format.
pub fn artifact_paths(dir: &Path, name: &str, format: OutputFormat) -> (PathBuf, PathBuf) {
    let ext = format.extension();
    (
        dir.join(format!("{name}_nodes.{ext}")),
        dir.join(format!("{name}_edges.{ext}")),
    )
}

struct OutputFile {
    path: PathBuf,
    out: BufWriter<File>,
    digest: Sha256,
    rows: u64,
    seen: HashSet<[u8; 32]>,
}

impl OutputFile {
    fn create(path: PathBuf) -> Result<Self, WriterError> {
        let file = File::create(&path).map_err(|source| WriterError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(OutputFile {
            path,
            out: BufWriter::new(file),
            digest: Sha256::new(),
            rows: 0,
            seen: HashSet::new(),
        })
    }

    fn write_raw(&mut self, text: &str) -> Result<(), WriterError> {
        self.out
            .write_all(text.as_bytes())
            .map_err(|source| WriterError::Io {
                path: self.path.display().to_string(),
                source,
            })?;
        self.digest.update(text.as_bytes());
        Ok(())
    }

    /// Appends one row (without newline); with dedup, an exact duplicate of
    /// an earlier row is skipped, preserving the first occurrence.
    fn write_row(&mut self, row: &str, dedup: bool) -> Result<bool, WriterError> {
        if dedup {
            let key: [u8; 32] = Sha256::digest(row.as_bytes()).into();
            if !self.seen.insert(key) {
                return Ok(false);
            }
        }
        self.write_raw(row)?;
        self.write_raw("\n")?;
        self.rows += 1;
        Ok(true)
    }

    fn finish(mut self) -> Result<ManifestEntry, WriterError> {
        self.out.flush().map_err(|source| WriterError::Io {
            path: self.path.display().to_string(),
            source,
        })?;
        let file = self
            .path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(ManifestEntry {
            file,
            rows: self.rows,
            sha256: hex::encode(self.digest.finalize()),
        })
    }
}

/// Streaming writer for one artifact pair. Rows are flushed in call order;
/// duplicate rows are dropped at write time when deduplication is on, so a
/// single pass produces the deduplicated files.
pub struct ArtifactWriter {
    layout: TabularLayout,
    format: OutputFormat,
    nodes: OutputFile,
    edges: OutputFile,
    dedup: bool,
    policy: UndeclaredPropertyPolicy,
    warned_columns: HashSet<String>,
    warnings: Vec<String>,
}

impl ArtifactWriter {
    /// Creates the node/edge files under `dir` (created if needed) and
    /// writes TSV headers immediately.
    pub fn create(dir: &Path, name: &str, config: &WriterConfig) -> Result<Self, WriterError> {
        let layout = TabularLayout::new(
            &config.node_property_columns,
            &config.edge_property_columns,
        )?;
        Self::create_with_layout(
            dir,
            name,
            config.format,
            layout,
            config.deduplicate,
            config.undeclared_property_policy,
        )
    }

    pub fn create_with_layout(
        dir: &Path,
        name: &str,
        format: OutputFormat,
        layout: TabularLayout,
        dedup: bool,
        policy: UndeclaredPropertyPolicy,
    ) -> Result<Self, WriterError> {
        std::fs::create_dir_all(dir).map_err(|source| WriterError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let (node_path, edge_path) = artifact_paths(dir, name, format);
        let mut nodes = OutputFile::create(node_path)?;
        let mut edges = OutputFile::create(edge_path)?;
        if format == OutputFormat::Tsv {
            nodes.write_raw(&(layout.node_columns.join("\t") + "\n"))?;
            edges.write_raw(&(layout.edge_columns.join("\t") + "\n"))?;
        }
        Ok(ArtifactWriter {
            layout,
            format,
            nodes,
            edges,
            dedup,
            policy,
            warned_columns: HashSet::new(),
            warnings: Vec::new(),
        })
    }

    pub fn paths(&self) -> (PathBuf, PathBuf) {
        (self.nodes.path.clone(), self.edges.path.clone())
    }

    pub fn layout(&self) -> &TabularLayout {
        &self.layout
    }

    /// Warnings accumulated since the last call (sanitized cells, dropped
    /// properties).
    pub fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(&mut self.warnings)
    }

    /// Serializes one node. The caller is expected to have validated it.
    pub fn write_node(&mut self, node: &KgNode) -> Result<(), WriterError> {
        let mut row = RawRow::default();
        row.values
            .insert("id".into(), PropertyValue::Text(node.id.render()));
        row.values.insert(
            "category".into(),
            PropertyValue::TextList(node.category.iter().map(Curie::render).collect()),
        );
        if let Some(name) = &node.name {
            row.values
                .insert("name".into(), PropertyValue::Text(name.clone()));
        }
        if let Some(description) = &node.description {
            row.values
                .insert("description".into(), PropertyValue::Text(description.clone()));
        }
        if !node.provided_by.is_empty() {
            row.values.insert(
                "provided_by".into(),
                PropertyValue::TextList(node.provided_by.clone()),
            );
        }
        for (name, value) in &node.properties {
            if self.admit_property(RowKind::Node, name)? {
                row.values.insert(name.clone(), value.clone());
            }
        }
        self.write_raw_row(RowKind::Node, &row)
    }

    /// Serializes one edge, assigning the deterministic content-hash id when
    /// the edge does not carry one.
    pub fn write_edge(&mut self, edge: &KgEdge) -> Result<(), WriterError> {
        let id = if edge.id.is_empty() {
            edge_identity(edge)
        } else {
            edge.id.clone()
        };
        let mut row = RawRow::default();
        row.values.insert("id".into(), PropertyValue::Text(id));
        row.values
            .insert("subject".into(), PropertyValue::Text(edge.subject.render()));
        row.values.insert(
            "predicate".into(),
            PropertyValue::Text(edge.predicate.render()),
        );
        row.values
            .insert("object".into(), PropertyValue::Text(edge.object.render()));
        if !edge.category.is_empty() {
            row.values.insert(
                "category".into(),
                PropertyValue::TextList(edge.category.iter().map(Curie::render).collect()),
            );
        }
        if let Some(ks) = &edge.knowledge_source {
            row.values
                .insert("knowledge_source".into(), PropertyValue::Text(ks.clone()));
        }
        match self.format {
            // TSV qualifiers occupy declared columns, gated by the policy.
            OutputFormat::Tsv => {
                for (name, value) in &edge.qualifiers {
                    if self.admit_property(RowKind::Edge, name)? {
                        row.values.insert(name.clone(), value.clone());
                    }
                }
            }
            // JSONL always keeps qualifiers: they are part of edge identity.
            OutputFormat::Jsonl => {
                row.qualifiers = edge.qualifiers.clone();
            }
        }
        for (name, value) in &edge.properties {
            if self.admit_property(RowKind::Edge, name)? {
                row.values.insert(name.clone(), value.clone());
            }
        }
        self.write_raw_row(RowKind::Edge, &row)
    }

    fn admit_property(&mut self, kind: RowKind, name: &str) -> Result<bool, WriterError> {
        if self.format == OutputFormat::Jsonl || self.layout.columns(kind).iter().any(|c| c == name)
        {
            return Ok(true);
        }
        match self.policy {
            UndeclaredPropertyPolicy::Error => Err(WriterError::UndeclaredProperty {
                kind: kind.label(),
                name: name.to_string(),
            }),
            UndeclaredPropertyPolicy::DropWithWarning => {
                if self.warned_columns.insert(name.to_string()) {
                    self.warnings.push(format!(
                        "{} property '{name}' has no declared column; dropping it",
                        kind.label()
                    ));
                }
                Ok(false)
            }
        }
    }

    /// Low-level row write used by merge: the row's columns must already fit
    /// the layout.
    pub fn write_raw_row(&mut self, kind: RowKind, row: &RawRow) -> Result<(), WriterError> {
        let line = match self.format {
            OutputFormat::Tsv => {
                let columns = self.layout.columns(kind);
                let mut cells = Vec::with_capacity(columns.len());
                let mut dirty: Vec<String> = Vec::new();
                for column in columns {
                    let cell = row
                        .values
                        .get(column)
                        .map(|v| v.render_cell())
                        .unwrap_or_default();
                    if cell.contains(['\t', '\n', '\r']) {
                        dirty.push(column.clone());
                        cells.push(sanitize_cell(&cell));
                    } else {
                        cells.push(cell);
                    }
                }
                for column in dirty {
                    self.warnings.push(format!(
                        "cell in column '{column}' contained TAB/newline; replaced with spaces"
                    ));
                }
                cells.join("\t")
            }
            OutputFormat::Jsonl => {
                let mut object = serde_json::Map::new();
                // Core columns first, then extras in row order.
                for column in self.layout.columns(kind) {
                    if let Some(value) = row.values.get(column) {
                        if !value.is_empty_value() {
                            object.insert(column.clone(), to_json(value));
                        }
                    }
                }
                for (name, value) in &row.values {
                    if !object.contains_key(name) && !value.is_empty_value() {
                        object.insert(name.clone(), to_json(value));
                    }
                }
                if kind == RowKind::Edge && !row.qualifiers.is_empty() {
                    let quals: serde_json::Map<String, serde_json::Value> = row
                        .qualifiers
                        .iter()
                        .map(|(k, v)| (k.clone(), to_json(v)))
                        .collect();
                    object.insert("qualifiers".into(), serde_json::Value::Object(quals));
                }
                serde_json::Value::Object(object).to_string()
            }
        };
        let file = match kind {
            RowKind::Node => &mut self.nodes,
            RowKind::Edge => &mut self.edges,
        };
        file.write_row(&line, self.dedup)?;
        Ok(())
    }

    /// Flushes both files and returns the manifest. With deduplication on,
    /// the files are already duplicate-free (first occurrences kept), so
    /// finalizing an already-deduplicated artifact changes nothing.
    pub fn finalize(self) -> Result<FileManifest, WriterError> {
        let mut files = vec![self.nodes.finish()?, self.edges.finish()?];
        files.sort_by(|a, b| a.file.cmp(&b.file));
        Ok(FileManifest { files })
    }
}

fn sanitize_cell(cell: &str) -> String {
    cell.replace("\r\n", " ").replace(['\t', '\n', '\r'], " ")
}

fn to_json(value: &PropertyValue) -> serde_json::Value {
    match value {
        PropertyValue::Text(s) => serde_json::Value::String(s.clone()),
        PropertyValue::Integer(i) => serde_json::Value::from(*i),
        PropertyValue::Decimal(d) => serde_json::Value::from(*d),
        PropertyValue::Boolean(b) => serde_json::Value::Bool(*b),
        PropertyValue::TextList(items) => {
            serde_json::Value::Array(items.iter().cloned().map(serde_json::Value::from).collect())
        }
    }
}

fn from_json(value: serde_json::Value) -> Result<PropertyValue, String> {
    match value {
        serde_json::Value::String(s) => Ok(PropertyValue::Text(s)),
        serde_json::Value::Bool(b) => Ok(PropertyValue::Boolean(b)),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(PropertyValue::Integer(i))
            } else {
                n.as_f64()
                    .map(PropertyValue::Decimal)
                    .ok_or_else(|| "unrepresentable number".to_string())
            }
        }
        serde_json::Value::Array(items) => {
            let mut texts = Vec::with_capacity(items.len());
            for item in items {
                match item {
                    serde_json::Value::String(s) => texts.push(s),
                    serde_json::Value::Number(n) => texts.push(n.to_string()),
                    serde_json::Value::Bool(b) => texts.push(b.to_string()),
                    other => return Err(format!("unsupported list element: {other}")),
                }
            }
            PropertyValue::text_list(texts).map_err(|e| e.to_string())
        }
        other => Err(format!("unsupported value: {other}")),
    }
}

/// The rows of one artifact file, in file order, with the column set in
/// first-seen order (TSV: the header; JSONL: keys as encountered, core
/// columns first).
#[derive(Debug, Clone, Default)]
pub struct ArtifactRows {
    pub columns: Vec<String>,
    pub rows: Vec<RawRow>,
}

fn detect_format(path: &Path) -> Result<OutputFormat, WriterError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") => Ok(OutputFormat::Tsv),
        Some("jsonl") => Ok(OutputFormat::Jsonl),
        _ => Err(WriterError::Parse {
            path: path.display().to_string(),
            line: 0,
            reason: "unknown artifact extension (expected .tsv or .jsonl)".to_string(),
        }),
    }
}

/// Reads one artifact file back into raw rows.
pub fn read_rows(path: &Path, kind: RowKind) -> Result<ArtifactRows, WriterError> {
    let format = detect_format(path)?;
    let file = File::open(path).map_err(|source| WriterError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut result = ArtifactRows::default();
    let mut line_no = 0u64;
    let io_err = |source| WriterError::Io {
        path: path.display().to_string(),
        source,
    };
    match format {
        OutputFormat::Tsv => {
            for line in reader.lines() {
                let line = line.map_err(io_err)?;
                line_no += 1;
                if line_no == 1 {
                    result.columns = line.split('\t').map(str::to_string).collect();
                    continue;
                }
                let cells: Vec<&str> = line.split('\t').collect();
                if cells.len() != result.columns.len() {
                    return Err(WriterError::Parse {
                        path: path.display().to_string(),
                        line: line_no,
                        reason: format!(
                            "row has {} cells, header has {}",
                            cells.len(),
                            result.columns.len()
                        ),
                    });
                }
                let mut row = RawRow::default();
                for (column, cell) in result.columns.iter().zip(cells) {
                    if !cell.is_empty() {
                        row.values
                            .insert(column.clone(), PropertyValue::Text(cell.to_string()));
                    }
                }
                result.rows.push(row);
            }
            if result.columns.is_empty() {
                return Err(WriterError::Parse {
                    path: path.display().to_string(),
                    line: 0,
                    reason: "missing header row".to_string(),
                });
            }
        }
        OutputFormat::Jsonl => {
            result.columns = kind.core_columns().iter().map(|c| c.to_string()).collect();
            for line in reader.lines() {
                let line = line.map_err(io_err)?;
                line_no += 1;
                if line.trim().is_empty() {
                    continue;
                }
                let parse_err = |reason: String| WriterError::Parse {
                    path: path.display().to_string(),
                    line: line_no,
                    reason,
                };
                let value: serde_json::Value =
                    serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
                let serde_json::Value::Object(object) = value else {
                    return Err(parse_err("row is not a JSON object".to_string()));
                };
                let mut row = RawRow::default();
                for (key, value) in object {
                    if kind == RowKind::Edge && key == "qualifiers" {
                        let serde_json::Value::Object(quals) = value else {
                            return Err(parse_err("qualifiers is not an object".to_string()));
                        };
                        for (name, qual) in quals {
                            row.qualifiers
                                .insert(name, from_json(qual).map_err(&parse_err)?);
                        }
                        continue;
                    }
                    if !result.columns.contains(&key) {
                        result.columns.push(key.clone());
                    }
                    row.values.insert(key, from_json(value).map_err(&parse_err)?);
                }
                result.rows.push(row);
            }
        }
    }
    Ok(result)
}

/// Splits a raw value into list elements: text lists as-is, text cells on
/// the `|` separator.
pub fn as_text_list(value: &PropertyValue) -> Vec<String> {
    match value {
        PropertyValue::TextList(items) => items.clone(),
        PropertyValue::Text(s) if s.is_empty() => Vec::new(),
        other => other
            .render_cell()
            .split('|')
            .filter(|p| !p.is_empty())
            .map(str::to_string)
            .collect(),
    }
}

fn row_text(row: &RawRow, column: &str) -> Option<String> {
    row.values
        .get(column)
        .map(PropertyValue::render_cell)
        .filter(|s| !s.is_empty())
}

/// Rebuilds a typed node from a raw row, reporting structural problems as
/// violations rather than failing.
pub fn decode_node(row: &RawRow) -> (Option<KgNode>, ValidationReport) {
    let mut report = ValidationReport::new();
    let id = match row_text(row, "id") {
        None => {
            report.error("node row: missing id");
            None
        }
        Some(raw) => match parse_curie(&raw) {
            Ok(curie) => Some(curie),
            Err(e) => {
                report.error(format!("node row: {e}"));
                None
            }
        },
    };
    let Some(id) = id else {
        return (None, report);
    };
    let mut node = KgNode::new(id, Vec::new());
    if let Some(value) = row.values.get("category") {
        for raw in as_text_list(value) {
            match parse_curie(&raw) {
                Ok(curie) => node.category.push(curie),
                Err(e) => report.error(format!("node {}: {e}", node.id)),
            }
        }
    }
    node.name = row_text(row, "name");
    node.description = row_text(row, "description");
    if let Some(value) = row.values.get("provided_by") {
        node.provided_by = as_text_list(value);
    }
    for (name, value) in &row.values {
        if !NODE_CORE_COLUMNS.contains(&name.as_str()) {
            node.properties.insert(name.clone(), value.clone());
        }
    }
    (Some(node), report)
}

/// Rebuilds a typed edge from a raw row; missing subject/predicate/object
/// become violations.
pub fn decode_edge(row: &RawRow) -> (Option<KgEdge>, ValidationReport) {
    let mut report = ValidationReport::new();
    let mut curie_field = |field: &str| match row_text(row, field) {
        None => {
            report.error(format!("edge row: missing {field}"));
            None
        }
        Some(raw) => match parse_curie(&raw) {
            Ok(curie) => Some(curie),
            Err(e) => {
                report.error(format!("edge row ({field}): {e}"));
                None
            }
        },
    };
    let subject = curie_field("subject");
    let predicate = curie_field("predicate");
    let object = curie_field("object");
    let (Some(subject), Some(predicate), Some(object)) = (subject, predicate, object) else {
        return (None, report);
    };
    let mut edge = KgEdge::new(subject, predicate, object);
    edge.id = row_text(row, "id").unwrap_or_default();
    if let Some(value) = row.values.get("category") {
        for raw in as_text_list(value) {
            match parse_curie(&raw) {
                Ok(curie) => edge.category.push(curie),
                Err(e) => report.error(format!("edge row (category): {e}")),
            }
        }
    }
    edge.knowledge_source = row_text(row, "knowledge_source");
    edge.qualifiers = row.qualifiers.clone();
    for (name, value) in &row.values {
        if !EDGE_CORE_COLUMNS.contains(&name.as_str()) {
            edge.properties.insert(name.clone(), value.clone());
        }
    }
    (Some(edge), report)
}
