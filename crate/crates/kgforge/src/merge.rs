//! Concatenates per-source artifact pairs into one knowledge graph.
//!
//! Nodes are unioned by id: exact-duplicate rows collapse silently; rows that
//! differ are resolved by the conflict policy (`first_wins` keeps the first
//! occurrence's core fields, unions `provided_by`, and fills property columns
//! the first row left absent; `error` aborts naming both inputs). Edges are
//! unioned by their id cell — the content hash the writer emits — with the
//! identity recomputed when a row carries no id. Dangling edges (subject or
//! object with no node row) are counted and kept: modular ingests
//! legitimately reference nodes contributed by other ingests.
//!
//! The whole merge holds an id → row index in memory; fine at desk scale
//! (millions of rows), with external sorting as the growth path.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{resolve_path, OutputFormat, UndeclaredPropertyPolicy};
use crate::model::{edge_identity, PropertyValue};
use crate::writer::{
    as_text_list, decode_edge, read_rows, ArtifactWriter, FileManifest, RawRow, RowKind,
    TabularLayout, WriterError,
};

#[derive(Debug, Error)]
pub enum MergeError {
    #[error("merge config error: {0}")]
    Config(String),
    #[error(transparent)]
    Artifact(#[from] WriterError),
    #[error("node conflict on id '{id}': differing rows from {first} and {second}")]
    Conflict {
        id: String,
        first: String,
        second: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeConflictPolicy {
    /// Keep the first occurrence's core fields, union provided_by, fill
    /// absent property columns. Silent last-wins would hide provenance.
    #[default]
    FirstWins,
    Error,
}

/// Declarative description of one merge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeConfig {
    /// Artifact directories or `*_nodes.*` file paths, merged in order.
    pub inputs: Vec<String>,
    #[serde(default)]
    pub node_conflict: NodeConflictPolicy,
    /// Name of the merged artifact (`<output>_nodes.tsv` etc.).
    pub output: String,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

pub fn load_merge_config(text: &str) -> Result<MergeConfig, MergeError> {
    let config: MergeConfig =
        serde_yaml::from_str(text).map_err(|e| MergeError::Config(e.to_string()))?;
    if config.inputs.is_empty() {
        return Err(MergeError::Config(
            "at least one input is required".to_string(),
        ));
    }
    Ok(config)
}

pub fn load_merge_config_file(path: &Path) -> Result<(MergeConfig, PathBuf), MergeError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MergeError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = load_merge_config(&text)?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((config, base))
}

/// What one input contributed to the merge.
#[derive(Debug, Clone, Serialize)]
pub struct InputContribution {
    pub input: String,
    pub nodes_read: u64,
    pub edges_read: u64,
    pub nodes_added: u64,
    pub edges_added: u64,
}

/// The merge report written next to the outputs.
#[derive(Debug, Clone, Serialize)]
pub struct MergeReport {
    pub output: String,
    pub inputs: Vec<InputContribution>,
    pub nodes_out: u64,
    pub edges_out: u64,
    pub duplicate_nodes_merged: u64,
    pub duplicate_edges_collapsed: u64,
    pub dangling_edges: u64,
    #[serde(skip)]
    pub manifest: FileManifest,
}

/// One artifact pair on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactPair {
    pub nodes: PathBuf,
    pub edges: PathBuf,
}

/// Resolves an input path into artifact pairs: a `*_nodes.*` file maps to
/// its sibling edges file; a directory contributes every pair inside it, in
/// name order.
pub fn resolve_artifacts(path: &Path) -> Result<Vec<ArtifactPair>, MergeError> {
    if path.is_dir() {
        let mut pairs = Vec::new();
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| MergeError::Io(format!("{}: {e}", path.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        for entry in entries {
            if let Some(pair) = pair_for_nodes_file(&entry) {
                pairs.push(pair);
            }
        }
        if pairs.is_empty() {
            return Err(MergeError::Config(format!(
                "no artifact pairs (*_nodes.tsv / *_nodes.jsonl) in {}",
                path.display()
            )));
        }
        return Ok(pairs);
    }
    match pair_for_nodes_file(path) {
        Some(pair) => Ok(vec![pair]),
        None => Err(MergeError::Config(format!(
            "{} is not a *_nodes.tsv / *_nodes.jsonl artifact file or directory",
            path.display()
        ))),
    }
}

fn pair_for_nodes_file(path: &Path) -> Option<ArtifactPair> {
    let name = path.file_name()?.to_str()?;
    let (stem, ext) = name.rsplit_once('.')?;
    if !matches!(ext, "tsv" | "jsonl") || !stem.ends_with("_nodes") {
        return None;
    }
    let edges_name = format!("{}_edges.{ext}", stem.strip_suffix("_nodes")?);
    let edges = path.with_file_name(edges_name);
    if !path.is_file() || !edges.is_file() {
        return None;
    }
    Some(ArtifactPair {
        nodes: path.to_path_buf(),
        edges,
    })
}

struct KeyedRows {
    columns: Vec<String>,
    rows: IndexMap<String, RawRow>,
    origin: IndexMap<String, String>,
}

impl KeyedRows {
    fn new(kind: RowKind) -> Self {
        KeyedRows {
            columns: kind.core_columns().iter().map(|c| c.to_string()).collect(),
            rows: IndexMap::new(),
            origin: IndexMap::new(),
        }
    }

    fn union_columns(&mut self, columns: &[String]) {
        for column in columns {
            if !self.columns.contains(column) {
                self.columns.push(column.clone());
            }
        }
    }
}

/// Runs one merge. Output order is deterministic: inputs in listed order,
/// rows in input order; node ids and edge identities are unique in the
/// output, so merging an artifact with itself changes nothing.
pub fn merge(config: &MergeConfig, base: &Path) -> Result<MergeReport, MergeError> {
    let mut nodes = KeyedRows::new(RowKind::Node);
    let mut edges = KeyedRows::new(RowKind::Edge);
    let mut contributions = Vec::new();
    let mut duplicate_nodes = 0u64;
    let mut duplicate_edges = 0u64;

    for input in &config.inputs {
        let resolved = resolve_path(base, input);
        for pair in resolve_artifacts(&resolved)? {
            let label = pair.nodes.display().to_string();
            let mut contribution = InputContribution {
                input: label.clone(),
                nodes_read: 0,
                edges_read: 0,
                nodes_added: 0,
                edges_added: 0,
            };

            let node_rows = read_rows(&pair.nodes, RowKind::Node)?;
            nodes.union_columns(&node_rows.columns);
            for (index, row) in node_rows.rows.into_iter().enumerate() {
                contribution.nodes_read += 1;
                let id = row
                    .values
                    .get("id")
                    .map(PropertyValue::render_cell)
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| WriterError::Parse {
                        path: pair.nodes.display().to_string(),
                        line: index as u64 + 2,
                        reason: "node row without id".to_string(),
                    })?;
                match nodes.rows.get_mut(&id) {
                    None => {
                        nodes.rows.insert(id.clone(), row);
                        nodes.origin.insert(id, label.clone());
                        contribution.nodes_added += 1;
                    }
                    Some(existing) if *existing == row => {
                        duplicate_nodes += 1;
                    }
                    Some(existing) => match config.node_conflict {
                        NodeConflictPolicy::Error => {
                            return Err(MergeError::Conflict {
                                first: nodes.origin.get(&id).cloned().unwrap_or_default(),
                                second: label.clone(),
                                id,
                            })
                        }
                        NodeConflictPolicy::FirstWins => {
                            merge_node_rows(existing, row);
                            duplicate_nodes += 1;
                        }
                    },
                }
            }

            let edge_rows = read_rows(&pair.edges, RowKind::Edge)?;
            edges.union_columns(&edge_rows.columns);
            for row in edge_rows.rows {
                contribution.edges_read += 1;
                let mut row = normalize_edge_row(row);
                let key = edge_key(&mut row);
                if edges.rows.contains_key(&key) {
                    duplicate_edges += 1;
                    continue;
                }
                edges.rows.insert(key, row);
                contribution.edges_added += 1;
            }
            contributions.push(contribution);
        }
    }

    // Qualifier columns discovered while normalizing jsonl edge rows.
    for row in edges.rows.values() {
        for column in row.values.keys() {
            if !edges.columns.contains(column) {
                edges.columns.push(column.clone());
            }
        }
    }

    let mut dangling = 0u64;
    for row in edges.rows.values() {
        for end in ["subject", "object"] {
            let present = row
                .values
                .get(end)
                .map(PropertyValue::render_cell)
                .is_some_and(|id| nodes.rows.contains_key(&id));
            if !present {
                log::warn!(
                    "dangling edge: {} {} has no node row in the merged set",
                    end,
                    row.values
                        .get(end)
                        .map(PropertyValue::render_cell)
                        .unwrap_or_default()
                );
                dangling += 1;
                break;
            }
        }
    }

    let layout = TabularLayout {
        node_columns: nodes.columns.clone(),
        edge_columns: edges.columns.clone(),
    };
    let output_dir = resolve_path(base, &config.output_dir);
    let mut writer = ArtifactWriter::create_with_layout(
        &output_dir,
        &config.output,
        config.format,
        layout,
        false,
        UndeclaredPropertyPolicy::DropWithWarning,
    )?;
    for row in nodes.rows.values() {
        writer.write_raw_row(RowKind::Node, row)?;
    }
    for row in edges.rows.values() {
        writer.write_raw_row(RowKind::Edge, row)?;
    }
    let manifest = writer.finalize()?;

    let report = MergeReport {
        output: config.output.clone(),
        inputs: contributions,
        nodes_out: nodes.rows.len() as u64,
        edges_out: edges.rows.len() as u64,
        duplicate_nodes_merged: duplicate_nodes,
        duplicate_edges_collapsed: duplicate_edges,
        dangling_edges: dangling,
        manifest,
    };
    let report_text = serde_yaml::to_string(&report)
        .map_err(|e| MergeError::Io(format!("cannot serialize merge report: {e}")))?;
    let report_path = output_dir.join(format!("{}_merge_report.yaml", config.output));
    std::fs::write(&report_path, report_text)
        .map_err(|e| MergeError::Io(format!("cannot write {}: {e}", report_path.display())))?;
    let manifest_text = serde_yaml::to_string(&report.manifest)
        .map_err(|e| MergeError::Io(format!("cannot serialize manifest: {e}")))?;
    let manifest_path = output_dir.join(format!("{}_manifest.yaml", config.output));
    std::fs::write(&manifest_path, manifest_text)
        .map_err(|e| MergeError::Io(format!("cannot write {}: {e}", manifest_path.display())))?;
    Ok(report)
}

/// first_wins resolution: core fields from the first row, provided_by
/// unioned, property columns filled where the first row had nothing.
fn merge_node_rows(existing: &mut RawRow, incoming: RawRow) {
    let existing_provided = existing
        .values
        .get("provided_by")
        .map(as_text_list)
        .unwrap_or_default();
    let mut provided = existing_provided;
    if let Some(value) = incoming.values.get("provided_by") {
        for item in as_text_list(value) {
            if !provided.contains(&item) {
                provided.push(item);
            }
        }
    }
    if !provided.is_empty() {
        existing
            .values
            .insert("provided_by".to_string(), PropertyValue::TextList(provided));
    }
    for (column, value) in incoming.values {
        if column == "provided_by" || crate::model::NODE_CORE_COLUMNS.contains(&column.as_str()) {
            continue;
        }
        if !existing.values.contains_key(&column) {
            existing.values.insert(column, value);
        }
    }
}

/// Folds jsonl qualifier objects into plain columns so both output formats
/// carry them; the id cell still preserves the original identity hash.
fn normalize_edge_row(mut row: RawRow) -> RawRow {
    let qualifiers = std::mem::take(&mut row.qualifiers);
    for (name, value) in qualifiers {
        if !row.values.contains_key(&name) {
            row.values.insert(name, value);
        }
    }
    row
}

/// The merge key for an edge row: its id cell when present, otherwise the
/// recomputed content hash. Rows that cannot be decoded keep a synthetic
/// key derived from their raw cells.
fn edge_key(row: &mut RawRow) -> String {
    if let Some(id) = row
        .values
        .get("id")
        .map(PropertyValue::render_cell)
        .filter(|s| !s.is_empty())
    {
        return id;
    }
    let (decoded, _report) = decode_edge(row);
    let key = match decoded {
        Some(edge) => edge_identity(&edge),
        None => {
            let raw: Vec<String> = row.values.values().map(PropertyValue::render_cell).collect();
            format!("raw:{}", raw.join("\u{1f}"))
        }
    };
    row.values
        .insert("id".to_string(), PropertyValue::Text(key.clone()));
    key
}

/// Counts over one artifact pair: nodes, edges, per-category and
/// per-predicate totals, and dangling edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: u64,
    pub edges: u64,
    pub categories: BTreeMap<String, u64>,
    pub predicates: BTreeMap<String, u64>,
    pub dangling_edges: u64,
}

/// Computes [`GraphStats`] for the artifact at `path` (a directory with one
/// pair, or a `*_nodes.*` file).
pub fn stats(path: &Path) -> Result<GraphStats, MergeError> {
    let pairs = resolve_artifacts(path)?;
    let mut stats = GraphStats::default();
    let mut node_ids = std::collections::HashSet::new();
    for pair in &pairs {
        let node_rows = read_rows(&pair.nodes, RowKind::Node)?;
        for row in &node_rows.rows {
            stats.nodes += 1;
            if let Some(id) = row.values.get("id") {
                node_ids.insert(id.render_cell());
            }
            if let Some(value) = row.values.get("category") {
                for category in as_text_list(value) {
                    *stats.categories.entry(category).or_default() += 1;
                }
            }
        }
        let edge_rows = read_rows(&pair.edges, RowKind::Edge)?;
        for row in &edge_rows.rows {
            stats.edges += 1;
            if let Some(predicate) = row.values.get("predicate") {
                *stats.predicates.entry(predicate.render_cell()).or_default() += 1;
            }
            let connected = ["subject", "object"].iter().all(|end| {
                row.values
                    .get(*end)
                    .map(PropertyValue::render_cell)
                    .is_some_and(|id| node_ids.contains(&id))
            });
            if !connected {
                stats.dangling_edges += 1;
            }
        }
    }
    Ok(stats)
}
