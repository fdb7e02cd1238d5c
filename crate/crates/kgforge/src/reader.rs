//! Streaming record readers for CSV, JSON-lines, and path-addressed JSON
//! sources.
//!
//! CSV and JSONL streams hold one line in memory at a time, so resident
//! memory stays constant regardless of file length. The `json` format parses
//! the whole document up front because record paths need random access —
//! that is the one documented exception to the bounded-memory contract.
//!
//! Malformed rows (arity mismatches, failed coercions, invalid UTF-8, broken
//! JSON lines) are rejected with a warning and the stream continues; only
//! real I/O failures abort.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::config::{ColumnType, Compression, DeclaredColumn, HeaderMode, ReaderConfig, ReaderFormat};
use crate::model::PropertyValue;

/// How many rejection details a stream retains; everything past the cap is
/// still counted.
pub const REJECTION_DETAIL_CAP: usize = 100;

#[derive(Debug, Error)]
pub enum ReaderError {
    #[error("i/o error reading {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("header error in {file}: {reason}")]
    Header { file: String, reason: String },
    #[error("record path '{path}' not found in {file}")]
    PathNotFound { file: String, path: String },
    #[error("record path '{path}' in {file} does not point at an array")]
    PathNotArray { file: String, path: String },
    #[error("cannot open {file}: {reason}")]
    Open { file: String, reason: String },
}

/// Where a record came from: source file plus 1-based line (or array element)
/// index. Monotonically increasing across a stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLocation {
    file: Arc<str>,
    line: u64,
}

impl SourceLocation {
    pub fn new(file: impl AsRef<str>, line: u64) -> Self {
        SourceLocation {
            file: Arc::from(file.as_ref()),
            line,
        }
    }

    pub fn file(&self) -> &str {
        &self.file
    }

    pub fn line(&self) -> u64 {
        self.line
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file, self.line)
    }
}

/// One source row or object: an ordered field → value mapping with unique
/// field names.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    fields: IndexMap<String, PropertyValue>,
    location: SourceLocation,
}

impl Record {
    pub fn new(location: SourceLocation) -> Self {
        Record {
            fields: IndexMap::new(),
            location,
        }
    }

    /// Adds a field; duplicate names are an error.
    pub fn insert(&mut self, name: String, value: PropertyValue) -> Result<(), String> {
        if self.fields.contains_key(&name) {
            return Err(format!("duplicate field '{name}'"));
        }
        self.fields.insert(name, value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&PropertyValue> {
        self.fields.get(name)
    }

    /// Text view of a field, in cell form.
    pub fn get_text(&self, name: &str) -> Option<String> {
        self.fields.get(name).map(PropertyValue::render_cell)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.fields.contains_key(name)
    }

    pub fn fields(&self) -> &IndexMap<String, PropertyValue> {
        &self.fields
    }

    pub fn location(&self) -> &SourceLocation {
        &self.location
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

/// A record the stream refused, with the reason.
#[derive(Debug, Clone)]
pub struct Rejection {
    pub location: SourceLocation,
    pub reason: String,
}

enum StreamKind {
    Csv {
        input: Box<dyn BufRead>,
        columns: Vec<DeclaredColumn>,
        delimiter: char,
        comment: char,
        quote: char,
        line_no: u64,
        buf: Vec<u8>,
    },
    Jsonl {
        input: Box<dyn BufRead>,
        line_no: u64,
        buf: Vec<u8>,
    },
    Json {
        elements: std::vec::IntoIter<serde_json::Value>,
        index: u64,
    },
}

/// A single-consumer cursor yielding each retained record exactly once, in
/// source order.
pub struct RecordStream {
    kind: StreamKind,
    file: Arc<str>,
    yielded: u64,
    rejected: u64,
    rejections: Vec<Rejection>,
    io_error: Option<ReaderError>,
}

impl fmt::Debug for RecordStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RecordStream")
            .field("file", &self.file)
            .field("yielded", &self.yielded)
            .field("rejected", &self.rejected)
            .finish()
    }
}

/// Opens a stream over a local file, applying gzip decompression when the
/// source says so or the name ends in `.gz`.
pub fn open_path(
    path: &Path,
    cfg: &ReaderConfig,
    compression: Compression,
) -> Result<RecordStream, ReaderError> {
    let label = path.display().to_string();
    let file = File::open(path).map_err(|source| ReaderError::Io {
        file: label.clone(),
        source,
    })?;
    let gz = compression == Compression::Gzip
        || path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("gz"));
    let input: Box<dyn BufRead> = if gz {
        Box::new(BufReader::new(flate2::read::GzDecoder::new(file)))
    } else {
        Box::new(BufReader::new(file))
    };
    open_stream(input, &label, cfg)
}

/// Opens a stream over an arbitrary byte stream, dispatching on the
/// configured format.
pub fn open_stream(
    input: Box<dyn BufRead>,
    file_label: &str,
    cfg: &ReaderConfig,
) -> Result<RecordStream, ReaderError> {
    match cfg.format {
        ReaderFormat::Csv => open_csv_stream(input, file_label, cfg),
        ReaderFormat::Jsonl => Ok(open_jsonl_stream(input, file_label)),
        ReaderFormat::Json => open_json_stream(input, file_label, cfg),
    }
}

/// CSV/TSV reader: resolves the header per `header_mode`, skips blank lines
/// and lines whose first non-blank character is the comment character, and
/// coerces declared column types.
pub fn open_csv_stream(
    mut input: Box<dyn BufRead>,
    file_label: &str,
    cfg: &ReaderConfig,
) -> Result<RecordStream, ReaderError> {
    let file: Arc<str> = Arc::from(file_label);
    let delimiter = cfg.effective_delimiter(file_label);
    let comment = cfg.comment;
    let quote = cfg.quote;

    let mut line_no = 0u64;
    let mut buf = Vec::new();
    let header_err = |reason: String| ReaderError::Header {
        file: file_label.to_string(),
        reason,
    };

    let columns: Vec<DeclaredColumn> = match cfg.header_mode {
        HeaderMode::None => cfg.columns.clone(),
        HeaderMode::Infer => {
            let mut found = None;
            while let Some(line) = read_line(&mut input, &mut buf, &file, &mut line_no)? {
                let line = match line {
                    Ok(text) => text,
                    Err(_) => {
                        return Err(header_err(format!("line {line_no}: invalid UTF-8 in header region")))
                    }
                };
                if is_blank(&line) || is_comment(&line, comment) {
                    continue;
                }
                found = Some(line);
                break;
            }
            match found {
                Some(line) => header_columns(&line, delimiter, quote, &cfg.columns, &header_err)?,
                // A file of only comments or blanks streams as empty.
                None => Vec::new(),
            }
        }
        HeaderMode::Explicit(row_index) => {
            let mut header_line = None;
            while line_no < row_index {
                match read_line(&mut input, &mut buf, &file, &mut line_no)? {
                    Some(Ok(text)) => header_line = Some(text),
                    Some(Err(_)) => header_line = None,
                    None => {
                        return Err(header_err(format!(
                            "explicit header row {row_index} is beyond the file ({line_no} lines)"
                        )))
                    }
                }
            }
            let line = header_line
                .ok_or_else(|| header_err(format!("header row {row_index}: invalid UTF-8")))?;
            header_columns(&line, delimiter, quote, &cfg.columns, &header_err)?
        }
    };

    Ok(RecordStream {
        kind: StreamKind::Csv {
            input,
            columns,
            delimiter,
            comment,
            quote,
            line_no,
            buf,
        },
        file,
        yielded: 0,
        rejected: 0,
        rejections: Vec::new(),
        io_error: None,
    })
}

/// JSON-lines reader: each nonblank line is one object; nested objects are
/// flattened with dot-joined keys and scalar arrays become text lists.
pub fn open_jsonl_stream(input: Box<dyn BufRead>, file_label: &str) -> RecordStream {
    RecordStream {
        kind: StreamKind::Jsonl {
            input,
            line_no: 0,
            buf: Vec::new(),
        },
        file: Arc::from(file_label),
        yielded: 0,
        rejected: 0,
        rejections: Vec::new(),
        io_error: None,
    }
}

/// JSON reader: parses the whole document and navigates the configured
/// dot-separated record path, which must land on an array.
pub fn open_json_stream(
    mut input: Box<dyn BufRead>,
    file_label: &str,
    cfg: &ReaderConfig,
) -> Result<RecordStream, ReaderError> {
    let path = cfg.record_path.clone().unwrap_or_default();
    if path.is_empty() {
        return Err(ReaderError::Open {
            file: file_label.to_string(),
            reason: "json format requires record_path".to_string(),
        });
    }
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|source| ReaderError::Io {
            file: file_label.to_string(),
            source,
        })?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| ReaderError::Open {
            file: file_label.to_string(),
            reason: format!("invalid JSON document: {e}"),
        })?;
    let mut cursor = &doc;
    for key in path.split('.') {
        cursor = cursor
            .as_object()
            .and_then(|o| o.get(key))
            .ok_or_else(|| ReaderError::PathNotFound {
                file: file_label.to_string(),
                path: path.clone(),
            })?;
    }
    let elements = cursor
        .as_array()
        .cloned()
        .ok_or_else(|| ReaderError::PathNotArray {
            file: file_label.to_string(),
            path,
        })?;
    Ok(RecordStream {
        kind: StreamKind::Json {
            elements: elements.into_iter(),
            index: 0,
        },
        file: Arc::from(file_label),
        yielded: 0,
        rejected: 0,
        rejections: Vec::new(),
        io_error: None,
    })
}

impl RecordStream {
    /// Yields the next retained record, or `Ok(None)` at end of stream
    /// (idempotently). I/O failures abort the stream.
    pub fn next_record(&mut self) -> Result<Option<Record>, ReaderError> {
        loop {
            let outcome = match &mut self.kind {
                StreamKind::Csv {
                    input,
                    columns,
                    delimiter,
                    comment,
                    quote,
                    line_no,
                    buf,
                } => {
                    if columns.is_empty() {
                        // Headerless empty stream (comment-only file).
                        return Ok(None);
                    }
                    match read_line(input, buf, &self.file, line_no)? {
                        None => return Ok(None),
                        Some(Err(reason)) => {
                            Err((SourceLocation { file: self.file.clone(), line: *line_no }, reason))
                        }
                        Some(Ok(line)) => {
                            if is_blank(&line) || is_comment(&line, *comment) {
                                continue;
                            }
                            let location = SourceLocation {
                                file: self.file.clone(),
                                line: *line_no,
                            };
                            csv_record(&line, columns, *delimiter, *quote, location.clone())
                                .map_err(|reason| (location, reason))
                        }
                    }
                }
                StreamKind::Jsonl { input, line_no, buf } => {
                    match read_line(input, buf, &self.file, line_no)? {
                        None => return Ok(None),
                        Some(Err(reason)) => {
                            Err((SourceLocation { file: self.file.clone(), line: *line_no }, reason))
                        }
                        Some(Ok(line)) => {
                            if is_blank(&line) {
                                continue;
                            }
                            let location = SourceLocation {
                                file: self.file.clone(),
                                line: *line_no,
                            };
                            json_line_record(&line, location.clone())
                                .map_err(|reason| (location, reason))
                        }
                    }
                }
                StreamKind::Json { elements, index } => match elements.next() {
                    None => return Ok(None),
                    Some(value) => {
                        *index += 1;
                        let location = SourceLocation {
                            file: self.file.clone(),
                            line: *index,
                        };
                        json_element_record(value, location.clone())
                            .map_err(|reason| (location, reason))
                    }
                },
            };
            match outcome {
                Ok(record) => {
                    self.yielded += 1;
                    return Ok(Some(record));
                }
                Err((location, reason)) => {
                    self.reject(location, reason);
                    continue;
                }
            }
        }
    }

    fn reject(&mut self, location: SourceLocation, reason: String) {
        log::warn!("{location}: record rejected: {reason}");
        self.rejected += 1;
        if self.rejections.len() < REJECTION_DETAIL_CAP {
            self.rejections.push(Rejection { location, reason });
        }
    }

    /// Count of records rejected so far (warn-and-continue).
    pub fn rejected_count(&self) -> u64 {
        self.rejected
    }

    /// Details for the first [`REJECTION_DETAIL_CAP`] rejections.
    pub fn rejections(&self) -> &[Rejection] {
        &self.rejections
    }

    pub fn yielded_count(&self) -> u64 {
        self.yielded
    }

    /// The I/O error that stopped iteration, if the `Iterator` view was used.
    pub fn take_io_error(&mut self) -> Option<ReaderError> {
        self.io_error.take()
    }
}

impl Iterator for RecordStream {
    type Item = Record;

    /// Iterator view for convenience; an I/O failure ends iteration and is
    /// retrievable through [`RecordStream::take_io_error`].
    fn next(&mut self) -> Option<Record> {
        match self.next_record() {
            Ok(item) => item,
            Err(e) => {
                self.io_error = Some(e);
                None
            }
        }
    }
}

/// Reads one physical line (without its terminator). Returns
/// `Some(Err(reason))` for invalid UTF-8 so the caller can reject just that
/// line and keep going.
#[allow(clippy::type_complexity)]
fn read_line(
    input: &mut Box<dyn BufRead>,
    buf: &mut Vec<u8>,
    file: &Arc<str>,
    line_no: &mut u64,
) -> Result<Option<Result<String, String>>, ReaderError> {
    buf.clear();
    let n = input.read_until(b'\n', buf).map_err(|source| ReaderError::Io {
        file: file.to_string(),
        source,
    })?;
    if n == 0 {
        return Ok(None);
    }
    *line_no += 1;
    if buf.last() == Some(&b'\n') {
        buf.pop();
        if buf.last() == Some(&b'\r') {
            buf.pop();
        }
    }
    match std::str::from_utf8(buf) {
        Ok(s) => Ok(Some(Ok(s.to_string()))),
        Err(_) => Ok(Some(Err("invalid UTF-8".to_string()))),
    }
}

fn is_blank(line: &str) -> bool {
    line.trim().is_empty()
}

fn is_comment(line: &str, comment: char) -> bool {
    line.trim_start().starts_with(comment)
}

/// Splits one line into cells. The quote character wraps fields; a doubled
/// quote inside a quoted field is a literal quote. An unterminated quote
/// rejects the line.
fn split_cells(line: &str, delimiter: char, quote: char) -> Result<Vec<String>, String> {
    let mut cells = Vec::new();
    let mut cell = String::new();
    let mut chars = line.chars().peekable();
    let mut in_quotes = false;
    while let Some(c) = chars.next() {
        if in_quotes {
            if c == quote {
                if chars.peek() == Some(&quote) {
                    chars.next();
                    cell.push(quote);
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push(c);
            }
        } else if c == quote && cell.is_empty() {
            in_quotes = true;
        } else if c == delimiter {
            cells.push(std::mem::take(&mut cell));
        } else {
            cell.push(c);
        }
    }
    if in_quotes {
        return Err("unterminated quoted field".to_string());
    }
    cells.push(cell);
    Ok(cells)
}

fn header_columns(
    line: &str,
    delimiter: char,
    quote: char,
    declared: &[DeclaredColumn],
    header_err: &dyn Fn(String) -> ReaderError,
) -> Result<Vec<DeclaredColumn>, ReaderError> {
    let names = split_cells(line, delimiter, quote).map_err(|e| header_err(e.to_string()))?;
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(header_err(format!("empty header name in column {}", i + 1)));
        }
        if names[..i].contains(name) {
            return Err(header_err(format!("duplicate header name '{name}'")));
        }
    }
    if declared.is_empty() {
        return Ok(names
            .into_iter()
            .map(|name| DeclaredColumn {
                name,
                column_type: ColumnType::Text,
            })
            .collect());
    }
    let declared_names: Vec<&str> = declared.iter().map(|c| c.name.as_str()).collect();
    let header_names: Vec<&str> = names.iter().map(String::as_str).collect();
    if declared_names != header_names {
        return Err(header_err(format!(
            "header {header_names:?} does not match declared columns {declared_names:?}"
        )));
    }
    Ok(declared.to_vec())
}

fn csv_record(
    line: &str,
    columns: &[DeclaredColumn],
    delimiter: char,
    quote: char,
    location: SourceLocation,
) -> Result<Record, String> {
    let cells = split_cells(line, delimiter, quote)?;
    if cells.len() != columns.len() {
        return Err(format!(
            "row has {} cells, expected {}",
            cells.len(),
            columns.len()
        ));
    }
    let mut record = Record::new(location);
    for (column, cell) in columns.iter().zip(cells) {
        let value = coerce_cell(cell, column)?;
        record.insert(column.name.clone(), value)?;
    }
    Ok(record)
}

/// Applies the declared column type. Empty cells stay as empty text so
/// records always carry the full column set; coercion trims whitespace.
fn coerce_cell(cell: String, column: &DeclaredColumn) -> Result<PropertyValue, String> {
    if cell.is_empty() || column.column_type == ColumnType::Text {
        return Ok(PropertyValue::Text(cell));
    }
    let trimmed = cell.trim();
    match column.column_type {
        ColumnType::Text => unreachable!(),
        ColumnType::Int => trimmed
            .parse::<i64>()
            .map(PropertyValue::Integer)
            .map_err(|_| format!("column '{}': cannot coerce {cell:?} to int", column.name)),
        ColumnType::Float => trimmed
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(PropertyValue::Decimal)
            .ok_or_else(|| format!("column '{}': cannot coerce {cell:?} to float", column.name)),
        ColumnType::Bool => match trimmed.to_ascii_lowercase().as_str() {
            "true" => Ok(PropertyValue::Boolean(true)),
            "false" => Ok(PropertyValue::Boolean(false)),
            _ => Err(format!(
                "column '{}': cannot coerce {cell:?} to bool",
                column.name
            )),
        },
    }
}

fn json_line_record(line: &str, location: SourceLocation) -> Result<Record, String> {
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    json_element_record(value, location)
}

fn json_element_record(value: serde_json::Value, location: SourceLocation) -> Result<Record, String> {
    let serde_json::Value::Object(map) = value else {
        return Err("JSON record is not an object".to_string());
    };
    let mut record = Record::new(location);
    flatten_object(map, None, &mut record)?;
    Ok(record)
}

/// Flattens nested objects with dot-joined keys; scalar arrays become text
/// lists; nulls are dropped; nested values inside arrays are rejected.
fn flatten_object(
    map: serde_json::Map<String, serde_json::Value>,
    prefix: Option<&str>,
    record: &mut Record,
) -> Result<(), String> {
    for (key, value) in map {
        let name = match prefix {
            Some(p) => format!("{p}.{key}"),
            None => key,
        };
        match value {
            serde_json::Value::Null => {}
            serde_json::Value::Object(inner) => flatten_object(inner, Some(&name), record)?,
            serde_json::Value::Array(items) => {
                let mut texts = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        serde_json::Value::String(s) => texts.push(s),
                        serde_json::Value::Number(n) => texts.push(n.to_string()),
                        serde_json::Value::Bool(b) => texts.push(b.to_string()),
                        serde_json::Value::Null => {}
                        _ => {
                            return Err(format!("field '{name}': nested array values unsupported"))
                        }
                    }
                }
                let value = PropertyValue::text_list(texts)
                    .map_err(|e| format!("field '{name}': {e}"))?;
                record.insert(name, value)?;
            }
            serde_json::Value::String(s) => record.insert(name, PropertyValue::Text(s))?,
            serde_json::Value::Bool(b) => record.insert(name, PropertyValue::Boolean(b))?,
            serde_json::Value::Number(n) => {
                let value = if let Some(i) = n.as_i64() {
                    PropertyValue::Integer(i)
                } else {
                    PropertyValue::Decimal(n.as_f64().ok_or_else(|| {
                        format!("field '{name}': unrepresentable number")
                    })?)
                };
                record.insert(name, value)?;
            }
        }
    }
    Ok(())
}
