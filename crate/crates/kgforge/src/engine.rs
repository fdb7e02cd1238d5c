//! The ingest lifecycle: streams records through filters into transform
//! logic, validates everything handed to the write sink, and finalizes the
//! artifact pair plus a run report.
//!
//! Lifecycle order is strict: `prepare_data` → open writers →
//! `on_data_begin` → per-record dispatch (or one `transform` call over the
//! whole stream) → `on_data_end` → finalize. A run is single-threaded end to
//! end; parallelism happens across independent runs.
//!
//! Transform logic is either the config's declarative mapping rules or a
//! [`HookSet`] of user functions. Hook sets are bound to configs by name
//! through the in-process [`register_hooks`] registry.

use std::cell::Cell;
use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::rc::Rc;
use std::sync::{Arc, OnceLock, RwLock};
use std::time::Instant;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::config::{
    resolve_path, Assignment, Compression, EdgeRule, IngestConfig, LogLevel, MappingSpec,
    NodeRule, SourceFileSpec, TransformMode,
};
use crate::filter::{compile_filters, FilterSet};
use crate::model::{
    parse_curie, validate_edge, validate_node, GraphItem, KgEdge, KgNode, ModelError,
    PropertyValue, SchemaSubset, SharedSchema,
};
use crate::reader::{open_path, Record, RecordStream, ReaderError, SourceLocation};
use crate::writer::{ArtifactWriter, FileManifest, WriterError};

/// Upper bound on retained log entries per run; overflow is counted.
pub const RUN_LOG_CAP: usize = 10_000;

/// How many rejection details the run report retains.
pub const REPORT_SAMPLE_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Reader(#[from] ReaderError),
    #[error(transparent)]
    Writer(WriterError),
    #[error("hook '{hook}' failed: {message}")]
    Hook { hook: &'static str, message: String },
    #[error("record at {location} failed and continue_on_record_error is false: {message}")]
    RecordFailed { location: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Error surfaced to transform logic by [`TransformContext::write`].
#[derive(Debug, Error)]
pub enum WriteError {
    #[error("validation failed:\n{0}")]
    Validation(crate::model::ValidationReport),
    #[error(transparent)]
    Writer(WriterError),
    #[error("write sink is not open (writers open after prepare_data)")]
    NotOpen,
    #[error("write sink failed fatally; the run is aborting")]
    Fatal,
}

/// Error a hook returns to reject the current record (or abort the run, for
/// lifecycle hooks).
#[derive(Debug)]
pub struct HookError(String);

impl HookError {
    pub fn msg(message: impl Into<String>) -> Self {
        HookError(message.into())
    }
}

impl fmt::Display for HookError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for HookError {}

impl From<String> for HookError {
    fn from(value: String) -> Self {
        HookError(value)
    }
}

impl From<&str> for HookError {
    fn from(value: &str) -> Self {
        HookError(value.to_string())
    }
}

impl From<WriteError> for HookError {
    fn from(value: WriteError) -> Self {
        HookError(value.to_string())
    }
}

impl From<ModelError> for HookError {
    fn from(value: ModelError) -> Self {
        HookError(value.to_string())
    }
}

pub type HookResult = Result<(), HookError>;

type LifecycleHook = Box<dyn FnMut(&mut TransformContext) -> HookResult>;
type RecordHook = Box<dyn FnMut(&mut TransformContext, &Record) -> HookResult>;
type StreamHook = Box<dyn FnMut(&mut TransformContext, &mut FilteredStream) -> HookResult>;

enum PrimaryHook {
    /// Called for every single record from the reader.
    Record(RecordHook),
    /// Called once; the hook iterates the (already filtered) stream itself.
    All(StreamHook),
}

/// The hook functions of one transform: exactly one primary hook
/// (per-record or whole-stream), plus optional lifecycle hooks.
pub struct HookSet {
    prepare_data: Option<LifecycleHook>,
    on_data_begin: Option<LifecycleHook>,
    on_data_end: Option<LifecycleHook>,
    primary: PrimaryHook,
}

impl HookSet {
    /// A hook set whose primary hook runs once per record.
    pub fn transform_record(
        hook: impl FnMut(&mut TransformContext, &Record) -> HookResult + 'static,
    ) -> Self {
        HookSet {
            prepare_data: None,
            on_data_begin: None,
            on_data_end: None,
            primary: PrimaryHook::Record(Box::new(hook)),
        }
    }

    /// A hook set whose primary hook is called once and iterates the stream
    /// itself.
    pub fn transform(
        hook: impl FnMut(&mut TransformContext, &mut FilteredStream) -> HookResult + 'static,
    ) -> Self {
        HookSet {
            prepare_data: None,
            on_data_begin: None,
            on_data_end: None,
            primary: PrimaryHook::All(Box::new(hook)),
        }
    }

    pub fn with_prepare_data(
        mut self,
        hook: impl FnMut(&mut TransformContext) -> HookResult + 'static,
    ) -> Self {
        self.prepare_data = Some(Box::new(hook));
        self
    }

    pub fn with_on_data_begin(
        mut self,
        hook: impl FnMut(&mut TransformContext) -> HookResult + 'static,
    ) -> Self {
        self.on_data_begin = Some(Box::new(hook));
        self
    }

    pub fn with_on_data_end(
        mut self,
        hook: impl FnMut(&mut TransformContext) -> HookResult + 'static,
    ) -> Self {
        self.on_data_end = Some(Box::new(hook));
        self
    }
}

type HookFactory = Arc<dyn Fn() -> HookSet + Send + Sync>;

fn registry() -> &'static RwLock<HashMap<String, HookFactory>> {
    static REGISTRY: OnceLock<RwLock<HashMap<String, HookFactory>>> = OnceLock::new();
    REGISTRY.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Registers transform hooks under a name; configs reference the name via
/// `transform: {hooks: <name>}`. The factory runs once per ingest run.
pub fn register_hooks(name: &str, factory: impl Fn() -> HookSet + Send + Sync + 'static) {
    registry()
        .write()
        .expect("hook registry poisoned")
        .insert(name.to_string(), Arc::new(factory));
}

/// Builds a fresh hook set for a registered name.
pub fn lookup_hooks(name: &str) -> Option<HookSet> {
    let factory = registry()
        .read()
        .expect("hook registry poisoned")
        .get(name)
        .cloned()?;
    Some(factory())
}

pub fn registered_hook_names() -> Vec<String> {
    let mut names: Vec<String> = registry()
        .read()
        .expect("hook registry poisoned")
        .keys()
        .cloned()
        .collect();
    names.sort();
    names
}

#[derive(Default)]
struct RunCounters {
    records_in: Cell<u64>,
    records_filtered: Cell<u64>,
    records_rejected: Cell<u64>,
    nodes_out: Cell<u64>,
    edges_out: Cell<u64>,
}

impl RunCounters {
    fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            records_in: self.records_in.get(),
            records_filtered: self.records_filtered.get(),
            records_rejected: self.records_rejected.get(),
            nodes_out: self.nodes_out.get(),
            edges_out: self.edges_out.get(),
        }
    }
}

/// The run's counters at one point in time. Monotonically nondecreasing
/// during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CounterSnapshot {
    pub records_in: u64,
    pub records_filtered: u64,
    pub records_rejected: u64,
    pub nodes_out: u64,
    pub edges_out: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub level: LogLevel,
    pub message: String,
}

/// In-memory run log with a level threshold and a retention cap.
#[derive(Debug)]
pub struct RunLog {
    threshold: LogLevel,
    entries: Vec<LogEntry>,
    dropped: u64,
}

impl RunLog {
    fn new(threshold: LogLevel) -> Self {
        RunLog {
            threshold,
            entries: Vec::new(),
            dropped: 0,
        }
    }

    pub fn enabled(&self, level: LogLevel) -> bool {
        level >= self.threshold
    }

    fn push(&mut self, level: LogLevel, message: String) {
        match level {
            LogLevel::Debug => log::debug!("{message}"),
            LogLevel::Info => log::info!("{message}"),
            LogLevel::Warning => log::warn!("{message}"),
            LogLevel::Error => log::error!("{message}"),
        }
        if !self.enabled(level) {
            return;
        }
        if self.entries.len() >= RUN_LOG_CAP {
            self.dropped += 1;
            return;
        }
        self.entries.push(LogEntry { level, message });
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }
}

/// One rejected record in the run report.
#[derive(Debug, Clone, Serialize)]
pub struct RejectionSample {
    pub file: String,
    pub line: u64,
    pub stage: &'static str,
    pub reason: String,
}

/// What a finished run reports: final counters, rejection samples (first
/// [`REPORT_SAMPLE_CAP`] with their source locations), and wall time. The
/// YAML summary lands next to the outputs as `<name>_report.yaml`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub name: String,
    pub counters: CounterSnapshot,
    pub rejections_total: u64,
    pub rejection_samples: Vec<RejectionSample>,
    pub wall_time_ms: u64,
    #[serde(skip)]
    pub manifest: FileManifest,
    #[serde(skip)]
    pub log: Vec<LogEntry>,
}

/// The per-run facade handed to transform logic: the validated write sink,
/// run-scoped state, the log channel, and live counters.
pub struct TransformContext {
    writer: Option<ArtifactWriter>,
    schema: SharedSchema,
    state: IndexMap<String, PropertyValue>,
    log: RunLog,
    counters: Rc<RunCounters>,
    location: Option<SourceLocation>,
    fatal: Option<WriterError>,
}

impl TransformContext {
    /// Validates the item against the schema, then forwards it to the
    /// writer. Validation errors and undeclared-property errors reject just
    /// this record; I/O failures abort the run.
    pub fn write(&mut self, item: impl Into<GraphItem>) -> Result<(), WriteError> {
        let item = item.into();
        let report = match &item {
            GraphItem::Node(node) => validate_node(node, &self.schema),
            GraphItem::Edge(edge) => validate_edge(edge, &self.schema),
        };
        if !report.is_clean() {
            let location = self
                .location
                .as_ref()
                .map(|l| format!(" (record at {l})"))
                .unwrap_or_default();
            for violation in report.errors() {
                let message = format!("{}{location}", violation.message);
                self.log.push(LogLevel::Error, message);
            }
            return Err(WriteError::Validation(report));
        }
        for violation in report.warnings() {
            self.log.push(LogLevel::Warning, violation.message.clone());
        }
        let Some(writer) = self.writer.as_mut() else {
            return Err(WriteError::NotOpen);
        };
        let outcome = match &item {
            GraphItem::Node(node) => writer.write_node(node),
            GraphItem::Edge(edge) => writer.write_edge(edge),
        };
        for warning in writer.take_warnings() {
            self.log.push(LogLevel::Warning, warning);
        }
        match outcome {
            Ok(()) => {
                match item {
                    GraphItem::Node(_) => {
                        self.counters.nodes_out.set(self.counters.nodes_out.get() + 1)
                    }
                    GraphItem::Edge(_) => {
                        self.counters.edges_out.set(self.counters.edges_out.get() + 1)
                    }
                }
                Ok(())
            }
            Err(e) if e.is_record_scoped() => Err(WriteError::Writer(e)),
            Err(e) => {
                self.fatal = Some(e);
                Err(WriteError::Fatal)
            }
        }
    }

    /// Run-scoped mutable state: empty at run start, shared across all hook
    /// invocations, discarded at run end.
    pub fn state(&self) -> &IndexMap<String, PropertyValue> {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut IndexMap<String, PropertyValue> {
        &mut self.state
    }

    pub fn log(&mut self, level: LogLevel, message: impl Into<String>) {
        self.log.push(level, message.into());
    }

    pub fn log_debug(&mut self, message: impl Into<String>) {
        self.log(LogLevel::Debug, message);
    }

    pub fn log_info(&mut self, message: impl Into<String>) {
        self.log(LogLevel::Info, message);
    }

    pub fn log_warning(&mut self, message: impl Into<String>) {
        self.log(LogLevel::Warning, message);
    }

    pub fn log_error(&mut self, message: impl Into<String>) {
        self.log(LogLevel::Error, message);
    }

    /// Source location of the record currently being dispatched.
    pub fn location(&self) -> Option<&SourceLocation> {
        self.location.as_ref()
    }

    pub fn counters(&self) -> CounterSnapshot {
        self.counters.snapshot()
    }

    pub fn schema(&self) -> &SchemaSubset {
        &self.schema
    }
}

struct PendingSource {
    path: PathBuf,
    compression: Compression,
}

/// The filtered record stream a whole-stream transform iterates: records
/// from all source files in listed order, filter-rejected records skipped,
/// counters updated as records are consumed.
pub struct FilteredStream<'a> {
    pending: std::vec::IntoIter<PendingSource>,
    current: Option<RecordStream>,
    current_rejected: u64,
    reader_cfg: &'a crate::config::ReaderConfig,
    filters: &'a FilterSet,
    counters: Rc<RunCounters>,
    reader_rejections: Vec<RejectionSample>,
    io_error: Option<ReaderError>,
}

impl<'a> FilteredStream<'a> {
    /// Yields the next accepted record, opening source files as needed.
    pub fn try_next(&mut self) -> Result<Option<Record>, ReaderError> {
        loop {
            if self.current.is_none() {
                match self.pending.next() {
                    None => return Ok(None),
                    Some(source) => {
                        let stream =
                            open_path(&source.path, self.reader_cfg, source.compression)?;
                        self.current = Some(stream);
                        self.current_rejected = 0;
                    }
                }
            }
            let stream = self.current.as_mut().expect("stream just opened");
            let next = stream.next_record()?;
            self.sync_rejections();
            match next {
                Some(record) => {
                    self.counters
                        .records_in
                        .set(self.counters.records_in.get() + 1);
                    if !self.filters.accept(&record) {
                        self.counters
                            .records_filtered
                            .set(self.counters.records_filtered.get() + 1);
                        continue;
                    }
                    return Ok(Some(record));
                }
                None => {
                    self.collect_rejection_samples();
                    self.current = None;
                }
            }
        }
    }

    fn sync_rejections(&mut self) {
        if let Some(stream) = &self.current {
            let total = stream.rejected_count();
            if total > self.current_rejected {
                let delta = total - self.current_rejected;
                self.current_rejected = total;
                self.counters
                    .records_rejected
                    .set(self.counters.records_rejected.get() + delta);
            }
        }
    }

    fn collect_rejection_samples(&mut self) {
        if let Some(stream) = &self.current {
            for rejection in stream.rejections() {
                if self.reader_rejections.len() >= REPORT_SAMPLE_CAP {
                    break;
                }
                self.reader_rejections.push(RejectionSample {
                    file: rejection.location.file().to_string(),
                    line: rejection.location.line(),
                    stage: "reader",
                    reason: rejection.reason.clone(),
                });
            }
        }
    }

    /// Drains whatever is left (used when the run ends early) so reader
    /// rejection samples are not lost.
    fn finish(&mut self) {
        self.sync_rejections();
        self.collect_rejection_samples();
        self.current = None;
    }
}

impl Iterator for FilteredStream<'_> {
    type Item = Record;

    /// Iterator view for hook ergonomics; an I/O failure ends iteration and
    /// aborts the run once the hook returns.
    fn next(&mut self) -> Option<Record> {
        match self.try_next() {
            Ok(item) => item,
            Err(e) => {
                self.io_error = Some(e);
                None
            }
        }
    }
}

/// Evaluation failure of one mapping assignment; rejects the record.
#[derive(Debug, Error)]
pub enum MappingError {
    #[error("mapping references column '{column}', absent from the record")]
    MissingColumn { column: String },
    #[error("mapping produced an invalid CURIE: {0}")]
    Curie(ModelError),
    #[error("mapping assignment for '{field}' produced an empty value")]
    EmptyRequired { field: String },
}

fn eval_assignment(
    assignment: &Assignment,
    record: &Record,
) -> Result<PropertyValue, MappingError> {
    match assignment {
        Assignment::Column(column) => record
            .get(column)
            .cloned()
            .ok_or_else(|| MappingError::MissingColumn {
                column: column.clone(),
            }),
        Assignment::Const(text) => Ok(PropertyValue::Text(text.clone())),
        Assignment::Curie { prefix, column } => {
            let cell = record
                .get(column)
                .ok_or_else(|| MappingError::MissingColumn {
                    column: column.clone(),
                })?
                .render_cell();
            Ok(PropertyValue::Text(format!("{prefix}:{cell}")))
        }
    }
}

fn eval_curie(
    assignment: &Assignment,
    record: &Record,
    field: &str,
) -> Result<crate::model::Curie, MappingError> {
    let text = eval_assignment(assignment, record)?.render_cell();
    if text.is_empty() {
        return Err(MappingError::EmptyRequired {
            field: field.to_string(),
        });
    }
    parse_curie(&text).map_err(MappingError::Curie)
}

fn eval_optional_text(
    assignment: &Assignment,
    record: &Record,
) -> Result<Option<String>, MappingError> {
    let text = eval_assignment(assignment, record)?.render_cell();
    Ok(if text.is_empty() { None } else { Some(text) })
}

fn guard_passes(guard: &Option<String>, record: &Record) -> bool {
    match guard {
        None => true,
        Some(column) => record.get(column).is_some_and(|v| !v.is_empty_value()),
    }
}

fn eval_node_rule(rule: &NodeRule, record: &Record) -> Result<Option<KgNode>, MappingError> {
    if !guard_passes(&rule.guard, record) {
        return Ok(None);
    }
    let id = eval_curie(&rule.id, record, "id")?;
    let mut category = Vec::with_capacity(rule.category.len());
    for assignment in rule.category.iter() {
        category.push(eval_curie(assignment, record, "category")?);
    }
    let mut node = KgNode::new(id, category);
    if let Some(assignment) = &rule.name {
        node.name = eval_optional_text(assignment, record)?;
    }
    if let Some(assignment) = &rule.description {
        node.description = eval_optional_text(assignment, record)?;
    }
    for assignment in rule.provided_by.iter() {
        if let Some(text) = eval_optional_text(assignment, record)? {
            node.provided_by.push(text);
        }
    }
    for (name, assignment) in &rule.properties {
        let value = eval_assignment(assignment, record)?;
        if !value.is_empty_value() {
            node.properties.insert(name.clone(), value);
        }
    }
    Ok(Some(node))
}

fn eval_edge_rule(rule: &EdgeRule, record: &Record) -> Result<Option<KgEdge>, MappingError> {
    if !guard_passes(&rule.guard, record) {
        return Ok(None);
    }
    let subject = eval_curie(&rule.subject, record, "subject")?;
    let predicate = eval_curie(&rule.predicate, record, "predicate")?;
    let object = eval_curie(&rule.object, record, "object")?;
    let mut edge = KgEdge::new(subject, predicate, object);
    for assignment in rule.category.iter() {
        edge.category.push(eval_curie(assignment, record, "category")?);
    }
    if let Some(assignment) = &rule.knowledge_source {
        edge.knowledge_source = eval_optional_text(assignment, record)?;
    }
    for (name, assignment) in &rule.qualifiers {
        let value = eval_assignment(assignment, record)?;
        if !value.is_empty_value() {
            edge.qualifiers.insert(name.clone(), value);
        }
    }
    for (name, assignment) in &rule.properties {
        let value = eval_assignment(assignment, record)?;
        if !value.is_empty_value() {
            edge.properties.insert(name.clone(), value);
        }
    }
    Ok(Some(edge))
}

/// Applies every rule whose guard passes to one record, producing nodes and
/// edges in rule order. All-or-nothing: any assignment failure rejects the
/// whole record's output.
pub fn apply_mapping(
    spec: &MappingSpec,
    record: &Record,
) -> Result<Vec<GraphItem>, MappingError> {
    let mut items = Vec::new();
    for rule in &spec.nodes {
        if let Some(node) = eval_node_rule(rule, record)? {
            items.push(GraphItem::Node(node));
        }
    }
    for rule in &spec.edges {
        if let Some(edge) = eval_edge_rule(rule, record)? {
            items.push(GraphItem::Edge(edge));
        }
    }
    Ok(items)
}

/// The transform logic driving a run.
pub enum TransformLogic<'a> {
    Mapping(&'a MappingSpec),
    Hooks(HookSet),
}

/// Runs one ingest end to end. `hooks` must be present exactly when the
/// config's transform mode is `hooks`; the check happens before any file is
/// read. On abort, partial outputs are deleted.
pub fn run_ingest(
    config: &IngestConfig,
    base: &Path,
    hooks: Option<HookSet>,
) -> Result<RunReport, EngineError> {
    let logic = match (config.transform.mode(), hooks) {
        (Some(TransformMode::Mapping(spec)), None) => TransformLogic::Mapping(spec),
        (Some(TransformMode::Hooks(_)), Some(hooks)) => TransformLogic::Hooks(hooks),
        (Some(TransformMode::Mapping(_)), Some(_)) => {
            return Err(EngineError::Config(
                "hooks were supplied but the transform mode is 'mapping'".to_string(),
            ))
        }
        (Some(TransformMode::Hooks(name)), None) => {
            return Err(EngineError::Config(format!(
                "transform mode is hooks ('{name}') but no hook set was supplied"
            )))
        }
        (None, _) => {
            return Err(EngineError::Config(
                "exactly one transform mode must be set".to_string(),
            ))
        }
    };
    run_with_logic(config, base, logic)
}

/// Runs one ingest with explicit transform logic.
pub fn run_with_logic(
    config: &IngestConfig,
    base: &Path,
    logic: TransformLogic<'_>,
) -> Result<RunReport, EngineError> {
    let started = Instant::now();

    let schema: SharedSchema = match &config.schema {
        Some(path) => Arc::new(
            SchemaSubset::load(&resolve_path(base, path))
                .map_err(|e| EngineError::Config(e.to_string()))?,
        ),
        None => Arc::new(SchemaSubset::default()),
    };
    let filters = compile_filters(&config.filters)
        .map_err(|e| EngineError::Config(e.to_string()))?;
    let sources = resolve_sources(config, base)?;

    let counters = Rc::new(RunCounters::default());
    let ctx = TransformContext {
        writer: None,
        schema,
        state: IndexMap::new(),
        log: RunLog::new(config.log_level),
        counters: Rc::clone(&counters),
        location: None,
        fatal: None,
    };

    let mut run = Run {
        config,
        base,
        ctx,
        counters,
        sources: Some(sources),
        transform_rejections: Vec::new(),
        reader_rejections: Vec::new(),
        output_paths: Vec::new(),
    };
    let result = match run.execute(logic, &filters) {
        Ok(manifest) => {
            let wall_time_ms = started.elapsed().as_millis() as u64;
            run.finish_report(manifest, wall_time_ms)
        }
        Err(e) => Err(e),
    };
    result.inspect_err(|_| run.cleanup_partial_outputs())
}

struct Run<'a> {
    config: &'a IngestConfig,
    base: &'a Path,
    ctx: TransformContext,
    counters: Rc<RunCounters>,
    sources: Option<Vec<PendingSource>>,
    transform_rejections: Vec<RejectionSample>,
    reader_rejections: Vec<RejectionSample>,
    output_paths: Vec<PathBuf>,
}

impl<'a> Run<'a> {
    fn execute(
        &mut self,
        logic: TransformLogic<'_>,
        filters: &FilterSet,
    ) -> Result<FileManifest, EngineError> {
        let mut logic = logic;

        if let TransformLogic::Hooks(hooks) = &mut logic {
            if let Some(hook) = hooks.prepare_data.as_mut() {
                self.log_hook_entry("prepare_data");
                hook(&mut self.ctx).map_err(|e| EngineError::Hook {
                    hook: "prepare_data",
                    message: e.to_string(),
                })?;
            }
        }

        let output_dir = resolve_path(self.base, &self.config.writer.output_dir);
        let writer = ArtifactWriter::create(&output_dir, &self.config.name, &self.config.writer)
            .map_err(EngineError::Writer)?;
        let (node_path, edge_path) = writer.paths();
        self.output_paths = vec![node_path, edge_path];
        self.ctx.writer = Some(writer);

        if let TransformLogic::Hooks(hooks) = &mut logic {
            if let Some(hook) = hooks.on_data_begin.as_mut() {
                self.log_hook_entry("on_data_begin");
                hook(&mut self.ctx).map_err(|e| EngineError::Hook {
                    hook: "on_data_begin",
                    message: e.to_string(),
                })?;
            }
        }

        let config: &'a IngestConfig = self.config;
        let mut stream = FilteredStream {
            pending: self.sources.take().expect("sources set once").into_iter(),
            current: None,
            current_rejected: 0,
            reader_cfg: &config.reader,
            filters,
            counters: Rc::clone(&self.counters),
            reader_rejections: Vec::new(),
            io_error: None,
        };

        let dispatch_result = match &mut logic {
            TransformLogic::Mapping(spec) => {
                Self::drive_records(&mut self.ctx, &mut stream, self.config, &mut self.transform_rejections, |ctx, record| {
                    let items = apply_mapping(spec, record)
                        .map_err(|e| HookError(e.to_string()))?;
                    for item in items {
                        ctx.write(item)?;
                    }
                    Ok(())
                })
            }
            TransformLogic::Hooks(hooks) => match &mut hooks.primary {
                PrimaryHook::Record(hook) => Self::drive_records(
                    &mut self.ctx,
                    &mut stream,
                    self.config,
                    &mut self.transform_rejections,
                    |ctx, record| hook(ctx, record),
                ),
                PrimaryHook::All(hook) => {
                    self.log_hook_entry("transform_all");
                    let result = hook(&mut self.ctx, &mut stream);
                    match result {
                        Ok(()) => {
                            if let Some(io) = stream.io_error.take() {
                                Err(EngineError::Reader(io))
                            } else {
                                Ok(())
                            }
                        }
                        Err(e) => Err(EngineError::Hook {
                            hook: "transform",
                            message: e.to_string(),
                        }),
                    }
                }
            },
        };
        stream.finish();
        self.reader_rejections = std::mem::take(&mut stream.reader_rejections);
        drop(stream);
        dispatch_result?;

        if let TransformLogic::Hooks(hooks) = &mut logic {
            if let Some(hook) = hooks.on_data_end.as_mut() {
                self.log_hook_entry("on_data_end");
                hook(&mut self.ctx).map_err(|e| EngineError::Hook {
                    hook: "on_data_end",
                    message: e.to_string(),
                })?;
            }
        }

        let writer = self.ctx.writer.take().expect("writer open");
        writer.finalize().map_err(EngineError::Writer)
    }

    /// The per-record loop shared by mapping mode and `transform_record`
    /// hooks: filter, dispatch, and apply the record-error policy.
    fn drive_records(
        ctx: &mut TransformContext,
        stream: &mut FilteredStream<'_>,
        config: &IngestConfig,
        transform_rejections: &mut Vec<RejectionSample>,
        mut dispatch: impl FnMut(&mut TransformContext, &Record) -> HookResult,
    ) -> Result<(), EngineError> {
        loop {
            let record = match stream.try_next()? {
                Some(record) => record,
                None => return Ok(()),
            };
            if ctx.log.enabled(LogLevel::Debug) {
                ctx.log
                    .push(LogLevel::Debug, "hook-entry dispatch".to_string());
            }
            ctx.location = Some(record.location().clone());
            let outcome = dispatch(ctx, &record);
            ctx.location = None;
            if let Some(fatal) = ctx.fatal.take() {
                return Err(EngineError::Writer(fatal));
            }
            if let Err(e) = outcome {
                let location = record.location().clone();
                ctx.log.push(
                    LogLevel::Warning,
                    format!("{location}: record rejected by transform: {e}"),
                );
                ctx.counters
                    .records_rejected
                    .set(ctx.counters.records_rejected.get() + 1);
                if transform_rejections.len() < REPORT_SAMPLE_CAP {
                    transform_rejections.push(RejectionSample {
                        file: location.file().to_string(),
                        line: location.line(),
                        stage: "transform",
                        reason: e.to_string(),
                    });
                }
                if !config.continue_on_record_error {
                    return Err(EngineError::RecordFailed {
                        location: location.to_string(),
                        message: e.to_string(),
                    });
                }
            }
        }
    }

    fn log_hook_entry(&mut self, hook: &str) {
        if self.ctx.log.enabled(LogLevel::Debug) {
            self.ctx
                .log
                .push(LogLevel::Debug, format!("hook-entry {hook}"));
        }
    }

    fn finish_report(
        &mut self,
        manifest: FileManifest,
        wall_time_ms: u64,
    ) -> Result<RunReport, EngineError> {
        let mut rejection_samples = std::mem::take(&mut self.reader_rejections);
        for sample in std::mem::take(&mut self.transform_rejections) {
            if rejection_samples.len() >= REPORT_SAMPLE_CAP {
                break;
            }
            rejection_samples.push(sample);
        }
        let counters = self.counters.snapshot();
        let report = RunReport {
            name: self.config.name.clone(),
            counters,
            rejections_total: counters.records_rejected,
            rejection_samples,
            wall_time_ms,
            manifest,
            log: std::mem::take(&mut self.ctx.log.entries),
        };
        let output_dir = resolve_path(self.base, &self.config.writer.output_dir);
        write_yaml(
            &output_dir.join(format!("{}_report.yaml", self.config.name)),
            &report,
        )?;
        write_yaml(
            &output_dir.join(format!("{}_manifest.yaml", self.config.name)),
            &report.manifest,
        )?;
        Ok(report)
    }

    /// Aborted runs leave no partial artifacts behind.
    fn cleanup_partial_outputs(&mut self) {
        self.ctx.writer = None;
        for path in &self.output_paths {
            let _ = std::fs::remove_file(path);
        }
    }
}

fn resolve_sources(
    config: &IngestConfig,
    base: &Path,
) -> Result<Vec<PendingSource>, EngineError> {
    let mut sources = Vec::with_capacity(config.source_files.len());
    for spec in &config.source_files {
        if spec.is_url() {
            return Err(EngineError::Config(format!(
                "source '{}' is a URL; fetch it first (the CLI does this automatically)",
                spec.path
            )));
        }
        sources.push(PendingSource {
            path: resolve_path(base, &spec.path),
            compression: spec.compression,
        });
    }
    Ok(sources)
}

/// Substitutes fetched local paths for URL sources, preserving compression.
pub fn with_local_sources(config: &IngestConfig, resolved: Vec<(usize, PathBuf)>) -> IngestConfig {
    let mut config = config.clone();
    for (index, path) in resolved {
        if let Some(spec) = config.source_files.get_mut(index) {
            let compression = if spec.compression == Compression::Gzip
                || spec.path.ends_with(".gz")
            {
                Compression::Gzip
            } else {
                Compression::None
            };
            *spec = SourceFileSpec {
                path: path.display().to_string(),
                checksum: spec.checksum.clone(),
                compression,
            };
        }
    }
    config
}

fn write_yaml<T: Serialize>(path: &Path, value: &T) -> Result<(), EngineError> {
    let text = serde_yaml::to_string(value)
        .map_err(|e| EngineError::Io(format!("cannot serialize {}: {e}", path.display())))?;
    std::fs::write(path, text)
        .map_err(|e| EngineError::Io(format!("cannot write {}: {e}", path.display())))
}
