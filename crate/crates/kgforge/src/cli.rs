//! Command-line pipeline: `transform`, `validate`, `merge`, `stats`, and
//! `fetch`.
//!
//! Exit codes are stable: 0 success; 1 validation or configuration problems
//! (including validation findings); 2 runtime aborts (I/O, download, or
//! hook failures). Diagnostics go to standard error; requested data goes to
//! files or standard output.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{load_config_file, resolve_path, validate_config, IngestConfig, TransformMode};
use crate::engine::{lookup_hooks, registered_hook_names, run_ingest, with_local_sources, EngineError};
use crate::fetch::{verify_checksum, FetchCache};
use crate::merge::{load_merge_config_file, merge, resolve_artifacts, stats, MergeError};
use crate::model::{validate_edge, validate_node, SchemaSubset, ValidationReport};
use crate::writer::{decode_edge, decode_node, read_rows, RowKind};

#[derive(Parser)]
#[command(
    name = "kgforge",
    version,
    about = "Declarative, streaming ingest engine for KGX-style property graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one ingest: fetch URL sources, transform, write artifacts.
    Transform {
        /// Path to the ingest YAML config.
        config: PathBuf,
        /// Validate the config and print the plan without writing anything.
        #[arg(long)]
        dry_run: bool,
        /// Fail if a URL source is not already cached.
        #[arg(long)]
        offline: bool,
        /// Refetch URL sources even when cached.
        #[arg(long)]
        force: bool,
    },
    /// Validate an ingest config (.yaml) or an artifact file/directory.
    Validate {
        target: PathBuf,
        /// Schema subset file to validate artifact rows against.
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Concatenate artifact pairs into one knowledge graph.
    Merge {
        /// Path to the merge YAML config.
        config: PathBuf,
    },
    /// Print node/edge/category/predicate counts for an artifact.
    Stats {
        artifact: PathBuf,
    },
    /// Download all URL sources of a config into the cache.
    Fetch {
        config: PathBuf,
        /// Refetch even when cached.
        #[arg(long)]
        force: bool,
    },
}

/// Parses `std::env::args` and runs one command, returning the exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Like [`run`], with explicit arguments (used by tests).
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    match cli.command {
        Command::Transform {
            config,
            dry_run,
            offline,
            force,
        } => cmd_transform(&config, dry_run, offline, force),
        Command::Validate { target, schema } => cmd_validate(&target, schema.as_deref()),
        Command::Merge { config } => cmd_merge(&config),
        Command::Stats { artifact } => cmd_stats(&artifact),
        Command::Fetch { config, force } => cmd_fetch(&config, force),
    }
}

fn cmd_transform(config_path: &Path, dry_run: bool, offline: bool, force: bool) -> i32 {
    let (config, base) = match load_config_file(config_path) {
        Ok(loaded) => loaded,
        Err(e) => {
            eprintln!("kgforge: cannot load config {}: {e}", config_path.display());
            return 1;
        }
    };

    // Resolve URL sources through the cache before anything else touches
    // the filesystem.
    let cache = FetchCache::from_env();
    let mut resolved = Vec::new();
    for (index, source) in config.source_files.iter().enumerate() {
        if source.is_url() {
            match cache.fetch(&source.path, force, offline) {
                Ok(path) => resolved.push((index, path)),
                Err(e) => {
                    eprintln!("kgforge: {e}");
                    return 2;
                }
            }
        }
    }
    let config = with_local_sources(&config, resolved);

    for source in &config.source_files {
        if let Some(expected) = &source.checksum {
            let path = resolve_path(&base, &source.path);
            if let Err(e) = verify_checksum(&path, expected) {
                eprintln!("kgforge: {e}");
                return 1;
            }
        }
    }

    let report = validate_config(&config, &base);
    print_report_stderr(&report);
    if !report.is_clean() {
        return 1;
    }

    if dry_run {
        print!("{}", plan_yaml(&config, &base));
        return 0;
    }

    let hooks = match config.transform.mode() {
        Some(TransformMode::Hooks(name)) => match lookup_hooks(name) {
            Some(hooks) => Some(hooks),
            None => {
                eprintln!(
                    "kgforge: no hooks registered under '{name}' (registered: {})",
                    registered_hook_names().join(", ")
                );
                return 1;
            }
        },
        _ => None,
    };

    match run_ingest(&config, &base, hooks) {
        Ok(report) => {
            eprintln!(
                "kgforge: {}: records_in={} filtered={} rejected={} nodes_out={} edges_out={} ({} ms)",
                report.name,
                report.counters.records_in,
                report.counters.records_filtered,
                report.counters.records_rejected,
                report.counters.nodes_out,
                report.counters.edges_out,
                report.wall_time_ms
            );
            0
        }
        Err(EngineError::Config(message)) => {
            eprintln!("kgforge: config error: {message}");
            1
        }
        Err(e) => {
            eprintln!("kgforge: run aborted: {e}");
            2
        }
    }
}

fn plan_yaml(config: &IngestConfig, base: &Path) -> String {
    let mut out = String::new();
    out.push_str(&format!("name: {}\n", config.name));
    out.push_str("sources:\n");
    for source in &config.source_files {
        out.push_str(&format!(
            "  - {}\n",
            resolve_path(base, &source.path).display()
        ));
    }
    out.push_str(&format!("reader: {:?}\n", config.reader.format).to_lowercase());
    out.push_str(&format!("filters: {}\n", config.filters.len()));
    let mode = match config.transform.mode() {
        Some(TransformMode::Mapping(_)) => "mapping".to_string(),
        Some(TransformMode::Hooks(name)) => format!("hooks ({name})"),
        None => "invalid".to_string(),
    };
    out.push_str(&format!("transform: {mode}\n"));
    let (nodes, edges) = crate::writer::artifact_paths(
        &resolve_path(base, &config.writer.output_dir),
        &config.name,
        config.writer.format,
    );
    out.push_str(&format!("outputs:\n  - {}\n  - {}\n", nodes.display(), edges.display()));
    out
}

fn print_report_stderr(report: &ValidationReport) {
    for violation in report.violations() {
        eprintln!("kgforge: {:?}: {}", violation.severity, violation.message);
    }
}

fn cmd_validate(target: &Path, schema: Option<&Path>) -> i32 {
    let is_yaml = target
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("yaml") || e.eq_ignore_ascii_case("yml"));
    if is_yaml {
        return validate_config_target(target);
    }
    validate_artifact_target(target, schema)
}

fn validate_config_target(target: &Path) -> i32 {
    let (config, base) = match load_config_file(target) {
        Ok(loaded) => loaded,
        Err(e) => {
            eprintln!("kgforge: {e}");
            return 1;
        }
    };
    let report = validate_config(&config, &base);
    print!("{report}");
    if report.is_clean() {
        println!("ok: {}", target.display());
        0
    } else {
        1
    }
}

fn validate_artifact_target(target: &Path, schema: Option<&Path>) -> i32 {
    let schema = match schema {
        Some(path) => match SchemaSubset::load(path) {
            Ok(schema) => schema,
            Err(e) => {
                eprintln!("kgforge: {e}");
                return 1;
            }
        },
        None => SchemaSubset::default(),
    };
    let pairs = match resolve_artifacts(target) {
        Ok(pairs) => pairs,
        Err(e) => {
            eprintln!("kgforge: {e}");
            return 1;
        }
    };
    let mut clean = true;
    for pair in pairs {
        for (path, kind) in [(&pair.nodes, RowKind::Node), (&pair.edges, RowKind::Edge)] {
            let rows = match read_rows(path, kind) {
                Ok(rows) => rows,
                Err(e) => {
                    eprintln!("kgforge: {e}");
                    return 1;
                }
            };
            for (index, row) in rows.rows.iter().enumerate() {
                let mut report = ValidationReport::new();
                match kind {
                    RowKind::Node => {
                        let (node, decode_report) = decode_node(row);
                        report.merge(decode_report);
                        if let Some(node) = node {
                            report.merge(validate_node(&node, &schema));
                        }
                    }
                    RowKind::Edge => {
                        let (edge, decode_report) = decode_edge(row);
                        report.merge(decode_report);
                        if let Some(edge) = edge {
                            report.merge(validate_edge(&edge, &schema));
                        }
                    }
                }
                if !report.is_empty() {
                    for violation in report.violations() {
                        println!(
                            "{}: row {}: {:?}: {}",
                            path.display(),
                            index + 1,
                            violation.severity,
                            violation.message
                        );
                    }
                    if !report.is_clean() {
                        clean = false;
                    }
                }
            }
        }
    }
    if clean {
        println!("ok: {}", target.display());
        0
    } else {
        1
    }
}

fn cmd_merge(config_path: &Path) -> i32 {
    let (config, base) = match load_merge_config_file(config_path) {
        Ok(loaded) => loaded,
        Err(e) => {
            eprintln!("kgforge: {e}");
            return 1;
        }
    };
    match merge(&config, &base) {
        Ok(report) => {
            eprintln!(
                "kgforge: merged {} inputs: nodes_out={} edges_out={} duplicates(nodes={}, edges={}) dangling={}",
                report.inputs.len(),
                report.nodes_out,
                report.edges_out,
                report.duplicate_nodes_merged,
                report.duplicate_edges_collapsed,
                report.dangling_edges
            );
            0
        }
        Err(e @ MergeError::Conflict { .. }) => {
            eprintln!("kgforge: {e}");
            1
        }
        Err(e @ MergeError::Config(_)) => {
            eprintln!("kgforge: {e}");
            1
        }
        Err(e) => {
            eprintln!("kgforge: {e}");
            2
        }
    }
}

fn cmd_stats(artifact: &Path) -> i32 {
    match stats(artifact) {
        Ok(stats) => {
            match serde_yaml::to_string(&stats) {
                Ok(text) => print!("{text}"),
                Err(e) => {
                    eprintln!("kgforge: cannot serialize stats: {e}");
                    return 1;
                }
            }
            0
        }
        Err(e) => {
            eprintln!("kgforge: {e}");
            1
        }
    }
}

fn cmd_fetch(config_path: &Path, force: bool) -> i32 {
    let (config, _base) = match load_config_file(config_path) {
        Ok(loaded) => loaded,
        Err(e) => {
            eprintln!("kgforge: cannot load config {}: {e}", config_path.display());
            return 1;
        }
    };
    let cache = FetchCache::from_env();
    let mut fetched = 0usize;
    for source in &config.source_files {
        if !source.is_url() {
            continue;
        }
        match cache.fetch(&source.path, force, false) {
            Ok(path) => {
                if let Some(expected) = &source.checksum {
                    if let Err(e) = verify_checksum(&path, expected) {
                        eprintln!("kgforge: {e}");
                        return 1;
                    }
                }
                println!("{} -> {}", source.path, path.display());
                fetched += 1;
            }
            Err(e) => {
                eprintln!("kgforge: {e}");
                return 2;
            }
        }
    }
    eprintln!("kgforge: fetched {fetched} URL source(s)");
    0
}
