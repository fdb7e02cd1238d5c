//! kgforge: a streaming, declaratively configured ingest engine that turns
//! heterogeneous source files into validated KGX-style property-graph
//! artifacts, and merges per-source artifacts into one knowledge graph.
//!
//! The pipeline has three primitives: a **reader** streams records out of
//! source files one at a time, a **transform** turns records into nodes and
//! edges, and a **writer** serializes them to paired node/edge files. One
//! YAML file per ingest configures all three declaratively; transforms are
//! either declarative mapping rules or registered hook functions.
//!
//! See the `examples/` directory for one runnable example per capability,
//! or the `kgforge` binary for the command-line pipeline.

pub mod bundled;
pub mod config;
pub mod engine;
pub mod fetch;
pub mod filter;
pub mod merge;
pub mod model;
pub mod reader;
pub mod writer;

pub mod cli;

pub use config::{load_config, load_config_file, validate_config, IngestConfig};
pub use engine::{run_ingest, HookSet, RunReport, TransformContext, TransformLogic};
pub use filter::{compile_filters, FilterSet, FilterSpec};
pub use model::{
    edge_identity, parse_curie, validate_edge, validate_node, Curie, GraphItem, KgEdge, KgNode,
    PropertyValue, SchemaSubset, ValidationReport,
};
pub use reader::{Record, RecordStream, SourceLocation};
