//! Merge two modular ingest artifacts into one graph: nodes union by id
//! (first wins, provided_by unioned), edges union by content-hash identity,
//! dangling edges counted but kept.
//!
//!     cargo run -p kgforge --example merge_graphs

use std::path::Path;

use kgforge::config::WriterConfig;
use kgforge::merge::{merge, stats, MergeConfig, NodeConflictPolicy};
use kgforge::model::{parse_curie, KgEdge, KgNode};
use kgforge::writer::ArtifactWriter;

fn write_source(dir: &Path, name: &str, genes: &[(&str, &str)], edges: &[(&str, &str)]) -> anyhow::Result<()> {
    let config = WriterConfig {
        output_dir: dir.to_path_buf(),
        ..WriterConfig::default()
    };
    let mut writer = ArtifactWriter::create(dir, name, &config)?;
    for (id, symbol) in genes {
        let mut node = KgNode::new(parse_curie(id)?, vec![parse_curie("biolink:Gene")?]);
        node.name = Some(symbol.to_string());
        node.provided_by = vec![name.to_string()];
        writer.write_node(&node)?;
    }
    for (subject, object) in edges {
        let edge = KgEdge::new(
            parse_curie(subject)?,
            parse_curie("biolink:interacts_with")?,
            parse_curie(object)?,
        );
        writer.write_edge(&edge)?;
    }
    writer.finalize()?;
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let workdir = tempfile::tempdir()?;
    // Two ingests sharing HGNC:1100; the second also references a node it
    // does not define (a legitimate cross-ingest link).
    write_source(
        &workdir.path().join("alpha"),
        "alpha",
        &[("HGNC:1100", "BRCA1"), ("HGNC:11998", "TP53")],
        &[("HGNC:1100", "HGNC:11998")],
    )?;
    write_source(
        &workdir.path().join("beta"),
        "beta",
        &[("HGNC:1100", "BRCA1"), ("HGNC:3546", "F8")],
        &[("HGNC:3546", "HGNC:28706")],
    )?;

    let config = MergeConfig {
        inputs: vec![
            workdir.path().join("alpha").display().to_string(),
            workdir.path().join("beta").display().to_string(),
        ],
        node_conflict: NodeConflictPolicy::FirstWins,
        output: "combined".to_string(),
        output_dir: workdir.path().join("combined"),
        format: Default::default(),
    };
    let report = merge(&config, workdir.path())?;
    println!("nodes out:          {}", report.nodes_out);
    println!("edges out:          {}", report.edges_out);
    println!("node rows merged:   {}", report.duplicate_nodes_merged);
    println!("dangling edges:     {}", report.dangling_edges);
    for input in &report.inputs {
        println!(
            "  {}: read {}/{} added {}/{}",
            input.input, input.nodes_read, input.edges_read, input.nodes_added, input.edges_added
        );
    }

    println!("\nmerged nodes file:");
    let nodes = std::fs::read_to_string(workdir.path().join("combined/combined_nodes.tsv"))?;
    for line in nodes.lines() {
        println!("  {line}");
    }

    let stats = stats(&workdir.path().join("combined"))?;
    println!("\nstats: {}", serde_yaml_line(&stats)?);
    Ok(())
}

fn serde_yaml_line<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_yaml::to_string(value)?.replace('\n', " "))
}
