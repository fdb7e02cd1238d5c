//! Drive the artifact writer directly: TSV and JSONL output, declared
//! property columns, write-time deduplication, and the content-digest
//! manifest.
//!
//!     cargo run -p kgforge --example write_artifacts

use kgforge::config::{OutputFormat, WriterConfig};
use kgforge::model::{parse_curie, KgEdge, KgNode, PropertyValue};
use kgforge::writer::ArtifactWriter;

fn main() -> anyhow::Result<()> {
    let workdir = tempfile::tempdir()?;

    let mut config = WriterConfig {
        output_dir: workdir.path().to_path_buf(),
        node_property_columns: vec!["review_status".to_string()],
        edge_property_columns: vec!["mode_of_inheritance".to_string()],
        ..WriterConfig::default()
    };

    let mut disease = KgNode::new(
        parse_curie("MONDO:0010602")?,
        vec![parse_curie("biolink:Disease")?],
    );
    disease.name = Some("hemophilia A".to_string());
    disease.provided_by = vec!["demo".to_string()];
    disease.properties.insert(
        "review_status".to_string(),
        PropertyValue::text("reviewed by expert panel"),
    );
    // This one has no declared column: dropped with a warning under the
    // default policy.
    disease
        .properties
        .insert("zygosity".to_string(), PropertyValue::text("het"));

    let mut edge = KgEdge::new(
        parse_curie("CLINVAR:12345")?,
        parse_curie("biolink:causes")?,
        parse_curie("MONDO:0010602")?,
    );
    edge.qualifiers.insert(
        "mode_of_inheritance".to_string(),
        PropertyValue::text("X-linked recessive inheritance"),
    );
    edge.knowledge_source = Some("infores:demo".to_string());

    let mut writer = ArtifactWriter::create(workdir.path(), "demo", &config)?;
    writer.write_node(&disease)?;
    writer.write_node(&disease)?; // exact duplicate: dropped by dedup
    writer.write_edge(&edge)?;
    for warning in writer.take_warnings() {
        println!("warning: {warning}");
    }
    let manifest = writer.finalize()?;
    println!("\nTSV manifest:");
    for entry in &manifest.files {
        println!("  {} rows={} sha256={}", entry.file, entry.rows, entry.sha256);
    }
    let nodes = std::fs::read_to_string(workdir.path().join("demo_nodes.tsv"))?;
    println!("\n{nodes}");

    // The same content as JSONL: lists stay arrays, qualifiers nest.
    config.format = OutputFormat::Jsonl;
    let mut writer = ArtifactWriter::create(workdir.path(), "demo", &config)?;
    writer.write_node(&disease)?;
    writer.write_edge(&edge)?;
    writer.finalize()?;
    let edges = std::fs::read_to_string(workdir.path().join("demo_edges.jsonl"))?;
    println!("JSONL edge row:\n{edges}");
    Ok(())
}
