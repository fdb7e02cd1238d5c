//! Schema-subset validation: strict schemas reject unknown categories and
//! predicates, non-strict schemas warn; structural breaches are always
//! errors. Edge ids are deterministic content hashes.
//!
//!     cargo run -p kgforge --example validate_graph

use kgforge::model::{
    edge_identity, parse_curie, validate_edge, validate_node, KgEdge, KgNode, SchemaSubset,
};

fn main() -> anyhow::Result<()> {
    let mut schema = SchemaSubset::default();
    schema.categories.insert(parse_curie("biolink:Disease")?);
    schema.categories.insert(parse_curie("biolink:Gene")?);
    schema.predicates.insert(parse_curie("biolink:causes")?);
    schema.strict = true;

    let good = KgNode::new(
        parse_curie("MONDO:0010602")?,
        vec![parse_curie("biolink:Disease")?],
    );
    println!("valid node:   {}", report_line(&validate_node(&good, &schema)));

    let unknown_category = KgNode::new(parse_curie("X:1")?, vec![parse_curie("biolink:Widget")?]);
    println!(
        "bad category: {}",
        report_line(&validate_node(&unknown_category, &schema))
    );

    let no_category = KgNode::new(parse_curie("X:2")?, vec![]);
    println!(
        "no category:  {}",
        report_line(&validate_node(&no_category, &schema))
    );

    let mut edge = KgEdge::new(
        parse_curie("CLINVAR:12345")?,
        parse_curie("biolink:causes")?,
        parse_curie("MONDO:0010602")?,
    );
    edge.qualifiers.insert(
        "mode_of_inheritance".to_string(),
        kgforge::model::PropertyValue::text("X-linked recessive inheritance"),
    );
    println!("valid edge:   {}", report_line(&validate_edge(&edge, &schema)));
    println!("edge id:      {}", edge_identity(&edge));

    // Same schema, strict off: the membership finding is a warning now.
    schema.strict = false;
    let report = validate_node(&unknown_category, &schema);
    println!(
        "lax schema:   clean={} warnings={}",
        report.is_clean(),
        report.warnings().count()
    );
    Ok(())
}

fn report_line(report: &kgforge::model::ValidationReport) -> String {
    if report.is_empty() {
        "ok".to_string()
    } else {
        report
            .violations()
            .iter()
            .map(|v| format!("{:?}: {}", v.severity, v.message))
            .collect::<Vec<_>>()
            .join("; ")
    }
}
