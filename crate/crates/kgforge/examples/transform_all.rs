//! The whole-stream transform hook: called once, iterating the (already
//! filtered) record stream manually — the shape to use for aggregation.
//!
//!     cargo run -p kgforge --example transform_all

use std::collections::BTreeMap;
use std::fs;

use kgforge::config::load_config;
use kgforge::engine::{run_ingest, HookSet};
use kgforge::model::{parse_curie, KgEdge, KgNode};

const SOURCE: &str = "\
gene\tpathway
HGNC:1100\tGO:0006281
HGNC:11998\tGO:0006281
HGNC:3546\tGO:0007596
HGNC:12687\tGO:0001525
HGNC:8582\tGO:0009072
";

const CONFIG: &str = "\
name: pathway_rollup
source_files: [memberships.tsv]
transform:
  hooks: pathway_rollup
writer:
  output_dir: out
";

fn main() -> anyhow::Result<()> {
    let workdir = tempfile::tempdir()?;
    fs::write(workdir.path().join("memberships.tsv"), SOURCE)?;
    let config = load_config(CONFIG)?;

    // Aggregate membership counts across the whole stream, then emit one
    // node per pathway plus the member edges.
    let hooks = HookSet::transform(|ctx, stream| {
        let mut members: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for record in stream.by_ref() {
            let pathway = record.get_text("pathway").unwrap();
            let gene = record.get_text("gene").unwrap();
            members.entry(pathway).or_default().push(gene);
        }
        for (pathway, genes) in members {
            let mut node = KgNode::new(
                parse_curie(&pathway)?,
                vec![parse_curie("biolink:BiologicalProcess")?],
            );
            node.name = Some(format!("pathway with {} member(s)", genes.len()));
            ctx.write(node)?;
            for gene in genes {
                let edge = KgEdge::new(
                    parse_curie(&gene)?,
                    parse_curie("biolink:participates_in")?,
                    parse_curie(&pathway)?,
                );
                ctx.write(edge)?;
            }
        }
        Ok(())
    });

    let report = run_ingest(&config, workdir.path(), Some(hooks))?;
    println!(
        "consumed {} records -> {} pathway nodes, {} membership edges\n",
        report.counters.records_in, report.counters.nodes_out, report.counters.edges_out
    );
    let nodes = fs::read_to_string(workdir.path().join("out/pathway_rollup_nodes.tsv"))?;
    println!("{nodes}");
    Ok(())
}
