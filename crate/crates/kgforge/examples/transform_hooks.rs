//! Write transform logic as hook functions: the per-record hook builds
//! nodes, the lifecycle hooks use run-scoped state and the log channel.
//!
//!     cargo run -p kgforge --example transform_hooks

use std::fs;

use kgforge::config::load_config;
use kgforge::engine::{run_ingest, HookSet};
use kgforge::model::{parse_curie, KgNode, PropertyValue};

const SOURCE: &str = "\
ID\tLABEL\tTAXON
P04637\tcellular tumor antigen p53\tNCBITaxon:9606
P38398\tBRCA1\tNCBITaxon:9606
Q9TTA1\tmyoglobin\tNCBITaxon:9793
";

const CONFIG: &str = "\
name: proteins
source_files: [proteins.tsv]
filters:
  - column: TAXON
    inclusion: include
    filter_code: in
    value: ['NCBITaxon:9606']
transform:
  hooks: proteins
writer:
  output_dir: out
log_level: debug
";

fn main() -> anyhow::Result<()> {
    let workdir = tempfile::tempdir()?;
    fs::write(workdir.path().join("proteins.tsv"), SOURCE)?;
    let config = load_config(CONFIG)?;

    let hooks = HookSet::transform_record(|ctx, record| {
        let id = parse_curie(&format!("UniProtKB:{}", record.get_text("ID").unwrap()))?;
        let mut protein = KgNode::new(id, vec![parse_curie("biolink:Protein")?]);
        protein.name = record.get_text("LABEL");
        ctx.write(protein)?;

        // Run-scoped state survives across hook invocations.
        let seen = match ctx.state().get("seen") {
            Some(PropertyValue::Integer(n)) => *n,
            _ => 0,
        };
        ctx.state_mut()
            .insert("seen".to_string(), PropertyValue::Integer(seen + 1));
        Ok(())
    })
    .with_prepare_data(|ctx| {
        ctx.log_info("prepare_data: nothing to stage for this ingest");
        Ok(())
    })
    .with_on_data_begin(|ctx| {
        ctx.log_info("on_data_begin: writers are open");
        Ok(())
    })
    .with_on_data_end(|ctx| {
        let seen = ctx.state().get("seen").cloned();
        ctx.log_info(format!("on_data_end: saw {seen:?} records"));
        Ok(())
    });

    let report = run_ingest(&config, workdir.path(), Some(hooks))?;
    println!(
        "wrote {} nodes ({} records filtered out)",
        report.counters.nodes_out, report.counters.records_filtered
    );
    println!("\nrun log:");
    for entry in &report.log {
        println!("  [{:?}] {}", entry.level, entry.message);
    }
    Ok(())
}
