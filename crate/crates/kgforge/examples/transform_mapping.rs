//! Run the bundled ClinGen-style ingest with its declarative mapping config
//! and print the run report.
//!
//!     cargo run -p kgforge --example transform_mapping

use std::fs;
use std::path::Path;

use kgforge::config::load_config_file;
use kgforge::engine::run_ingest;

fn copy_dir(from: &Path, to: &Path) -> std::io::Result<()> {
    fs::create_dir_all(to)?;
    for entry in fs::read_dir(from)? {
        let entry = entry?;
        let target = to.join(entry.file_name());
        if entry.file_type()?.is_dir() {
            copy_dir(&entry.path(), &target)?;
        } else {
            fs::copy(entry.path(), target)?;
        }
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/clingen_mini");
    let workdir = tempfile::tempdir()?;
    let staged = workdir.path().join("clingen_mini");
    copy_dir(&corpus, &staged)?;

    let (config, base) = load_config_file(&staged.join("ingest.yaml"))?;
    let report = run_ingest(&config, &base, None)?;

    println!("ingest:            {}", report.name);
    println!("records in:        {}", report.counters.records_in);
    println!("records filtered:  {}", report.counters.records_filtered);
    println!("records rejected:  {}", report.counters.records_rejected);
    println!("nodes out:         {}", report.counters.nodes_out);
    println!("edges out:         {}", report.counters.edges_out);
    println!("wall time:         {} ms", report.wall_time_ms);
    println!();
    for entry in &report.manifest.files {
        println!("{}  rows={} sha256={}", entry.file, entry.rows, entry.sha256);
    }
    println!();
    let nodes = fs::read_to_string(staged.join("output/clingen_mini_nodes.tsv"))?;
    println!("first node rows:");
    for line in nodes.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
