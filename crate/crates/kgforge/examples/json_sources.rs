//! JSON-lines and path-addressed JSON readers: nested objects flatten to
//! dot-joined keys, scalar arrays become text lists.
//!
//!     cargo run -p kgforge --example json_sources

use std::io::Cursor;

use kgforge::config::{ReaderConfig, ReaderFormat};
use kgforge::reader::{open_json_stream, open_jsonl_stream};

const JSONL: &str = r#"{"id":"HGNC:1100","symbol":"BRCA1","xrefs":["ENSG00000012048","P38398"]}
{"id":"HGNC:11998","symbol":"TP53","location":{"chromosome":"17","arm":"p"}}
"#;

const JSON: &str = r#"{
  "metadata": {"release": "2024-05"},
  "data": {
    "genes": [
      {"id": "HGNC:3546", "symbol": "F8"},
      {"id": "HGNC:8582", "symbol": "PAH"}
    ]
  }
}"#;

fn main() -> anyhow::Result<()> {
    println!("jsonl (one object per line):");
    let mut stream = open_jsonl_stream(
        Box::new(Cursor::new(JSONL.as_bytes().to_vec())),
        "genes.jsonl",
    );
    while let Some(record) = stream.next_record()? {
        println!("  {}:", record.location());
        for (field, value) in record.fields() {
            println!("    {field} = {value:?}");
        }
    }

    println!("\njson with record_path data.genes:");
    let cfg = ReaderConfig {
        format: ReaderFormat::Json,
        record_path: Some("data.genes".to_string()),
        ..ReaderConfig::default()
    };
    let mut stream = open_json_stream(
        Box::new(Cursor::new(JSON.as_bytes().to_vec())),
        "genes.json",
        &cfg,
    )?;
    while let Some(record) = stream.next_record()? {
        println!(
            "  element {}: id={} symbol={}",
            record.location().line(),
            record.get_text("id").unwrap(),
            record.get_text("symbol").unwrap()
        );
    }
    Ok(())
}
