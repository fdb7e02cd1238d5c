//! Use the CSV reader directly: comment and blank lines are skipped, typed
//! columns are coerced, and malformed rows are rejected without stopping the
//! stream.
//!
//!     cargo run -p kgforge --example stream_records

use std::io::Cursor;

use kgforge::config::{ColumnType, DeclaredColumn, ReaderConfig};
use kgforge::reader::open_csv_stream;

const DATA: &str = "\
# gene scores exported 2024-05-01
gene\tscore\tessential
BRCA1\t0.98\ttrue
TP53\t0.97\ttrue
bad-row-with-too-few-cells
MYH7\tnot-a-number\tfalse

F8\t0.61\tfalse
";

fn main() -> anyhow::Result<()> {
    let cfg = ReaderConfig {
        delimiter: Some('\t'),
        columns: vec![
            DeclaredColumn {
                name: "gene".into(),
                column_type: ColumnType::Text,
            },
            DeclaredColumn {
                name: "score".into(),
                column_type: ColumnType::Float,
            },
            DeclaredColumn {
                name: "essential".into(),
                column_type: ColumnType::Bool,
            },
        ],
        ..ReaderConfig::default()
    };

    let mut stream = open_csv_stream(
        Box::new(Cursor::new(DATA.as_bytes().to_vec())),
        "gene_scores.tsv",
        &cfg,
    )?;

    while let Some(record) = stream.next_record()? {
        println!(
            "{}  gene={:?} score={:?} essential={:?}",
            record.location(),
            record.get("gene"),
            record.get("score"),
            record.get("essential"),
        );
    }
    println!(
        "\nyielded {} records, rejected {}:",
        stream.yielded_count(),
        stream.rejected_count()
    );
    for rejection in stream.rejections() {
        println!("  {}: {}", rejection.location, rejection.reason);
    }
    Ok(())
}
