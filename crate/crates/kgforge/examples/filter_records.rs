//! The record matching language: include/exclude clauses with membership
//! and numeric comparison, AND-composed.
//!
//!     cargo run -p kgforge --example filter_records

use kgforge::filter::{compile_filters, FilterMode, FilterOp, FilterSpec};
use kgforge::model::PropertyValue;
use kgforge::reader::{Record, SourceLocation};

fn record(taxon: &str, score: &str) -> Record {
    let mut rec = Record::new(SourceLocation::new("demo", 1));
    rec.insert("taxon".into(), PropertyValue::text(taxon)).unwrap();
    rec.insert("score".into(), PropertyValue::text(score)).unwrap();
    rec
}

fn main() -> anyhow::Result<()> {
    let specs = vec![
        FilterSpec {
            column: "taxon".into(),
            mode: FilterMode::Include,
            op: FilterOp::In,
            value: PropertyValue::text_list(["NCBITaxon:9606", "NCBITaxon:10090"])?,
        },
        FilterSpec {
            column: "score".into(),
            mode: FilterMode::Include,
            op: FilterOp::Gt,
            value: PropertyValue::Decimal(0.5),
        },
    ];
    let filters = compile_filters(&specs)?;

    let cases = [
        ("NCBITaxon:9606", "0.7"),
        ("NCBITaxon:9606", "0.3"),
        ("NCBITaxon:10090", "0.9"),
        ("NCBITaxon:7955", "0.9"),
        ("NCBITaxon:9606", "n/a"),
    ];
    println!("taxon in [9606, 10090] AND score > 0.5:\n");
    for (taxon, score) in cases {
        let rec = record(taxon, score);
        println!(
            "  taxon={taxon:<16} score={score:<4} -> {}",
            if filters.accept(&rec) { "accept" } else { "reject" }
        );
    }
    Ok(())
}
