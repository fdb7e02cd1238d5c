//! The bundled `clingen_mini` reference ingest: the hook-based twin of the
//! mapping rules in `testdata/clingen_mini/ingest.yaml`. Both formulations
//! produce byte-identical artifacts, which the test suite holds them to.
//!
//! The write order per record mirrors mapping mode: variant node, gene node,
//! disease node, then the causes and is-sequence-variant-of edges, with
//! empty cells skipping the guarded rules.

use crate::engine::{register_hooks, HookSet};
use crate::model::{parse_curie, Curie, KgEdge, KgNode, PropertyValue};
use crate::reader::Record;

const PROVIDED_BY: &str = "clingen_mini";
const KNOWLEDGE_SOURCE: &str = "infores:clingen-mini";

fn nonempty(record: &Record, column: &str) -> Option<String> {
    record.get_text(column).filter(|s| !s.is_empty())
}

fn curie(text: &str) -> Result<Curie, crate::engine::HookError> {
    Ok(parse_curie(text)?)
}

/// Builds the hook set for the miniature ClinGen-style ingest.
pub fn clingen_mini_hooks() -> HookSet {
    HookSet::transform_record(|ctx, record| {
        let variant_id = curie(&format!(
            "CLINVAR:{}",
            record.get_text("variant_id").unwrap_or_default()
        ))?;

        let mut variant = KgNode::new(variant_id.clone(), vec![curie("biolink:SequenceVariant")?]);
        variant.name = nonempty(record, "variant_label");
        variant.provided_by = vec![PROVIDED_BY.to_string()];
        if let Some(status) = nonempty(record, "review_status") {
            variant
                .properties
                .insert("review_status".to_string(), PropertyValue::Text(status));
        }
        ctx.write(variant)?;

        let gene_id = nonempty(record, "gene_hgnc_id");
        if let Some(gene_id) = &gene_id {
            let mut gene = KgNode::new(curie(gene_id)?, vec![curie("biolink:Gene")?]);
            gene.name = nonempty(record, "gene_symbol");
            gene.provided_by = vec![PROVIDED_BY.to_string()];
            ctx.write(gene)?;
        }

        let disease_id = nonempty(record, "disease_mondo_id");
        if let Some(disease_id) = &disease_id {
            let mut disease = KgNode::new(curie(disease_id)?, vec![curie("biolink:Disease")?]);
            disease.name = nonempty(record, "disease_label");
            disease.provided_by = vec![PROVIDED_BY.to_string()];
            ctx.write(disease)?;
        }

        if let Some(disease_id) = &disease_id {
            let mut causes = KgEdge::new(
                variant_id.clone(),
                curie("biolink:causes")?,
                curie(disease_id)?,
            );
            causes.knowledge_source = Some(KNOWLEDGE_SOURCE.to_string());
            if let Some(moi) = nonempty(record, "mode_of_inheritance") {
                causes
                    .qualifiers
                    .insert("mode_of_inheritance".to_string(), PropertyValue::Text(moi));
            }
            ctx.write(causes)?;
        }

        if let Some(gene_id) = &gene_id {
            let mut variant_of = KgEdge::new(
                variant_id.clone(),
                curie("biolink:is_sequence_variant_of")?,
                curie(gene_id)?,
            );
            variant_of.knowledge_source = Some(KNOWLEDGE_SOURCE.to_string());
            ctx.write(variant_of)?;
        }

        Ok(())
    })
}

/// Registers the bundled hook sets; the CLI calls this at startup.
pub fn register_bundled() {
    register_hooks("clingen_mini", clingen_mini_hooks);
}
