//! Property tests for the model and merge invariants.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use proptest::prelude::*;

use kgforge::config::WriterConfig;
use kgforge::merge::{merge, MergeConfig, NodeConflictPolicy};
use kgforge::model::{parse_curie, KgEdge, KgNode, PropertyValue};
use kgforge::writer::ArtifactWriter;

fn curie_prefix() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_.-]{0,8}"
}

fn curie_local() -> impl Strategy<Value = String> {
    "[!-~]{1,12}".prop_filter("no whitespace", |s| !s.chars().any(char::is_whitespace))
}

proptest! {
    #[test]
    fn curie_parse_render_round_trips(prefix in curie_prefix(), local in curie_local()) {
        let raw = format!("{prefix}:{local}");
        let curie = parse_curie(&raw).unwrap();
        prop_assert_eq!(curie.render(), raw.clone());
        prop_assert_eq!(parse_curie(&curie.render()).unwrap(), curie);
    }

    #[test]
    fn curie_parse_never_panics(raw in ".{0,40}") {
        let _ = parse_curie(&raw);
    }

    #[test]
    fn text_list_rejects_pipes_anywhere(items in proptest::collection::vec("[a-z|]{1,6}", 0..5)) {
        let has_pipe = items.iter().any(|s| s.contains('|'));
        let result = PropertyValue::text_list(items);
        prop_assert_eq!(result.is_err(), has_pipe);
    }

    #[test]
    fn validation_is_deterministic(local in "[A-Za-z0-9]{1,8}") {
        let node = KgNode::new(
            parse_curie(&format!("X:{local}")).unwrap(),
            vec![parse_curie("biolink:Gene").unwrap()],
        );
        let schema = kgforge::model::SchemaSubset::default();
        prop_assert_eq!(
            kgforge::model::validate_node(&node, &schema),
            kgforge::model::validate_node(&node, &schema)
        );
    }
}

fn write_artifact(dir: &Path, name: &str, node_ids: &[u8], edges: &[(u8, u8)]) -> PathBuf {
    let config = WriterConfig {
        output_dir: dir.to_path_buf(),
        ..WriterConfig::default()
    };
    let mut writer = ArtifactWriter::create(dir, name, &config).unwrap();
    for id in node_ids {
        let mut node = KgNode::new(
            parse_curie(&format!("N:{id}")).unwrap(),
            vec![parse_curie("biolink:Gene").unwrap()],
        );
        node.provided_by = vec![name.to_string()];
        writer.write_node(&node).unwrap();
    }
    for (s, o) in edges {
        let edge = KgEdge::new(
            parse_curie(&format!("N:{s}")).unwrap(),
            parse_curie("biolink:related_to").unwrap(),
            parse_curie(&format!("N:{o}")).unwrap(),
        );
        writer.write_edge(&edge).unwrap();
    }
    let (nodes, _) = writer.paths();
    writer.finalize().unwrap();
    nodes
}

fn key_set(path: &Path) -> BTreeSet<String> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|line| line.split('\t').next().unwrap().to_string())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// merge(A,B) and merge(B,A) contain the same node-id and edge-identity
    /// sets; only order and first-wins field values may differ.
    #[test]
    fn merge_key_sets_are_order_invariant(
        a_nodes in proptest::collection::btree_set(0u8..20, 1..10),
        b_nodes in proptest::collection::btree_set(0u8..20, 1..10),
        a_edges in proptest::collection::vec((0u8..20, 0u8..20), 0..8),
        b_edges in proptest::collection::vec((0u8..20, 0u8..20), 0..8),
    ) {
        let tmp = tempfile::tempdir().unwrap();
        let a_ids: Vec<u8> = a_nodes.into_iter().collect();
        let b_ids: Vec<u8> = b_nodes.into_iter().collect();
        let a = write_artifact(&tmp.path().join("a"), "a", &a_ids, &a_edges);
        let b = write_artifact(&tmp.path().join("b"), "b", &b_ids, &b_edges);

        let run = |first: &Path, second: &Path, out: &str| {
            let config = MergeConfig {
                inputs: vec![first.display().to_string(), second.display().to_string()],
                node_conflict: NodeConflictPolicy::FirstWins,
                output: "m".to_string(),
                output_dir: tmp.path().join(out),
                format: Default::default(),
            };
            merge(&config, tmp.path()).unwrap();
            (
                key_set(&tmp.path().join(out).join("m_nodes.tsv")),
                key_set(&tmp.path().join(out).join("m_edges.tsv")),
            )
        };
        let (ab_nodes, ab_edges) = run(&a, &b, "ab");
        let (ba_nodes, ba_edges) = run(&b, &a, "ba");
        prop_assert_eq!(ab_nodes, ba_nodes);
        prop_assert_eq!(ab_edges, ba_edges);
    }

    /// Every input row's key appears in the output exactly once.
    #[test]
    fn merge_output_keys_are_unique_and_complete(
        ids in proptest::collection::vec(0u8..15, 1..20),
    ) {
        let tmp = tempfile::tempdir().unwrap();
        let nodes = write_artifact(&tmp.path().join("a"), "a", &ids, &[]);
        let config = MergeConfig {
            inputs: vec![nodes.display().to_string()],
            node_conflict: NodeConflictPolicy::FirstWins,
            output: "m".to_string(),
            output_dir: tmp.path().join("m"),
            format: Default::default(),
        };
        merge(&config, tmp.path()).unwrap();
        let text = fs::read_to_string(tmp.path().join("m/m_nodes.tsv")).unwrap();
        let out_ids: Vec<String> = text
            .lines()
            .skip(1)
            .map(|l| l.split('\t').next().unwrap().to_string())
            .collect();
        let unique: BTreeSet<&String> = out_ids.iter().collect();
        prop_assert_eq!(unique.len(), out_ids.len());
        let expected: BTreeSet<String> = ids.iter().map(|i| format!("N:{i}")).collect();
        let actual: BTreeSet<String> = out_ids.into_iter().collect();
        prop_assert_eq!(actual, expected);
    }
}
