//! Acceptance suite: one test per criterion, each printing a PASS line.
//! Run with `cargo test -p kgforge --test acceptance -- --nocapture`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use kgforge::bundled::clingen_mini_hooks;
use kgforge::config::{load_config, load_config_file, WriterConfig};
use kgforge::engine::{run_ingest, HookError, HookSet};
use kgforge::filter::{compile_filters, FilterMode, FilterOp, FilterSpec};
use kgforge::merge::{merge, MergeConfig, NodeConflictPolicy};
use kgforge::model::{parse_curie, KgEdge, KgNode, PropertyValue};
use kgforge::reader::{Record, SourceLocation};
use kgforge::writer::{decode_edge, decode_node, read_rows, ArtifactWriter, RowKind};

const BIN: &str = env!("CARGO_BIN_EXE_kgforge");

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("testdata/clingen_mini")
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

fn corpus_in_tempdir() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("clingen_mini");
    copy_dir(&corpus_dir(), &corpus);
    (dir, corpus)
}

// ---------------------------------------------------------------------
// 1. Golden-corpus reproduction
// ---------------------------------------------------------------------

#[test]
fn criterion_1_golden_corpus_reproduction() {
    let (_tmp, corpus) = corpus_in_tempdir();
    let (config, base) = load_config_file(&corpus.join("ingest.yaml")).unwrap();

    let started = Instant::now();
    let report = run_ingest(&config, &base, None).unwrap();
    let elapsed = started.elapsed();

    assert_eq!(report.counters.records_in, 10);
    assert_eq!(report.counters.records_filtered, 2);
    assert_eq!(report.counters.records_rejected, 0);

    let expected_digests: std::collections::BTreeMap<String, String> =
        serde_yaml::from_str(&fs::read_to_string(corpus.join("expected/digests.yaml")).unwrap())
            .unwrap();
    for file in ["clingen_mini_nodes.tsv", "clingen_mini_edges.tsv"] {
        let actual = fs::read(corpus.join("output").join(file)).unwrap();
        let expected = fs::read(corpus.join("expected").join(file)).unwrap();
        assert_eq!(actual, expected, "{file} differs from the checked-in golden file");
        assert_eq!(
            report.manifest.digest_for(file),
            expected_digests.get(file).map(String::as_str),
            "manifest digest for {file} differs from the checked-in digest"
        );
    }
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "golden ingest took {elapsed:?}, expected < 1s"
    );
    println!(
        "[PASS] criterion 1: golden corpus reproduced byte-identically in {:?}",
        elapsed
    );
}

// ---------------------------------------------------------------------
// 2. Mode equivalence (mapping vs hooks)
// ---------------------------------------------------------------------

#[test]
fn criterion_2_mode_equivalence() {
    let (_tmp, corpus) = corpus_in_tempdir();

    let (mapping_cfg, base) = load_config_file(&corpus.join("ingest.yaml")).unwrap();
    let mapping_report = run_ingest(&mapping_cfg, &base, None).unwrap();

    let (hooks_cfg, base) = load_config_file(&corpus.join("ingest_hooks.yaml")).unwrap();
    let hooks_report = run_ingest(&hooks_cfg, &base, Some(clingen_mini_hooks())).unwrap();

    for file in ["clingen_mini_nodes.tsv", "clingen_mini_edges.tsv"] {
        assert_eq!(
            mapping_report.manifest.digest_for(file).unwrap(),
            hooks_report.manifest.digest_for(file).unwrap(),
            "digest mismatch for {file}"
        );
        let mapping_bytes = fs::read(corpus.join("output").join(file)).unwrap();
        let hooks_bytes = fs::read(corpus.join("output_hooks").join(file)).unwrap();
        assert_eq!(mapping_bytes, hooks_bytes);
    }
    println!("[PASS] criterion 2: hooks-mode and mapping-mode artifacts have equal digests");
}

// ---------------------------------------------------------------------
// 3. Filter oracle
// ---------------------------------------------------------------------

/// Brute-force re-evaluation of the matching language, written as plain
/// nested conditionals against the documented semantics, independent of the
/// compiled evaluator.
fn oracle_accept(specs: &[FilterSpec], record: &Record) -> bool {
    for spec in specs {
        let matched = oracle_clause(spec, record);
        match spec.mode {
            FilterMode::Include => {
                if !matched {
                    return false;
                }
            }
            FilterMode::Exclude => {
                if matched {
                    return false;
                }
            }
        }
    }
    true
}

fn oracle_scalar_text(value: &PropertyValue) -> Option<String> {
    match value {
        PropertyValue::Text(s) => Some(s.clone()),
        PropertyValue::Integer(i) => Some(i.to_string()),
        PropertyValue::Decimal(d) => Some(d.to_string()),
        PropertyValue::Boolean(b) => Some(b.to_string()),
        PropertyValue::TextList(_) => None,
    }
}

fn oracle_number(value: &PropertyValue) -> Option<f64> {
    match value {
        PropertyValue::Integer(i) => Some(*i as f64),
        PropertyValue::Decimal(d) => Some(*d),
        PropertyValue::Text(s) => {
            let parsed: Result<f64, _> = s.trim().parse();
            match parsed {
                Ok(v) if v.is_finite() => Some(v),
                _ => None,
            }
        }
        _ => None,
    }
}

fn oracle_clause(spec: &FilterSpec, record: &Record) -> bool {
    let value = match record.get(&spec.column) {
        Some(v) => v,
        None => return false,
    };
    match spec.op {
        FilterOp::In | FilterOp::NotIn => {
            let items = match &spec.value {
                PropertyValue::TextList(items) => items,
                _ => panic!("generator produced a scalar for a membership op"),
            };
            match oracle_scalar_text(value) {
                None => false,
                Some(text) => {
                    let found = items.contains(&text);
                    if spec.op == FilterOp::In {
                        found
                    } else {
                        !found
                    }
                }
            }
        }
        FilterOp::Lt | FilterOp::Le | FilterOp::Gt | FilterOp::Ge => {
            let target = match &spec.value {
                PropertyValue::Integer(i) => *i as f64,
                PropertyValue::Decimal(d) => *d,
                _ => panic!("generator produced a non-number for an ordering op"),
            };
            match oracle_number(value) {
                None => false,
                Some(v) => match spec.op {
                    FilterOp::Lt => v < target,
                    FilterOp::Le => v <= target,
                    FilterOp::Gt => v > target,
                    FilterOp::Ge => v >= target,
                    _ => unreachable!(),
                },
            }
        }
        FilterOp::Eq | FilterOp::Ne => match &spec.value {
            PropertyValue::Text(t) => match oracle_scalar_text(value) {
                None => false,
                Some(s) => {
                    if spec.op == FilterOp::Eq {
                        s == *t
                    } else {
                        s != *t
                    }
                }
            },
            PropertyValue::Integer(_) | PropertyValue::Decimal(_) => {
                let target = match &spec.value {
                    PropertyValue::Integer(i) => *i as f64,
                    PropertyValue::Decimal(d) => *d,
                    _ => unreachable!(),
                };
                match oracle_number(value) {
                    None => false,
                    Some(v) => {
                        if spec.op == FilterOp::Eq {
                            v == target
                        } else {
                            v != target
                        }
                    }
                }
            }
            PropertyValue::Boolean(b) => {
                let actual = match value {
                    PropertyValue::Boolean(v) => Some(*v),
                    PropertyValue::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                        "true" => Some(true),
                        "false" => Some(false),
                        _ => None,
                    },
                    _ => None,
                };
                match actual {
                    None => false,
                    Some(v) => {
                        if spec.op == FilterOp::Eq {
                            v == *b
                        } else {
                            v != *b
                        }
                    }
                }
            }
            PropertyValue::TextList(_) => panic!("generator produced a list for eq/ne"),
        },
    }
}

const COLUMNS: [&str; 6] = ["a", "b", "c", "score", "taxon", "flag"];
const TEXT_POOL: [&str; 9] = [
    "x",
    "y",
    "0.7",
    "1",
    "true",
    "FALSE",
    "NCBITaxon:9606",
    "",
    "n/a",
];

fn random_value(rng: &mut ChaCha8Rng) -> PropertyValue {
    match rng.gen_range(0..5) {
        0 => PropertyValue::Text(TEXT_POOL[rng.gen_range(0..TEXT_POOL.len())].to_string()),
        1 => PropertyValue::Integer(rng.gen_range(-3..10)),
        2 => PropertyValue::Decimal([-1.5, 0.0, 0.25, 0.5, 1.0, 2.5][rng.gen_range(0..6)]),
        3 => PropertyValue::Boolean(rng.gen_bool(0.5)),
        _ => {
            let n = rng.gen_range(0..3);
            let items: Vec<String> = (0..n).map(|i| format!("item{i}")).collect();
            PropertyValue::text_list(items).unwrap()
        }
    }
}

fn random_record(rng: &mut ChaCha8Rng) -> Record {
    let mut record = Record::new(SourceLocation::new("random", 1));
    for column in COLUMNS {
        if rng.gen_bool(0.7) {
            record.insert(column.to_string(), random_value(rng)).unwrap();
        }
    }
    record
}

fn random_clause(rng: &mut ChaCha8Rng) -> FilterSpec {
    let ops = [
        FilterOp::Eq,
        FilterOp::Ne,
        FilterOp::Lt,
        FilterOp::Le,
        FilterOp::Gt,
        FilterOp::Ge,
        FilterOp::In,
        FilterOp::NotIn,
    ];
    let op = ops[rng.gen_range(0..ops.len())];
    let value = match op {
        FilterOp::In | FilterOp::NotIn => {
            let n = rng.gen_range(1..4);
            let items: Vec<String> = (0..n)
                .map(|_| {
                    TEXT_POOL[rng.gen_range(0..TEXT_POOL.len())]
                        .to_string()
                })
                .filter(|s| !s.is_empty())
                .collect();
            PropertyValue::text_list(if items.is_empty() {
                vec!["x".to_string()]
            } else {
                items
            })
            .unwrap()
        }
        FilterOp::Lt | FilterOp::Le | FilterOp::Gt | FilterOp::Ge => {
            if rng.gen_bool(0.5) {
                PropertyValue::Integer(rng.gen_range(-3..10))
            } else {
                PropertyValue::Decimal([0.0, 0.25, 0.5, 1.0][rng.gen_range(0..4)])
            }
        }
        _ => match rng.gen_range(0..4) {
            0 => PropertyValue::Text(TEXT_POOL[rng.gen_range(0..TEXT_POOL.len())].to_string()),
            1 => PropertyValue::Integer(rng.gen_range(-3..10)),
            2 => PropertyValue::Decimal([0.0, 0.5, 1.0][rng.gen_range(0..3)]),
            _ => PropertyValue::Boolean(rng.gen_bool(0.5)),
        },
    };
    FilterSpec {
        column: COLUMNS[rng.gen_range(0..COLUMNS.len())].to_string(),
        mode: if rng.gen_bool(0.5) {
            FilterMode::Include
        } else {
            FilterMode::Exclude
        },
        op,
        value,
    }
}

#[test]
fn criterion_3_filter_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let cases = 1500;
    for case in 0..cases {
        let n = rng.gen_range(0..4);
        let specs: Vec<FilterSpec> = (0..n).map(|_| random_clause(&mut rng)).collect();
        let record = random_record(&mut rng);
        let set = compile_filters(&specs).unwrap();

        let actual = set.accept(&record);
        let expected = oracle_accept(&specs, &record);
        assert_eq!(
            actual, expected,
            "case {case}: evaluator disagrees with the brute-force oracle\nspecs: {specs:?}\nrecord: {record:?}"
        );

        // Monotone restriction: adding any clause never grows the accepted set.
        let extra = random_clause(&mut rng);
        let mut grown = specs.clone();
        grown.push(extra);
        let grown_set = compile_filters(&grown).unwrap();
        assert!(
            !(grown_set.accept(&record) && !actual),
            "case {case}: adding a clause grew the accepted set"
        );

        // Idempotence: duplicating an existing clause changes nothing.
        if !specs.is_empty() {
            let mut doubled = specs.clone();
            doubled.push(specs[rng.gen_range(0..specs.len())].clone());
            let doubled_set = compile_filters(&doubled).unwrap();
            assert_eq!(
                doubled_set.accept(&record),
                actual,
                "case {case}: duplicating a clause changed the result"
            );
        }
    }
    println!("[PASS] criterion 3: accept agreed with the brute-force oracle on {cases} cases; monotone restriction and idempotence held");
}

// ---------------------------------------------------------------------
// 4. Merge oracle
// ---------------------------------------------------------------------

fn random_artifact(rng: &mut ChaCha8Rng, dir: &Path, name: &str) -> PathBuf {
    let config = WriterConfig {
        output_dir: dir.to_path_buf(),
        deduplicate: false,
        ..WriterConfig::default()
    };
    let mut writer = ArtifactWriter::create(dir, name, &config).unwrap();
    let node_count = rng.gen_range(1..40);
    let mut ids = Vec::new();
    for _ in 0..node_count {
        let id = format!("N:{}", rng.gen_range(0..60));
        if ids.contains(&id) {
            continue;
        }
        let mut node = KgNode::new(
            parse_curie(&id).unwrap(),
            vec![parse_curie("biolink:Gene").unwrap()],
        );
        node.name = Some(format!("gene {}", ids.len()));
        node.provided_by = vec![name.to_string()];
        writer.write_node(&node).unwrap();
        ids.push(id);
    }
    let edge_count = rng.gen_range(0..60.min(ids.len() * 2));
    for _ in 0..edge_count {
        let subject = &ids[rng.gen_range(0..ids.len())];
        let object = &ids[rng.gen_range(0..ids.len())];
        let mut edge = KgEdge::new(
            parse_curie(subject).unwrap(),
            parse_curie("biolink:related_to").unwrap(),
            parse_curie(object).unwrap(),
        );
        if rng.gen_bool(0.3) {
            edge.qualifiers.insert(
                "weight".to_string(),
                PropertyValue::Integer(rng.gen_range(0..5)),
            );
        }
        writer.write_edge(&edge).unwrap();
    }
    let (nodes_path, _) = writer.paths();
    writer.finalize().unwrap();
    nodes_path
}

/// Independent set-union oracle over raw TSV: split lines on TAB, take the
/// id column, union the sets.
fn id_set(path: &Path) -> BTreeSet<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split('\t').collect();
    let id_index = header.iter().position(|c| *c == "id").unwrap();
    lines
        .map(|line| line.split('\t').nth(id_index).unwrap().to_string())
        .collect()
}

#[test]
fn criterion_4_merge_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for case in 0..30 {
        let tmp = tempfile::tempdir().unwrap();
        let a_nodes = random_artifact(&mut rng, &tmp.path().join("a"), "a");
        let b_nodes = random_artifact(&mut rng, &tmp.path().join("b"), "b");

        let config = MergeConfig {
            inputs: vec![
                a_nodes.display().to_string(),
                b_nodes.display().to_string(),
            ],
            node_conflict: NodeConflictPolicy::FirstWins,
            output: "merged".to_string(),
            output_dir: tmp.path().join("merged"),
            format: Default::default(),
        };
        merge(&config, tmp.path()).unwrap();

        let merged_dir = tmp.path().join("merged");
        let node_union: BTreeSet<String> = id_set(&a_nodes)
            .union(&id_set(&b_nodes))
            .cloned()
            .collect();
        assert_eq!(
            id_set(&merged_dir.join("merged_nodes.tsv")),
            node_union,
            "case {case}: node id set does not match the union oracle"
        );

        let a_edges = a_nodes.with_file_name("a_edges.tsv");
        let b_edges = b_nodes.with_file_name("b_edges.tsv");
        let edge_union: BTreeSet<String> = id_set(&a_edges)
            .union(&id_set(&b_edges))
            .cloned()
            .collect();
        assert_eq!(
            id_set(&merged_dir.join("merged_edges.tsv")),
            edge_union,
            "case {case}: edge identity set does not match the union oracle"
        );

        // merge(A, A) == merge(A), byte for byte.
        let once = MergeConfig {
            inputs: vec![a_nodes.display().to_string()],
            output: "once".to_string(),
            output_dir: tmp.path().join("once"),
            ..config.clone()
        };
        merge(&once, tmp.path()).unwrap();
        let twice = MergeConfig {
            inputs: vec![
                a_nodes.display().to_string(),
                a_nodes.display().to_string(),
            ],
            output: "once".to_string(),
            output_dir: tmp.path().join("twice"),
            ..config.clone()
        };
        merge(&twice, tmp.path()).unwrap();
        for file in ["once_nodes.tsv", "once_edges.tsv"] {
            assert_eq!(
                fs::read(tmp.path().join("once").join(file)).unwrap(),
                fs::read(tmp.path().join("twice").join(file)).unwrap(),
                "case {case}: merge(A,A) != merge(A) for {file}"
            );
        }
    }
    println!("[PASS] criterion 4: merge matched the set-union oracle on 30 randomized pairs; merge(A,A)==merge(A) byte-identically");
}

// ---------------------------------------------------------------------
// 5. Streaming bound
// ---------------------------------------------------------------------

fn generate_csv(path: &Path, rows: usize) {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(fs::File::create(path).unwrap());
    out.write_all(b"id,label,score\n").unwrap();
    for i in 0..rows {
        writeln!(out, "R{i},thing{},0.5", i % 50).unwrap();
    }
}

const STREAM_CONFIG: &str = "\
name: stream_bound
source_files:
  - {file}
transform:
  mapping:
    nodes:
      - id: {curie: {prefix: X, column: id}}
        category: {const: biolink:NamedThing}
        name: {column: label}
writer:
  output_dir: {out}
  deduplicate: false
";

/// Runs the CLI in a child process and reports (exit code, peak RSS in KB)
/// from the kernel's rusage accounting. The child is reaped with wait4
/// directly (not `Child::wait`) so rusage stays attributable to it.
#[allow(clippy::zombie_processes)]
fn run_transform_measured(config: &Path) -> (i32, i64) {
    let child = Command::new(BIN)
        .arg("transform")
        .arg(config)
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let pid = child.id() as libc::pid_t;
    let mut status: libc::c_int = 0;
    let mut rusage: libc::rusage = unsafe { std::mem::zeroed() };
    let waited = unsafe { libc::wait4(pid, &mut status, 0, &mut rusage) };
    assert_eq!(waited, pid, "wait4 failed");
    assert!(libc::WIFEXITED(status), "child did not exit normally");
    (libc::WEXITSTATUS(status), rusage.ru_maxrss)
}

#[test]
fn criterion_5_streaming_memory_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let write_config = |name: &str, csv: &str, out: &str| {
        let text = STREAM_CONFIG
            .replace("{file}", csv)
            .replace("{out}", out);
        let path = tmp.path().join(name);
        fs::write(&path, text).unwrap();
        path
    };

    generate_csv(&tmp.path().join("small.csv"), 10_000);
    let small_cfg = write_config("small.yaml", "small.csv", "out_small");
    let (code, small_rss) = run_transform_measured(&small_cfg);
    assert_eq!(code, 0, "10k-row run failed");

    generate_csv(&tmp.path().join("big.csv"), 1_000_000);
    let big_cfg = write_config("big.yaml", "big.csv", "out_big");
    let (code, big_rss) = run_transform_measured(&big_cfg);
    assert_eq!(code, 0, "1M-row run failed");

    let small_rows = fs::read_to_string(tmp.path().join("out_small/stream_bound_nodes.tsv"))
        .unwrap()
        .lines()
        .count();
    let big_rows = fs::read_to_string(tmp.path().join("out_big/stream_bound_nodes.tsv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(small_rows, 10_001);
    assert_eq!(big_rows, 1_000_001);

    assert!(
        big_rss < 2 * small_rss,
        "peak RSS for 1M rows ({big_rss} KB) is not < 2x the 10k-row run ({small_rss} KB)"
    );
    println!(
        "[PASS] criterion 5: 1M-row transform peaked at {big_rss} KB vs {small_rss} KB for 10k rows (< 2x)"
    );
}

// ---------------------------------------------------------------------
// 6. Lifecycle contract
// ---------------------------------------------------------------------

#[test]
fn criterion_6_lifecycle_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11FE);
    for case in 0..100 {
        let tmp = tempfile::tempdir().unwrap();
        let rows = rng.gen_range(0..12usize);
        let with_filter = rng.gen_bool(0.3);
        let mut body = String::from("ID\tKEEP\n");
        let mut kept = 0usize;
        for i in 0..rows {
            let keep = !with_filter || rng.gen_bool(0.6);
            if keep {
                kept += 1;
            }
            body.push_str(&format!("P{i}\t{}\n", if keep { "yes" } else { "no" }));
        }
        fs::write(tmp.path().join("rows.tsv"), body).unwrap();

        let mut text = String::from(
            "name: lifecycle\nsource_files: [rows.tsv]\ntransform:\n  hooks: lifecycle\nwriter:\n  output_dir: out\nlog_level: debug\n",
        );
        if with_filter {
            text.push_str(
                "filters:\n  - column: KEEP\n    inclusion: include\n    filter_code: eq\n    value: 'yes'\n",
            );
        }
        let config = load_config(&text).unwrap();

        let with_prepare = rng.gen_bool(0.5);
        let with_begin = rng.gen_bool(0.5);
        let with_end = rng.gen_bool(0.5);
        let mut hooks = HookSet::transform_record(|_ctx, _record| Ok(()));
        if with_prepare {
            hooks = hooks.with_prepare_data(|_| Ok(()));
        }
        if with_begin {
            hooks = hooks.with_on_data_begin(|_| Ok(()));
        }
        if with_end {
            hooks = hooks.with_on_data_end(|_| Ok(()));
        }

        let report = run_ingest(&config, tmp.path(), Some(hooks)).unwrap();
        let entries: Vec<&str> = report
            .log
            .iter()
            .filter_map(|e| e.message.strip_prefix("hook-entry "))
            .collect();

        let mut expected = Vec::new();
        if with_prepare {
            expected.push("prepare_data");
        }
        if with_begin {
            expected.push("on_data_begin");
        }
        expected.extend(std::iter::repeat_n("dispatch", kept));
        if with_end {
            expected.push("on_data_end");
        }
        assert_eq!(
            entries, expected,
            "case {case}: lifecycle log order violated (rows={rows}, kept={kept})"
        );
    }

    // "Exactly one transform mode" violations are rejected at load time,
    // before any file is read: the configs reference a missing source.
    let both = "\
name: bad
source_files: [does_not_exist.csv]
transform:
  mapping:
    nodes:
      - id: {column: id}
        category: {const: biolink:Gene}
  hooks: something
writer:
  output_dir: out
";
    let err = load_config(both).unwrap_err();
    assert!(err.to_string().contains("exactly one transform mode"));
    let neither = "\
name: bad
source_files: [does_not_exist.csv]
transform: {}
writer:
  output_dir: out
";
    let err = load_config(neither).unwrap_err();
    assert!(err.to_string().contains("exactly one transform mode"));

    println!("[PASS] criterion 6: hook-entry ordering held on 100 randomized runs; dual/absent transform modes rejected before reading");
}

// ---------------------------------------------------------------------
// 7. Round-trip
// ---------------------------------------------------------------------

const PROPERTY_POOL: [&str; 3] = ["p1", "p2", "p3"];
const QUALIFIER_POOL: [&str; 2] = ["q1", "q2"];

fn random_nonempty_value(rng: &mut ChaCha8Rng) -> PropertyValue {
    match rng.gen_range(0..5) {
        0 => PropertyValue::Text(format!("text {} with\ttab", rng.gen_range(0..100))),
        1 => PropertyValue::Integer(rng.gen_range(-1000..1000)),
        2 => PropertyValue::Decimal(rng.gen_range(-10.0..10.0)),
        3 => PropertyValue::Boolean(rng.gen_bool(0.5)),
        _ => {
            let n = rng.gen_range(1..4);
            PropertyValue::text_list((0..n).map(|i| format!("v{i}"))).unwrap()
        }
    }
}

fn random_node(rng: &mut ChaCha8Rng, index: usize) -> KgNode {
    let mut node = KgNode::new(
        parse_curie(&format!("TEST:{index}")).unwrap(),
        vec![parse_curie("biolink:Gene").unwrap()],
    );
    if rng.gen_bool(0.7) {
        node.name = Some(format!("name {index}"));
    }
    if rng.gen_bool(0.3) {
        node.description = Some(format!("multi\nline {index}"));
    }
    if rng.gen_bool(0.5) {
        node.provided_by = vec!["alpha".to_string(), "beta".to_string()];
    }
    for property in PROPERTY_POOL {
        if rng.gen_bool(0.5) {
            node.properties
                .insert(property.to_string(), random_nonempty_value(rng));
        }
    }
    node
}

fn random_edge(rng: &mut ChaCha8Rng, index: usize) -> KgEdge {
    let mut edge = KgEdge::new(
        parse_curie(&format!("TEST:{}", rng.gen_range(0..50))).unwrap(),
        parse_curie("biolink:related_to").unwrap(),
        parse_curie(&format!("TEST:{}", rng.gen_range(0..50))).unwrap(),
    );
    if rng.gen_bool(0.4) {
        edge.category = vec![parse_curie("biolink:Association").unwrap()];
    }
    if rng.gen_bool(0.5) {
        edge.knowledge_source = Some(format!("infores:source-{index}"));
    }
    for qualifier in QUALIFIER_POOL {
        if rng.gen_bool(0.4) {
            edge.qualifiers
                .insert(qualifier.to_string(), random_nonempty_value(rng));
        }
    }
    for property in PROPERTY_POOL {
        if rng.gen_bool(0.4) {
            edge.properties
                .insert(property.to_string(), random_nonempty_value(rng));
        }
    }
    edge
}

#[test]
fn criterion_7_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0707);
    let tmp = tempfile::tempdir().unwrap();

    let mut config = WriterConfig {
        output_dir: tmp.path().to_path_buf(),
        node_property_columns: PROPERTY_POOL.iter().map(|s| s.to_string()).collect(),
        edge_property_columns: PROPERTY_POOL
            .iter()
            .chain(QUALIFIER_POOL.iter())
            .map(|s| s.to_string())
            .collect(),
        deduplicate: false,
        ..WriterConfig::default()
    };

    let nodes: Vec<KgNode> = (0..500).map(|i| random_node(&mut rng, i)).collect();
    let edges: Vec<KgEdge> = (0..500).map(|i| random_edge(&mut rng, i)).collect();

    // JSONL write -> read yields equal values.
    config.format = kgforge::config::OutputFormat::Jsonl;
    let mut writer = ArtifactWriter::create(tmp.path(), "rt", &config).unwrap();
    for node in &nodes {
        writer.write_node(node).unwrap();
    }
    for edge in &edges {
        writer.write_edge(edge).unwrap();
    }
    let (node_path, edge_path) = writer.paths();
    writer.finalize().unwrap();

    let node_rows = read_rows(&node_path, RowKind::Node).unwrap();
    assert_eq!(node_rows.rows.len(), nodes.len());
    for (row, expected) in node_rows.rows.iter().zip(&nodes) {
        let (decoded, report) = decode_node(row);
        assert!(report.is_empty(), "decode violations: {report}");
        assert_eq!(&decoded.unwrap(), expected);
    }
    let edge_rows = read_rows(&edge_path, RowKind::Edge).unwrap();
    assert_eq!(edge_rows.rows.len(), edges.len());
    for (row, original) in edge_rows.rows.iter().zip(&edges) {
        let (decoded, report) = decode_edge(row);
        assert!(report.is_empty(), "decode violations: {report}");
        let mut expected = original.clone();
        expected.id = kgforge::model::edge_identity(original);
        assert_eq!(decoded.unwrap(), expected);
    }

    // TSV rows always carry exactly (columns - 1) TABs.
    config.format = kgforge::config::OutputFormat::Tsv;
    let mut writer = ArtifactWriter::create(tmp.path(), "rt_tsv", &config).unwrap();
    for node in &nodes {
        writer.write_node(node).unwrap();
    }
    for edge in &edges {
        writer.write_edge(edge).unwrap();
    }
    let (node_path, edge_path) = writer.paths();
    writer.finalize().unwrap();
    for (path, columns) in [
        (&node_path, 5 + PROPERTY_POOL.len()),
        (&edge_path, 6 + PROPERTY_POOL.len() + QUALIFIER_POOL.len()),
    ] {
        let text = fs::read_to_string(path).unwrap();
        let mut lines = 0;
        for line in text.lines() {
            assert_eq!(
                line.matches('\t').count(),
                columns - 1,
                "bad tab count in {}",
                path.display()
            );
            lines += 1;
        }
        assert_eq!(lines, 501);
    }
    println!("[PASS] criterion 7: 500 random nodes and edges round-tripped through jsonl; TSV rows all carry (columns-1) TABs");
}

// ---------------------------------------------------------------------
// 8. Error policy
// ---------------------------------------------------------------------

fn failing_hooks() -> HookSet {
    HookSet::transform_record(|ctx, record| {
        let id = record.get_text("ID").unwrap_or_default();
        if id == "P7" {
            return Err(HookError::msg("injected fault"));
        }
        let node = KgNode::new(
            parse_curie(&format!("TEST:{id}"))?,
            vec![parse_curie("biolink:Gene")?],
        );
        ctx.write(node)?;
        Ok(())
    })
}

#[test]
fn criterion_8_error_policy() {
    let tmp = tempfile::tempdir().unwrap();
    let mut body = String::from("ID\n");
    for i in 1..=10 {
        body.push_str(&format!("P{i}\n"));
    }
    fs::write(tmp.path().join("rows.tsv"), body).unwrap();
    let text = "\
name: faulty
source_files: [rows.tsv]
transform:
  hooks: faulty
writer:
  output_dir: out
";
    let config = load_config(text).unwrap();
    let report = run_ingest(&config, tmp.path(), Some(failing_hooks())).unwrap();
    assert_eq!(report.counters.records_in, 10);
    assert_eq!(report.counters.records_rejected, 1);
    assert_eq!(report.counters.nodes_out, 9);
    let rows = fs::read_to_string(tmp.path().join("out/faulty_nodes.tsv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 10, "expected header + 9 node rows");

    let mut strict = load_config(text).unwrap();
    strict.continue_on_record_error = false;
    strict.writer.output_dir = PathBuf::from("out_strict");
    let err = run_ingest(&strict, tmp.path(), Some(failing_hooks())).unwrap_err();
    assert!(err.to_string().contains("continue_on_record_error"));
    let out_strict = tmp.path().join("out_strict");
    assert!(
        !out_strict.join("faulty_nodes.tsv").exists()
            && !out_strict.join("faulty_edges.tsv").exists(),
        "partial artifacts left behind after abort"
    );
    println!("[PASS] criterion 8: 1-in-10 fault left 9 records' outputs with records_rejected=1; strict policy aborted with no partial artifacts");
}

// ---------------------------------------------------------------------
// 9. Reproducibility
// ---------------------------------------------------------------------

#[test]
fn criterion_9_reproducibility() {
    let (_tmp, corpus) = corpus_in_tempdir();
    let cache_dir = corpus.join("cache");

    // Route the source through the URL fetch cache so "cached inputs" is
    // literal: a file:// URL fetched on the first run, cache-hit on the
    // second.
    let source_url = format!(
        "file://{}",
        corpus.join("source/clingen_variants.csv").display()
    );
    let config_text = fs::read_to_string(corpus.join("ingest.yaml"))
        .unwrap()
        .replace("  - source/clingen_variants.csv", &format!("  - {source_url}"));
    let config_path = corpus.join("ingest_url.yaml");
    fs::write(&config_path, config_text).unwrap();

    let run = || {
        let status = Command::new(BIN)
            .arg("transform")
            .arg(&config_path)
            .env("KGFORGE_CACHE_DIR", &cache_dir)
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "transform run failed");
        let nodes = fs::read(corpus.join("output/clingen_mini_nodes.tsv")).unwrap();
        let edges = fs::read(corpus.join("output/clingen_mini_edges.tsv")).unwrap();
        let manifest = fs::read(corpus.join("output/clingen_mini_manifest.yaml")).unwrap();
        (nodes, edges, manifest)
    };

    let first = run();
    let second = run();
    assert_eq!(first.0, second.0, "node artifacts differ between runs");
    assert_eq!(first.1, second.1, "edge artifacts differ between runs");
    assert_eq!(first.2, second.2, "manifest digests differ between runs");
    // The delimiter default came from the original .csv name; the cached
    // copy has no extension, so the config-level default must have stuck.
    assert!(!first.0.is_empty());
    println!("[PASS] criterion 9: two consecutive transform runs over cached inputs produced byte-identical artifacts and equal manifests");
}
