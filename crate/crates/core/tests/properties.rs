//! Property-based checks against brute-force oracles.

use std::collections::BTreeMap;

use proptest::prelude::*;

use pbforge_core::analyzer::{analyze_stream, AnalyzeOptions};
use pbforge_core::corpus::{Record, VecStream};
use pbforge_core::depgraph::kahn_order;
use pbforge_core::registry::enhance;
use pbforge_core::schema::{Cardinality, FieldInfo, FieldKind, MessageInfo, SchemaGraph};
use pbforge_core::value::{FieldValue, MessageValue, Value};

fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> SchemaGraph {
    let mut messages: BTreeMap<String, MessageInfo> = BTreeMap::new();
    for i in 0..n {
        let fields = edges
            .iter()
            .filter(|(f, _)| *f == i)
            .enumerate()
            .map(|(k, (_, t))| FieldInfo {
                name: format!("f{k}"),
                number: k as u32 + 1,
                kind: FieldKind::Message,
                cardinality: Cardinality::Singular,
                type_name: Some(format!("p.M{t:02}")),
                oneof: None,
                is_map: false,
            })
            .collect();
        messages.insert(
            format!("p.M{i:02}"),
            MessageInfo {
                fields,
                oneofs: vec![],
                map_entry: false,
            },
        );
    }
    SchemaGraph::build(messages, BTreeMap::new()).unwrap()
}

/// Brute-force cyclic components via transitive closure.
fn oracle_cyclic_groups(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut reach = vec![vec![false; n]; n];
    for &(f, t) in edges {
        reach[f][t] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut groups = Vec::new();
    for v in 0..n {
        if seen[v] || !reach[v][v] {
            continue;
        }
        let mut group = Vec::new();
        for u in v..n {
            if reach[v][u] && reach[u][v] && reach[u][u] {
                group.push(u);
                seen[u] = true;
            }
        }
        groups.push(group);
    }
    groups.sort();
    groups
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scc_matches_reachability_oracle(
        n in 1usize..12,
        raw_edges in prop::collection::vec((0usize..12, 0usize..12), 0..30),
    ) {
        let edges: Vec<(usize, usize)> = raw_edges
            .into_iter()
            .map(|(f, t)| (f % n, t % n))
            .collect();
        let g = graph_from_edges(n, &edges);
        let mut got: Vec<Vec<usize>> = g
            .cyclic_groups
            .iter()
            .map(|grp| {
                let mut ids: Vec<usize> = grp
                    .iter()
                    .map(|name| name[3..].parse::<usize>().unwrap())
                    .collect();
                ids.sort();
                ids
            })
            .collect();
        got.sort();
        prop_assert_eq!(got, oracle_cyclic_groups(n, &edges));
    }

    #[test]
    fn kahn_is_lex_smallest_valid_order(
        n in 1usize..8,
        mask in prop::collection::vec(any::<bool>(), 0..28),
    ) {
        // DAG by construction: edges only go from lower to higher index
        let mut edges = Vec::new();
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if k < mask.len() && mask[k] {
                    edges.push((i, j));
                }
                k += 1;
            }
        }
        let order = kahn_order(n, edges.iter().copied()).expect("DAG must order");
        // valid: every edge respected
        let pos: Vec<usize> = {
            let mut p = vec![0; n];
            for (idx, &v) in order.iter().enumerate() {
                p[v] = idx;
            }
            p
        };
        for &(f, t) in &edges {
            prop_assert!(pos[f] < pos[t]);
        }
        // lexicographically smallest among all valid orders
        let all = all_topo_orders(n, &edges);
        prop_assert!(all.contains(&order));
        prop_assert_eq!(&order, all.iter().min().unwrap());
    }

    #[test]
    fn analyzer_profiles_are_permutation_invariant(values in prop::collection::vec(-50i32..50, 1..60)) {
        let schema = ping_schema();
        let records: Vec<Record> = values.iter().map(|&v| ping(v)).collect();
        let mut reversed = records.clone();
        reversed.reverse();
        let m1 = analyze_stream(&mut VecStream::new(records), &schema, &AnalyzeOptions::default()).unwrap();
        let m2 = analyze_stream(&mut VecStream::new(reversed), &schema, &AnalyzeOptions::default()).unwrap();
        let p1 = m1.profile("demo.Ping", "seq").unwrap();
        let p2 = m2.profile("demo.Ping", "seq").unwrap();
        prop_assert_eq!(&p1.stats.frequencies, &p2.stats.frequencies);
        let n1 = p1.stats.numeric.as_ref().unwrap();
        let n2 = p2.stats.numeric.as_ref().unwrap();
        prop_assert_eq!(&n1.percentiles, &n2.percentiles);
        prop_assert!((n1.mean - n2.mean).abs() < 1e-9);
        prop_assert!((n1.variance - n2.variance).abs() < 1e-9);
    }

    #[test]
    fn frequency_tables_conserve_counts(values in prop::collection::vec(0u8..20, 1..100)) {
        let schema = ping_schema();
        let records: Vec<Record> = values.iter().map(|&v| ping(v as i32)).collect();
        let model = analyze_stream(
            &mut VecStream::new(records),
            &schema,
            &AnalyzeOptions { top_k: 4, ..AnalyzeOptions::default() },
        )
        .unwrap();
        let p = model.profile("demo.Ping", "seq").unwrap();
        prop_assert_eq!(p.stats.frequencies.total(), values.len() as u64);
        prop_assert!(p.stats.frequencies.distinct() <= 4);
    }

    #[test]
    fn compute_stats_matches_direct_arithmetic(values in prop::collection::vec(-1e6f64..1e6, 1..200)) {
        let s = pbforge_core::stats::compute_stats(&values).unwrap();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        prop_assert!((s.mean - mean).abs() <= 1e-6 * mean.abs().max(1.0));
        if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            prop_assert!((s.variance - var).abs() <= 1e-6 * var.abs().max(1.0));
        } else {
            prop_assert_eq!(s.variance, 0.0);
        }
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert_eq!(s.min, sorted[0]);
        prop_assert_eq!(s.max, sorted[sorted.len() - 1]);
        for (&p, &v) in &s.percentiles {
            let rank = ((p as f64 / 100.0) * n).ceil().max(1.0) as usize;
            prop_assert_eq!(v, sorted[rank - 1]);
        }
    }

    #[test]
    fn wire_roundtrip_random_pings(values in prop::collection::vec(any::<i32>(), 1..50)) {
        let schema = ping_schema();
        for &v in &values {
            let msg = ping_msg(v);
            let bytes = pbforge_core::value::encode_message(&msg, &schema).unwrap();
            let back = pbforge_core::value::decode_message(&bytes, "demo.Ping", &schema).unwrap();
            prop_assert_eq!(msg, back);
        }
    }
}

fn all_topo_orders(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    fn rec(
        remaining: &mut Vec<usize>,
        edges: &[(usize, usize)],
        acc: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if remaining.is_empty() {
            out.push(acc.clone());
            return;
        }
        let candidates: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&v| {
                !edges
                    .iter()
                    .any(|&(f, t)| t == v && remaining.contains(&f))
            })
            .collect();
        for v in candidates {
            let idx = remaining.iter().position(|&x| x == v).unwrap();
            remaining.remove(idx);
            acc.push(v);
            rec(remaining, edges, acc, out);
            acc.pop();
            remaining.insert(idx, v);
        }
    }
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    rec(&mut remaining, edges, &mut Vec::new(), &mut out);
    out
}

fn ping_schema() -> SchemaGraph {
    let mut messages = BTreeMap::new();
    messages.insert(
        "demo.Ping".to_string(),
        MessageInfo {
            fields: vec![FieldInfo {
                name: "seq".into(),
                number: 1,
                kind: FieldKind::Int32,
                cardinality: Cardinality::Singular,
                type_name: None,
                oneof: None,
                is_map: false,
            }],
            oneofs: vec![],
            map_entry: false,
        },
    );
    SchemaGraph::build(messages, BTreeMap::new()).unwrap()
}

fn ping_msg(v: i32) -> MessageValue {
    let mut m = MessageValue::new("demo.Ping");
    m.set(1, FieldValue::Single(Value::Int32(v)));
    m
}

fn ping(v: i32) -> Record {
    Record {
        type_name: "demo.Ping".into(),
        message: ping_msg(v),
    }
}

#[test]
fn registry_is_total_over_fixture_schema() {
    let path = format!("{}/tests/fixtures/shop.bin", env!("CARGO_MANIFEST_DIR"));
    let schema = pbforge_core::schema::load_descriptor_set(&std::fs::read(path).unwrap()).unwrap();
    let reg = enhance(&schema, None);
    for (msg, info) in &schema.messages {
        for f in &info.fields {
            // every field answers with some plan (default or better)
            let _ = reg.plan(msg, &f.name);
            if f.kind != FieldKind::Message || f.is_map {
                assert!(reg.has_plan(msg, &f.name), "{msg}.{}", f.name);
            }
        }
    }
}

#[test]
fn pattern_detectors_accept_their_own_output() {
    use pbforge_core::pattern::*;
    // deterministic hand-rolled samples per detector
    for i in 0..200u32 {
        let uuid = format!("{i:08x}-{:04x}-4{:03x}-a{:03x}-{:012x}", i % 0xffff, i % 0xfff, i % 0xfff, i);
        assert!(is_uuid(&uuid), "{uuid}");
        let ts = format!("202{}-{:02}-{:02}T{:02}:{:02}:{:02}Z", i % 5, i % 12 + 1, i % 28 + 1, i % 24, i % 60, i % 60);
        assert!(is_iso8601(&ts), "{ts}");
        let email = format!("user{i}@example.com");
        assert!(is_email(&email));
        let num = format!("{}", i + 1);
        assert!(is_numeric_string(&num));
        let hex = format!("{i:08x}");
        assert!(is_hex(&hex));
    }
}
