//! Schema graph built from compiled descriptor sets: messages, enums,
//! reference edges, strongly connected components, and field path enumeration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::descriptor::{self, EnumDescriptor, FieldDescriptor, MessageDescriptor};
use crate::error::{Error, Result};

/// Scalar/composite wire kind of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Double,
    Float,
    Int32,
    Int64,
    UInt32,
    UInt64,
    SInt32,
    SInt64,
    Fixed32,
    Fixed64,
    SFixed32,
    SFixed64,
    Bool,
    String,
    Bytes,
    Enum,
    Message,
}

impl FieldKind {
    pub fn is_numeric(self) -> bool {
        !matches!(
            self,
            FieldKind::Bool | FieldKind::String | FieldKind::Bytes | FieldKind::Enum | FieldKind::Message
        )
    }

    pub fn is_integer(self) -> bool {
        self.is_numeric() && !matches!(self, FieldKind::Double | FieldKind::Float)
    }

    fn from_descriptor_type(t: i32) -> Option<FieldKind> {
        Some(match t {
            1 => FieldKind::Double,
            2 => FieldKind::Float,
            3 => FieldKind::Int64,
            4 => FieldKind::UInt64,
            5 => FieldKind::Int32,
            6 => FieldKind::Fixed64,
            7 => FieldKind::Fixed32,
            8 => FieldKind::Bool,
            9 => FieldKind::String,
            11 => FieldKind::Message,
            12 => FieldKind::Bytes,
            13 => FieldKind::UInt32,
            14 => FieldKind::Enum,
            15 => FieldKind::SFixed32,
            16 => FieldKind::SFixed64,
            17 => FieldKind::SInt32,
            18 => FieldKind::SInt64,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cardinality {
    Singular,
    Optional,
    Repeated,
}

/// One field of a message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub name: String,
    pub number: u32,
    pub kind: FieldKind,
    pub cardinality: Cardinality,
    /// Fully-qualified type name, present iff kind is enum or message.
    pub type_name: Option<String>,
    /// Name of the containing oneof group, if any (proto3 optionals excluded).
    pub oneof: Option<String>,
    /// True when this field's message type is a synthesized map entry.
    pub is_map: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MessageInfo {
    pub fields: Vec<FieldInfo>,
    /// Declared oneof group names, in declaration order.
    pub oneofs: Vec<String>,
    /// True for synthesized map entry messages.
    pub map_entry: bool,
}

impl MessageInfo {
    pub fn field(&self, name: &str) -> Option<&FieldInfo> {
        self.fields.iter().find(|f| f.name == name)
    }
}

/// Parsed, resolved schema: the navigable form of a descriptor set.
#[derive(Debug, Clone, Default)]
pub struct SchemaGraph {
    pub messages: BTreeMap<String, MessageInfo>,
    pub enums: BTreeMap<String, Vec<(String, i32)>>,
    /// containing message -> referenced message, for every message-typed field.
    pub edges: BTreeMap<String, BTreeSet<String>>,
    /// SCCs that contain a cycle (|SCC| > 1 or a self-loop).
    pub cyclic_groups: Vec<BTreeSet<String>>,
}

impl SchemaGraph {
    pub fn message(&self, name: &str) -> Result<&MessageInfo> {
        self.messages
            .get(name)
            .ok_or_else(|| Error::UnknownType(name.to_string()))
    }

    pub fn enum_values(&self, name: &str) -> Result<&[(String, i32)]> {
        self.enums
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UnknownType(name.to_string()))
    }

    pub fn enum_value_name(&self, enum_name: &str, number: i32) -> Option<&str> {
        self.enums
            .get(enum_name)?
            .iter()
            .find(|(_, n)| *n == number)
            .map(|(name, _)| name.as_str())
    }

    /// True when `message` belongs to a cyclic group.
    pub fn is_cyclic(&self, message: &str) -> bool {
        self.cyclic_groups.iter().any(|g| g.contains(message))
    }

    pub fn field_count(&self) -> usize {
        self.messages.values().map(|m| m.fields.len()).sum()
    }

    /// Builds the graph from already-assembled message and enum maps,
    /// resolving references and computing edges and cyclic groups.
    pub fn build(
        messages: BTreeMap<String, MessageInfo>,
        enums: BTreeMap<String, Vec<(String, i32)>>,
    ) -> Result<SchemaGraph> {
        let mut edges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (msg_name, info) in &messages {
            for field in &info.fields {
                match field.kind {
                    FieldKind::Message => {
                        let target = field.type_name.as_deref().unwrap_or("");
                        if !messages.contains_key(target) {
                            return Err(Error::UnresolvedType {
                                type_name: target.to_string(),
                                referrer: format!("{msg_name}.{}", field.name),
                            });
                        }
                        edges
                            .entry(msg_name.clone())
                            .or_default()
                            .insert(target.to_string());
                    }
                    FieldKind::Enum => {
                        let target = field.type_name.as_deref().unwrap_or("");
                        if !enums.contains_key(target) {
                            return Err(Error::UnresolvedType {
                                type_name: target.to_string(),
                                referrer: format!("{msg_name}.{}", field.name),
                            });
                        }
                    }
                    _ => {}
                }
            }
        }
        let cyclic_groups = cyclic_sccs(&messages, &edges);
        Ok(SchemaGraph {
            messages,
            enums,
            edges,
            cyclic_groups,
        })
    }
}

/// Parses a serialized `FileDescriptorSet` into a resolved schema graph.
pub fn load_descriptor_set(bytes: &[u8]) -> Result<SchemaGraph> {
    let set = descriptor::parse_file_descriptor_set(bytes)?;
    let mut messages = BTreeMap::new();
    let mut enums = BTreeMap::new();
    for file in &set.files {
        let prefix = if file.package.is_empty() {
            String::new()
        } else {
            format!("{}.", file.package)
        };
        for msg in &file.messages {
            collect_message(&prefix, msg, &mut messages, &mut enums)?;
        }
        for en in &file.enums {
            collect_enum(&prefix, en, &mut enums);
        }
    }
    // mark map fields now that all entry messages are known
    let map_entries: BTreeSet<String> = messages
        .iter()
        .filter(|(_, m)| m.map_entry)
        .map(|(n, _)| n.clone())
        .collect();
    for info in messages.values_mut() {
        for field in &mut info.fields {
            if field.kind == FieldKind::Message {
                if let Some(t) = &field.type_name {
                    field.is_map = map_entries.contains(t);
                }
            }
        }
    }
    SchemaGraph::build(messages, enums)
}

fn collect_message(
    prefix: &str,
    msg: &MessageDescriptor,
    messages: &mut BTreeMap<String, MessageInfo>,
    enums: &mut BTreeMap<String, Vec<(String, i32)>>,
) -> Result<()> {
    let fq = format!("{prefix}{}", msg.name);
    let mut info = MessageInfo {
        fields: Vec::with_capacity(msg.fields.len()),
        oneofs: Vec::new(),
        map_entry: msg.map_entry,
    };
    // proto3 optionals live in synthetic single-member oneofs; drop those groups
    let mut synthetic: BTreeSet<i32> = BTreeSet::new();
    for field in &msg.fields {
        if field.proto3_optional {
            if let Some(idx) = field.oneof_index {
                synthetic.insert(idx);
            }
        }
    }
    for (idx, name) in msg.oneof_names.iter().enumerate() {
        if !synthetic.contains(&(idx as i32)) {
            info.oneofs.push(name.clone());
        }
    }
    for field in &msg.fields {
        info.fields.push(convert_field(&fq, field, &msg.oneof_names, &synthetic)?);
    }
    messages.insert(fq.clone(), info);
    let nested_prefix = format!("{fq}.");
    for nested in &msg.nested_messages {
        collect_message(&nested_prefix, nested, messages, enums)?;
    }
    for en in &msg.nested_enums {
        collect_enum(&nested_prefix, en, enums);
    }
    Ok(())
}

fn collect_enum(
    prefix: &str,
    en: &EnumDescriptor,
    enums: &mut BTreeMap<String, Vec<(String, i32)>>,
) {
    enums.insert(format!("{prefix}{}", en.name), en.values.clone());
}

fn convert_field(
    message: &str,
    field: &FieldDescriptor,
    oneof_names: &[String],
    synthetic_oneofs: &BTreeSet<i32>,
) -> Result<FieldInfo> {
    let kind = FieldKind::from_descriptor_type(field.type_).ok_or_else(|| {
        Error::DescriptorParse {
            offset: 0,
            reason: format!(
                "field {message}.{} has unsupported type code {}",
                field.name, field.type_
            ),
        }
    })?;
    let cardinality = match field.label {
        3 => Cardinality::Repeated,
        // proto2 `required` treated as singular-and-always-set
        2 => Cardinality::Singular,
        _ => {
            if field.proto3_optional {
                Cardinality::Optional
            } else {
                Cardinality::Singular
            }
        }
    };
    let type_name = if matches!(kind, FieldKind::Enum | FieldKind::Message) {
        Some(field.type_name.trim_start_matches('.').to_string())
    } else {
        None
    };
    let oneof = match field.oneof_index {
        Some(idx) if !field.proto3_optional && !synthetic_oneofs.contains(&idx) => {
            oneof_names.get(idx as usize).cloned()
        }
        _ => None,
    };
    if field.number < 1 {
        return Err(Error::DescriptorParse {
            offset: 0,
            reason: format!("field {message}.{} has invalid number {}", field.name, field.number),
        });
    }
    Ok(FieldInfo {
        name: field.name.clone(),
        number: field.number as u32,
        kind,
        cardinality,
        type_name,
        oneof,
        is_map: false,
    })
}

/// Tarjan SCC restricted to components that actually contain a cycle.
fn cyclic_sccs(
    messages: &BTreeMap<String, MessageInfo>,
    edges: &BTreeMap<String, BTreeSet<String>>,
) -> Vec<BTreeSet<String>> {
    let names: Vec<&String> = messages.keys().collect();
    let index_of: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let n = names.len();
    let adj: Vec<Vec<usize>> = names
        .iter()
        .map(|name| {
            edges
                .get(*name)
                .map(|targets| {
                    targets
                        .iter()
                        .filter_map(|t| index_of.get(t.as_str()).copied())
                        .collect()
                })
                .unwrap_or_default()
        })
        .collect();

    let mut state = TarjanState {
        adj: &adj,
        index: vec![usize::MAX; n],
        lowlink: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        counter: 0,
        components: Vec::new(),
    };
    for v in 0..n {
        if state.index[v] == usize::MAX {
            state.visit(v);
        }
    }

    let mut out = Vec::new();
    for comp in state.components {
        let cyclic = comp.len() > 1
            || comp
                .first()
                .map(|&v| adj[v].contains(&v))
                .unwrap_or(false);
        if cyclic {
            out.push(comp.into_iter().map(|v| names[v].clone()).collect());
        }
    }
    out
}

struct TarjanState<'a> {
    adj: &'a [Vec<usize>],
    index: Vec<usize>,
    lowlink: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    counter: usize,
    components: Vec<Vec<usize>>,
}

impl TarjanState<'_> {
    fn visit(&mut self, v: usize) {
        self.index[v] = self.counter;
        self.lowlink[v] = self.counter;
        self.counter += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        for i in 0..self.adj[v].len() {
            let w = self.adj[v][i];
            if self.index[w] == usize::MAX {
                self.visit(w);
                self.lowlink[v] = self.lowlink[v].min(self.lowlink[w]);
            } else if self.on_stack[w] {
                self.lowlink[v] = self.lowlink[v].min(self.index[w]);
            }
        }
        if self.lowlink[v] == self.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().unwrap();
                self.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            self.components.push(comp);
        }
    }
}

/// Marker attached to a path segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentMarker {
    Plain,
    Repeated,
    MapKey,
    MapValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathSegment {
    pub name: String,
    pub marker: SegmentMarker,
}

/// Dotted traversal from a root message to a field, with repeated/map markers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldPath {
    pub segments: Vec<PathSegment>,
}

impl FieldPath {
    pub fn root() -> FieldPath {
        FieldPath::default()
    }

    pub fn child(&self, name: &str, marker: SegmentMarker) -> FieldPath {
        let mut segments = self.segments.clone();
        segments.push(PathSegment {
            name: name.to_string(),
            marker,
        });
        FieldPath { segments }
    }

    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    pub fn last_name(&self) -> Option<&str> {
        self.segments.last().map(|s| s.name.as_str())
    }

    /// Parses the canonical dotted text form (e.g. `order.items[].price`).
    pub fn parse(text: &str) -> Result<FieldPath> {
        let mut segments = Vec::new();
        for raw in text.split('.') {
            if raw.is_empty() {
                return Err(Error::Validation(format!("empty segment in field path `{text}`")));
            }
            let (name, marker) = if let Some(name) = raw.strip_suffix("[]") {
                (name, SegmentMarker::Repeated)
            } else if let Some(name) = raw.strip_suffix("{}key") {
                (name, SegmentMarker::MapKey)
            } else if let Some(name) = raw.strip_suffix("{}value") {
                (name, SegmentMarker::MapValue)
            } else {
                (raw, SegmentMarker::Plain)
            };
            segments.push(PathSegment {
                name: name.to_string(),
                marker,
            });
        }
        Ok(FieldPath { segments })
    }
}

impl fmt::Display for FieldPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(&seg.name)?;
            match seg.marker {
                SegmentMarker::Plain => {}
                SegmentMarker::Repeated => f.write_str("[]")?,
                SegmentMarker::MapKey => f.write_str("{}key")?,
                SegmentMarker::MapValue => f.write_str("{}value")?,
            }
        }
        Ok(())
    }
}

/// Depth-first enumeration of reachable field paths from `root`, truncated at
/// `max_depth` segments. A message type already on the current branch is
/// emitted once and not re-expanded.
pub fn field_paths(schema: &SchemaGraph, root: &str, max_depth: usize) -> Result<Vec<FieldPath>> {
    let info = schema.message(root)?;
    let mut out = Vec::new();
    let mut branch = vec![root.to_string()];
    walk_paths(schema, info, &FieldPath::root(), max_depth, &mut branch, &mut out);
    Ok(out)
}

fn walk_paths(
    schema: &SchemaGraph,
    info: &MessageInfo,
    prefix: &FieldPath,
    max_depth: usize,
    branch: &mut Vec<String>,
    out: &mut Vec<FieldPath>,
) {
    if prefix.depth() >= max_depth {
        return;
    }
    for field in &info.fields {
        if field.is_map {
            // map entry: emit key/value paths instead of traversing the entry message
            let entry_name = field.type_name.as_deref().unwrap_or("");
            let Ok(entry) = schema.message(entry_name) else {
                continue;
            };
            let key_path = prefix.child(&field.name, SegmentMarker::MapKey);
            out.push(key_path);
            let value_path = prefix.child(&field.name, SegmentMarker::MapValue);
            out.push(value_path.clone());
            if let Some(value_field) = entry.field("value") {
                if value_field.kind == FieldKind::Message {
                    let target = value_field.type_name.as_deref().unwrap_or("");
                    if !branch.iter().any(|b| b == target) {
                        if let Ok(sub) = schema.message(target) {
                            branch.push(target.to_string());
                            walk_paths(schema, sub, &value_path, max_depth, branch, out);
                            branch.pop();
                        }
                    }
                }
            }
            continue;
        }
        let marker = if field.cardinality == Cardinality::Repeated {
            SegmentMarker::Repeated
        } else {
            SegmentMarker::Plain
        };
        let path = prefix.child(&field.name, marker);
        out.push(path.clone());
        if field.kind == FieldKind::Message {
            let target = field.type_name.as_deref().unwrap_or("");
            if branch.iter().any(|b| b == target) {
                continue; // emitted once, not re-expanded
            }
            if let Ok(sub) = schema.message(target) {
                branch.push(target.to_string());
                walk_paths(schema, sub, &path, max_depth, branch, out);
                branch.pop();
            }
        }
    }
}

/// Human-readable diagnostics: message count, max nesting depth, cyclic groups.
pub fn schema_report(schema: &SchemaGraph) -> String {
    let mut max_depth = 0usize;
    for root in schema.messages.keys() {
        if let Ok(paths) = field_paths(schema, root, 64) {
            for p in &paths {
                max_depth = max_depth.max(p.depth());
            }
        }
    }
    let mut out = String::new();
    out.push_str(&format!("messages: {}\n", schema.messages.len()));
    out.push_str(&format!("enums: {}\n", schema.enums.len()));
    out.push_str(&format!("fields: {}\n", schema.field_count()));
    out.push_str(&format!("max nesting depth: {max_depth}\n"));
    out.push_str(&format!("cyclic groups: {}\n", schema.cyclic_groups.len()));
    for group in &schema.cyclic_groups {
        let names: Vec<&str> = group.iter().map(|s| s.as_str()).collect();
        out.push_str(&format!("  {{{}}}\n", names.join(", ")));
    }
    out
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn minimal_schema_no_edges() {
        let g = graph(vec![("demo.Ping", vec![scalar("seq", 1, FieldKind::Int32)])]);
        assert_eq!(g.messages.len(), 1);
        assert_eq!(g.field_count(), 1);
        assert!(g.edges.is_empty());
        assert!(g.cyclic_groups.is_empty());
    }

    #[test]
    fn self_loop_is_cyclic() {
        let g = graph(vec![(
            "demo.Node",
            vec![
                message_field("next", 1, "demo.Node"),
                scalar("v", 2, FieldKind::Int32),
            ],
        )]);
        assert_eq!(g.cyclic_groups.len(), 1);
        assert!(g.cyclic_groups[0].contains("demo.Node"));
        assert!(g.is_cyclic("demo.Node"));
    }

    #[test]
    fn three_node_ring_is_one_group() {
        let g = graph(vec![
            ("t.A", vec![message_field("b", 1, "t.B")]),
            ("t.B", vec![message_field("c", 1, "t.C")]),
            ("t.C", vec![message_field("a", 1, "t.A")]),
        ]);
        assert_eq!(g.cyclic_groups.len(), 1);
        let expected: BTreeSet<String> =
            ["t.A", "t.B", "t.C"].iter().map(|s| s.to_string()).collect();
        assert_eq!(g.cyclic_groups[0], expected);
    }

    #[test]
    fn acyclic_chain_has_no_groups() {
        let g = graph(vec![
            ("t.A", vec![message_field("b", 1, "t.B")]),
            ("t.B", vec![message_field("c", 1, "t.C")]),
            ("t.C", vec![scalar("x", 1, FieldKind::Int32)]),
        ]);
        assert!(g.cyclic_groups.is_empty());
    }

    #[test]
    fn unresolved_reference_is_an_error() {
        let map: BTreeMap<String, MessageInfo> = [(
            "t.A".to_string(),
            MessageInfo {
                fields: vec![message_field("b", 1, "t.Missing")],
                oneofs: Vec::new(),
                map_entry: false,
            },
        )]
        .into_iter()
        .collect();
        let err = SchemaGraph::build(map, BTreeMap::new()).unwrap_err();
        match err {
            Error::UnresolvedType { type_name, referrer } => {
                assert_eq!(type_name, "t.Missing");
                assert_eq!(referrer, "t.A.b");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn field_paths_flat() {
        let g = graph(vec![("demo.Ping", vec![scalar("seq", 1, FieldKind::Int32)])]);
        let paths = field_paths(&g, "demo.Ping", 16).unwrap();
        let text: Vec<String> = paths.iter().map(|p| p.to_string()).collect();
        assert_eq!(text, vec!["seq"]);
    }

    #[test]
    fn field_paths_repeated_nesting() {
        let g = graph(vec![
            (
                "shop.Order",
                vec![repeated(message_field("items", 1, "shop.Item"))],
            ),
            ("shop.Item", vec![scalar("qty", 1, FieldKind::Int32)]),
        ]);
        let paths = field_paths(&g, "shop.Order", 16).unwrap();
        let text: Vec<String> = paths.iter().map(|p| p.to_string()).collect();
        assert_eq!(text, vec!["items[]", "items[].qty"]);
    }

    #[test]
    fn field_paths_depth_limit_on_recursive_type() {
        let g = graph(vec![(
            "demo.Node",
            vec![
                message_field("next", 1, "demo.Node"),
                scalar("v", 2, FieldKind::Int32),
            ],
        )]);
        let paths = field_paths(&g, "demo.Node", 3).unwrap();
        let text: Vec<String> = paths.iter().map(|p| p.to_string()).collect();
        // recursive type emitted once, not re-expanded
        assert!(text.contains(&"next".to_string()));
        assert!(text.contains(&"v".to_string()));
        assert!(!text.contains(&"next.next.next".to_string()));
        for p in &paths {
            assert!(p.depth() <= 3);
        }
    }

    #[test]
    fn unknown_root_is_an_error() {
        let g = graph(vec![("demo.Ping", vec![scalar("seq", 1, FieldKind::Int32)])]);
        assert!(matches!(
            field_paths(&g, "demo.Pong", 4),
            Err(Error::UnknownType(_))
        ));
    }

    #[test]
    fn path_text_roundtrip() {
        for text in ["seq", "order.items[].price", "attrs{}key", "attrs{}value.name"] {
            let p = FieldPath::parse(text).unwrap();
            assert_eq!(p.to_string(), text);
        }
    }

    #[test]
    fn report_mentions_cycles() {
        let g = graph(vec![(
            "demo.Node",
            vec![message_field("next", 1, "demo.Node")],
        )]);
        let report = schema_report(&g);
        assert!(report.contains("cyclic groups: 1"));
        assert!(report.contains("demo.Node"));
    }
}
