//! Statistical domain analysis: one streaming pass over a log corpus builds
//! per-field-path profiles (stats, patterns, constraints) and per-message
//! dependency records with conditional tables.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusStream, LogCorpus};
use crate::error::{Error, Result};
use crate::pattern::{detect_pattern, PatternSpec};
use crate::schema::{Cardinality, FieldInfo, FieldKind, FieldPath, SchemaGraph, SegmentMarker};
use crate::stats::{correlation_ratio, pearson, FreqTable, NumericSummary};
use crate::value::{FieldValue, MessageValue, Value};

pub const DOMAIN_MODEL_FORMAT: &str = "domain-model/v1";
pub const DEFAULT_TOP_K: usize = 1000;
/// |r| must exceed this for a statistical dependency.
pub const CORRELATION_THRESHOLD: f64 = 0.7;
/// Rows sampled per message type for correlation / conditional analysis.
pub const DEFAULT_ROW_CAP: usize = 100_000;
/// Controlling fields with more distinct values than this are skipped.
pub const CONDITIONAL_CARDINALITY_LIMIT: usize = 10_000;
/// Values retained per path for percentile computation.
const VALUE_CAP: usize = 200_000;
/// String samples retained per path for pattern detection.
const PATTERN_SAMPLE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    /// Occurrences of the containing message instance.
    pub count: u64,
    /// Occurrences where this field was set (non-empty for repeated).
    pub present_count: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub numeric: Option<NumericSummary<f64>>,
    pub frequencies: FreqTable,
}

impl FieldStats {
    pub fn null_probability(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            1.0 - (self.present_count as f64) / (self.count as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Semantic,
    Correlation,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dependency {
    pub path: String,
    pub r: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub range: Option<(f64, f64)>,
    pub null_probability: f64,
    pub dependencies: Vec<Dependency>,
}

/// Everything learned about one field path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub stats: FieldStats,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pattern: Option<PatternSpec>,
    pub constraints: ConstraintSet,
    /// Length histogram for repeated fields.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub repeated_len: Option<BTreeMap<usize, u64>>,
}

/// Conditional distribution of a dependent field given a controlling value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTable {
    /// controlling value -> (dependent value -> count)
    pub rows: BTreeMap<String, BTreeMap<String, u64>>,
    /// Unconditional dependent-value counts; the fallback distribution.
    pub marginal: BTreeMap<String, u64>,
}

impl ConditionalTable {
    pub fn co_presence_count(&self) -> u64 {
        self.rows.values().flat_map(|r| r.values()).sum()
    }
}

/// A detected (or annotated) dependency between two direct fields of one
/// message type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageDependency {
    pub controlling: String,
    pub dependent: String,
    pub r: f64,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub table: Option<ConditionalTable>,
}

/// The statistical domain model mined from a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainModel {
    pub format: String,
    pub record_count: u64,
    pub skipped_count: u64,
    pub schema_fingerprint: String,
    pub analyzed_at_unix: u64,
    /// root message type -> canonical path text -> profile
    pub profiles: BTreeMap<String, BTreeMap<String, Profile>>,
    /// message type -> detected dependencies among its direct fields
    pub dependencies: BTreeMap<String, Vec<MessageDependency>>,
}

impl DomainModel {
    pub fn empty() -> DomainModel {
        DomainModel {
            format: DOMAIN_MODEL_FORMAT.to_string(),
            record_count: 0,
            skipped_count: 0,
            schema_fingerprint: String::new(),
            analyzed_at_unix: 0,
            profiles: BTreeMap::new(),
            dependencies: BTreeMap::new(),
        }
    }

    pub fn profile(&self, root: &str, path: &str) -> Option<&Profile> {
        self.profiles.get(root)?.get(path)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<DomainModel> {
        let model: DomainModel = serde_json::from_str(s)?;
        if model.format != DOMAIN_MODEL_FORMAT {
            return Err(Error::Config(format!(
                "unsupported domain model format `{}`",
                model.format
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<DomainModel> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// FNV-1a over the schema's structural description.
pub fn schema_fingerprint(schema: &SchemaGraph) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    };
    for (name, info) in &schema.messages {
        eat(name.as_bytes());
        for f in &info.fields {
            eat(f.name.as_bytes());
            eat(&f.number.to_le_bytes());
            eat(format!("{:?}{:?}", f.kind, f.cardinality).as_bytes());
        }
    }
    for (name, values) in &schema.enums {
        eat(name.as_bytes());
        for (vn, num) in values {
            eat(vn.as_bytes());
            eat(&num.to_le_bytes());
        }
    }
    format!("{hash:016x}")
}

/// Range, nullability, and threshold-filtered dependencies from field stats.
pub fn infer_constraints(stats: &FieldStats, correlations: &[(String, f64)]) -> ConstraintSet {
    let range = stats.numeric.as_ref().map(|n| (n.min, n.max));
    let dependencies = correlations
        .iter()
        .filter(|(_, r)| r.abs() > CORRELATION_THRESHOLD)
        .map(|(path, r)| Dependency {
            path: path.clone(),
            r: *r,
            provenance: Provenance::Correlation,
        })
        .collect();
    ConstraintSet {
        range,
        null_probability: stats.null_probability(),
        dependencies,
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub top_k: usize,
    pub malformed_threshold: f64,
    pub row_cap: usize,
    /// Extra (message type, controlling field, dependent field) edges from an
    /// annotations sidecar; tables are built for them when kinds allow.
    pub annotations: Vec<(String, String, String)>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            top_k: DEFAULT_TOP_K,
            malformed_threshold: crate::corpus::DEFAULT_MALFORMED_THRESHOLD,
            row_cap: DEFAULT_ROW_CAP,
            annotations: Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// Accumulators
// ---------------------------------------------------------------------------

#[derive(Default)]
struct PathAcc {
    count: u64,
    present: u64,
    // streaming moments
    n: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
    values: Vec<f64>,
    values_truncated: bool,
    freqs: Option<FreqTable>,
    string_samples: Vec<String>,
    repeated_len: BTreeMap<usize, u64>,
    is_repeated: bool,
    is_string: bool,
    is_numeric: bool,
}

impl PathAcc {
    fn record_numeric(&mut self, v: f64, rng: &mut ChaCha8Rng) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
        if self.n == 1 {
            self.min = v;
            self.max = v;
        } else {
            self.min = self.min.min(v);
            self.max = self.max.max(v);
        }
        if self.values.len() < VALUE_CAP {
            self.values.push(v);
        } else {
            self.values_truncated = true;
            let j = rng.gen_range(0..self.n);
            if (j as usize) < VALUE_CAP {
                self.values[j as usize] = v;
            }
        }
    }
}

#[derive(Clone)]
struct RowVal {
    key: String,
    num: Option<f64>,
}

/// One sampled occurrence of a message type: direct scalar field values by
/// declaration index.
type Row = Vec<Option<RowVal>>;

struct TypeRows {
    field_names: Vec<String>,
    field_kinds: Vec<FieldKind>,
    rows: Vec<Row>,
    seen: u64,
}

struct Accumulators<'a> {
    schema: &'a SchemaGraph,
    paths: BTreeMap<(String, String), PathAcc>,
    rows: BTreeMap<String, TypeRows>,
    rng: ChaCha8Rng,
    row_cap: usize,
    top_k: usize,
}

fn canon_value(value: &Value, field: &FieldInfo, schema: &SchemaGraph) -> String {
    if let (Value::Enum(n), Some(enum_name)) = (value, field.type_name.as_deref()) {
        if let Some(name) = schema.enum_value_name(enum_name, *n) {
            return name.to_string();
        }
    }
    value.canon_key()
}

impl<'a> Accumulators<'a> {
    fn new(schema: &'a SchemaGraph, opts: &AnalyzeOptions) -> Accumulators<'a> {
        Accumulators {
            schema,
            paths: BTreeMap::new(),
            rows: BTreeMap::new(),
            rng: ChaCha8Rng::seed_from_u64(0x5eed_a0a1),
            row_cap: opts.row_cap,
            top_k: opts.top_k,
        }
    }

    fn path_acc(&mut self, root: &str, path: &FieldPath, field: &FieldInfo) -> &mut PathAcc {
        let key = (root.to_string(), path.to_string());
        let top_k = self.top_k;
        self.paths.entry(key).or_insert_with(|| {
            let mut acc = PathAcc {
                // track extra entries so finalize can pick a true top-k
                freqs: Some(FreqTable::new(top_k.saturating_mul(8))),
                is_repeated: field.cardinality == Cardinality::Repeated,
                is_string: field.kind == FieldKind::String,
                is_numeric: field.kind.is_numeric(),
                ..PathAcc::default()
            };
            acc.min = f64::INFINITY;
            acc.max = f64::NEG_INFINITY;
            acc
        })
    }

    fn record_scalar(&mut self, root: &str, path: &FieldPath, field: &FieldInfo, value: &Value) {
        let key = canon_value(value, field, self.schema);
        let numeric = value.as_f64();
        let acc = self.path_acc(root, path, field);
        if let Some(freqs) = acc.freqs.as_mut() {
            freqs.record(&key);
        }
        if let Some(v) = numeric {
            let mut rng = self.rng.clone();
            // split borrow: re-fetch after clone to appease the borrow checker
            let acc = self.paths.get_mut(&(root.to_string(), path.to_string())).unwrap();
            acc.record_numeric(v, &mut rng);
            self.rng = rng;
        } else if let Value::Str(s) = value {
            let acc = self.paths.get_mut(&(root.to_string(), path.to_string())).unwrap();
            if acc.string_samples.len() < PATTERN_SAMPLE_CAP {
                acc.string_samples.push(s.clone());
            }
        }
    }

    fn visit_message(&mut self, root: &str, prefix: &FieldPath, msg: &MessageValue) {
        let Ok(info) = self.schema.message(&msg.type_name) else {
            return;
        };
        // row sampling for dependency analysis
        self.sample_row(msg, info);

        let fields: Vec<FieldInfo> = info.fields.clone();
        for field in &fields {
            if field.is_map {
                self.visit_map_field(root, prefix, msg, field);
                continue;
            }
            let marker = if field.cardinality == Cardinality::Repeated {
                SegmentMarker::Repeated
            } else {
                SegmentMarker::Plain
            };
            let path = prefix.child(&field.name, marker);
            let fv = msg.get(field.number);
            {
                let acc = self.path_acc(root, &path, field);
                acc.count += 1;
            }
            match fv {
                None => {}
                Some(FieldValue::Single(v)) => {
                    let acc = self.path_acc(root, &path, field);
                    acc.present += 1;
                    if let Value::Message(sub) = v {
                        self.visit_message(root, &path, sub);
                    } else {
                        self.record_scalar(root, &path, field, v);
                    }
                }
                Some(FieldValue::Repeated(values)) => {
                    {
                        let acc = self.path_acc(root, &path, field);
                        if !values.is_empty() {
                            acc.present += 1;
                        }
                        *acc.repeated_len.entry(values.len()).or_insert(0) += 1;
                    }
                    for v in values {
                        if let Value::Message(sub) = v {
                            self.visit_message(root, &path, sub);
                        } else {
                            self.record_scalar(root, &path, field, v);
                        }
                    }
                }
            }
        }
    }

    fn visit_map_field(
        &mut self,
        root: &str,
        prefix: &FieldPath,
        msg: &MessageValue,
        field: &FieldInfo,
    ) {
        let entry_type = field.type_name.clone().unwrap_or_default();
        let Ok(entry_info) = self.schema.message(&entry_type) else {
            return;
        };
        let (Some(kf), Some(vf)) = (
            entry_info.field("key").cloned(),
            entry_info.field("value").cloned(),
        ) else {
            return;
        };
        let key_path = prefix.child(&field.name, SegmentMarker::MapKey);
        let value_path = prefix.child(&field.name, SegmentMarker::MapValue);
        let entries = match msg.get(field.number) {
            Some(FieldValue::Repeated(vs)) => vs.as_slice(),
            _ => &[],
        };
        for entry in entries {
            let Value::Message(em) = entry else { continue };
            {
                let acc = self.path_acc(root, &key_path, &kf);
                acc.count += 1;
            }
            if let Some(FieldValue::Single(kv)) = em.get(kf.number) {
                {
                    let acc = self.path_acc(root, &key_path, &kf);
                    acc.present += 1;
                }
                self.record_scalar(root, &key_path, &kf, kv);
            }
            {
                let acc = self.path_acc(root, &value_path, &vf);
                acc.count += 1;
            }
            if let Some(FieldValue::Single(vv)) = em.get(vf.number) {
                {
                    let acc = self.path_acc(root, &value_path, &vf);
                    acc.present += 1;
                }
                if let Value::Message(sub) = vv {
                    self.visit_message(root, &value_path, sub);
                } else {
                    self.record_scalar(root, &value_path, &vf, vv);
                }
            }
        }
    }

    fn sample_row(&mut self, msg: &MessageValue, info: &crate::schema::MessageInfo) {
        let scalar_fields: Vec<&FieldInfo> = info
            .fields
            .iter()
            .filter(|f| {
                f.kind != FieldKind::Message && f.cardinality != Cardinality::Repeated
            })
            .collect();
        if scalar_fields.len() < 2 {
            return;
        }
        let mut row: Row = Vec::with_capacity(scalar_fields.len());
        for f in &scalar_fields {
            let val = match msg.get(f.number) {
                Some(FieldValue::Single(v)) if !matches!(v, Value::Message(_)) => Some(RowVal {
                    key: canon_value(v, f, self.schema),
                    num: v.as_f64(),
                }),
                _ => None,
            };
            row.push(val);
        }
        let entry = self
            .rows
            .entry(msg.type_name.clone())
            .or_insert_with(|| TypeRows {
                field_names: scalar_fields.iter().map(|f| f.name.clone()).collect(),
                field_kinds: scalar_fields.iter().map(|f| f.kind).collect(),
                rows: Vec::new(),
                seen: 0,
            });
        entry.seen += 1;
        if entry.rows.len() < self.row_cap {
            entry.rows.push(row);
        } else {
            let j = self.rng.gen_range(0..entry.seen);
            if (j as usize) < self.row_cap {
                entry.rows[j as usize] = row;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Analysis driver
// ---------------------------------------------------------------------------

/// Runs the full analysis over an opened corpus stream.
pub fn analyze_stream(
    stream: &mut dyn CorpusStream,
    schema: &SchemaGraph,
    opts: &AnalyzeOptions,
) -> Result<DomainModel> {
    let mut acc = Accumulators::new(schema, opts);
    let mut record_count = 0u64;
    while let Some(record) = stream.next_record()? {
        schema.message(&record.type_name)?;
        acc.visit_message(&record.type_name, &FieldPath::root(), &record.message);
        record_count += 1;
    }
    stream.finish(opts.malformed_threshold)?;

    let dependencies = detect_dependencies(&acc, schema, opts);
    let profiles = build_profiles(acc, &dependencies, opts);

    Ok(DomainModel {
        format: DOMAIN_MODEL_FORMAT.to_string(),
        record_count,
        skipped_count: stream.skipped() as u64,
        schema_fingerprint: schema_fingerprint(schema),
        analyzed_at_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        profiles,
        dependencies,
    })
}

/// Opens the corpus and analyzes it.
pub fn analyze(corpus: &LogCorpus, schema: &SchemaGraph, opts: &AnalyzeOptions) -> Result<DomainModel> {
    let mut stream = corpus.open(schema)?;
    analyze_stream(stream.as_mut(), schema, opts)
}

fn build_profiles(
    acc: Accumulators<'_>,
    dependencies: &BTreeMap<String, Vec<MessageDependency>>,
    opts: &AnalyzeOptions,
) -> BTreeMap<String, BTreeMap<String, Profile>> {
    let schema = acc.schema;
    let mut out: BTreeMap<String, BTreeMap<String, Profile>> = BTreeMap::new();
    for ((root, path_text), mut pa) in acc.paths {
        let mut freqs = pa.freqs.take().unwrap_or_else(|| FreqTable::new(opts.top_k));
        freqs.finalize(opts.top_k);
        let numeric = if pa.is_numeric && pa.n > 0 {
            let mut sorted = pa.values.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            let mut percentiles = BTreeMap::new();
            for p in crate::stats::PERCENTILE_GRID {
                percentiles.insert(p, crate::stats::nearest_rank(&sorted, p));
            }
            Some(NumericSummary {
                count: pa.n,
                mean: pa.mean,
                variance: if pa.n <= 1 { 0.0 } else { pa.m2 / (pa.n - 1) as f64 },
                min: pa.min,
                max: pa.max,
                percentiles,
            })
        } else {
            None
        };
        let stats = FieldStats {
            count: pa.count,
            present_count: pa.present,
            numeric,
            frequencies: freqs,
        };
        let pattern = if pa.is_string && !pa.string_samples.is_empty() {
            Some(detect_pattern(&pa.string_samples))
        } else {
            None
        };
        // attach dependency records where this path is the dependent field
        let deps: Vec<Dependency> = match FieldPath::parse(&path_text) {
            Ok(fp) => {
                let field_name = fp.last_name().unwrap_or_default().to_string();
                let parent_type =
                    containing_message_type(schema, &root, &fp).unwrap_or_default();
                let prefix = path_text
                    .rfind('.')
                    .map(|i| &path_text[..=i])
                    .unwrap_or("")
                    .to_string();
                dependencies
                    .get(&parent_type)
                    .map(|list| {
                        list.iter()
                            .filter(|d| d.dependent == field_name)
                            .map(|d| Dependency {
                                path: format!("{prefix}{}", d.controlling),
                                r: d.r,
                                provenance: d.provenance,
                            })
                            .collect()
                    })
                    .unwrap_or_default()
            }
            Err(_) => Vec::new(),
        };
        let constraints = ConstraintSet {
            range: stats.numeric.as_ref().map(|n| (n.min, n.max)),
            null_probability: stats.null_probability(),
            dependencies: deps,
        };
        let profile = Profile {
            stats,
            pattern,
            constraints,
            repeated_len: if pa.is_repeated && !pa.repeated_len.is_empty() {
                Some(pa.repeated_len)
            } else {
                None
            },
        };
        out.entry(root).or_default().insert(path_text, profile);
    }
    out
}

/// Resolves the message type containing the last segment of `path` under `root`.
pub fn containing_message_type(
    schema: &SchemaGraph,
    root: &str,
    path: &FieldPath,
) -> Option<String> {
    let mut current = root.to_string();
    for (i, seg) in path.segments.iter().enumerate() {
        let info = schema.messages.get(&current)?;
        let field = info.field(&seg.name)?;
        if i + 1 == path.segments.len() {
            match seg.marker {
                // map key/value live in the synthesized entry message
                SegmentMarker::MapKey | SegmentMarker::MapValue => {
                    return field.type_name.clone();
                }
                _ => return Some(current),
            }
        }
        match seg.marker {
            SegmentMarker::MapValue => {
                let entry = schema.messages.get(field.type_name.as_deref()?)?;
                current = entry.field("value")?.type_name.clone()?;
            }
            _ => {
                current = field.type_name.clone()?;
            }
        }
    }
    Some(current)
}

fn conditional_controller_kind(kind: FieldKind) -> bool {
    matches!(
        kind,
        FieldKind::String | FieldKind::Enum | FieldKind::Bool
    ) || kind.is_integer()
}

fn detect_dependencies(
    acc: &Accumulators<'_>,
    _schema: &SchemaGraph,
    opts: &AnalyzeOptions,
) -> BTreeMap<String, Vec<MessageDependency>> {
    let mut out: BTreeMap<String, Vec<MessageDependency>> = BTreeMap::new();
    for (type_name, tr) in &acc.rows {
        let nfields = tr.field_names.len();
        let mut deps = Vec::new();
        for i in 0..nfields {
            for j in 0..nfields {
                if i == j {
                    continue;
                }
                let ctrl_kind = tr.field_kinds[i];
                let dep_kind = tr.field_kinds[j];
                // numeric-numeric: pearson, directed earlier -> later
                if i < j && ctrl_kind.is_numeric() && dep_kind.is_numeric() {
                    let mut x = Vec::new();
                    let mut y = Vec::new();
                    for row in &tr.rows {
                        if let (Some(a), Some(b)) = (&row[i], &row[j]) {
                            if let (Some(av), Some(bv)) = (a.num, b.num) {
                                x.push(av);
                                y.push(bv);
                            }
                        }
                    }
                    if let Some(r) = pearson(&x, &y) {
                        if r.abs() > CORRELATION_THRESHOLD {
                            deps.push(MessageDependency {
                                controlling: tr.field_names[i].clone(),
                                dependent: tr.field_names[j].clone(),
                                r,
                                provenance: Provenance::Correlation,
                                table: None,
                            });
                        }
                    }
                }
                // categorical controller -> numeric dependent: correlation ratio
                if !ctrl_kind.is_numeric()
                    && conditional_controller_kind(ctrl_kind)
                    && dep_kind.is_numeric()
                {
                    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
                    for row in &tr.rows {
                        if let (Some(a), Some(b)) = (&row[i], &row[j]) {
                            if let Some(bv) = b.num {
                                groups.entry(a.key.as_str()).or_default().push(bv);
                            }
                        }
                    }
                    if groups.len() < 2 || groups.len() > CONDITIONAL_CARDINALITY_LIMIT {
                        continue;
                    }
                    let grouped: Vec<Vec<f64>> = groups.into_values().collect();
                    if let Some(eta) = correlation_ratio(&grouped) {
                        if eta > CORRELATION_THRESHOLD {
                            deps.push(MessageDependency {
                                controlling: tr.field_names[i].clone(),
                                dependent: tr.field_names[j].clone(),
                                r: eta,
                                provenance: Provenance::Correlation,
                                table: None,
                            });
                        }
                    }
                }
            }
        }
        // annotation edges for this type
        for (msg, ctrl, dep) in &opts.annotations {
            if msg == type_name
                && tr.field_names.iter().any(|n| n == ctrl)
                && tr.field_names.iter().any(|n| n == dep)
            {
                deps.push(MessageDependency {
                    controlling: ctrl.clone(),
                    dependent: dep.clone(),
                    r: 1.0,
                    provenance: Provenance::Annotation,
                    table: None,
                });
            }
        }
        // conditional tables for eligible controllers
        for dep in &mut deps {
            let ci = tr.field_names.iter().position(|n| n == &dep.controlling);
            let di = tr.field_names.iter().position(|n| n == &dep.dependent);
            let (Some(ci), Some(di)) = (ci, di) else { continue };
            if !conditional_controller_kind(tr.field_kinds[ci]) {
                continue;
            }
            dep.table = build_conditional_table(tr, ci, di);
        }
        deps.sort_by(|a, b| {
            (a.controlling.as_str(), a.dependent.as_str())
                .cmp(&(b.controlling.as_str(), b.dependent.as_str()))
        });
        if !deps.is_empty() {
            out.insert(type_name.clone(), deps);
        }
    }
    // annotation edges for types never row-sampled (fewer than 2 scalar fields)
    for (msg, ctrl, dep) in &opts.annotations {
        let list = out.entry(msg.clone()).or_default();
        if !list
            .iter()
            .any(|d| &d.controlling == ctrl && &d.dependent == dep)
            && !acc.rows.contains_key(msg)
        {
            list.push(MessageDependency {
                controlling: ctrl.clone(),
                dependent: dep.clone(),
                r: 1.0,
                provenance: Provenance::Annotation,
                table: None,
            });
        }
    }
    out.retain(|_, v| !v.is_empty());
    out
}

fn build_conditional_table(tr: &TypeRows, ci: usize, di: usize) -> Option<ConditionalTable> {
    let mut rows: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut marginal: BTreeMap<String, u64> = BTreeMap::new();
    let mut distinct = std::collections::BTreeSet::new();
    for row in &tr.rows {
        if let Some(d) = &row[di] {
            *marginal.entry(d.key.clone()).or_insert(0) += 1;
        }
        if let (Some(c), Some(d)) = (&row[ci], &row[di]) {
            distinct.insert(c.key.clone());
            if distinct.len() > CONDITIONAL_CARDINALITY_LIMIT {
                return None; // cardinality overflow: fall back to marginal
            }
            *rows.entry(c.key.clone()).or_default().entry(d.key.clone()).or_insert(0) += 1;
        }
    }
    Some(ConditionalTable { rows, marginal })
}

/// Builds a conditional distribution for one (controlling, dependent) pair of
/// direct fields of `message_type`, from an in-memory record set.
pub fn conditional_table(
    records: &[crate::corpus::Record],
    message_type: &str,
    controlling: &str,
    dependent: &str,
    schema: &SchemaGraph,
) -> Result<ConditionalTable> {
    let info = schema.message(message_type)?;
    let cf = info.field(controlling).ok_or_else(|| Error::UnknownField {
        message: message_type.to_string(),
        field: controlling.to_string(),
    })?;
    let df = info.field(dependent).ok_or_else(|| Error::UnknownField {
        message: message_type.to_string(),
        field: dependent.to_string(),
    })?;
    let mut rows: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut marginal: BTreeMap<String, u64> = BTreeMap::new();
    let mut distinct = std::collections::BTreeSet::new();
    for rec in records {
        if rec.type_name != message_type {
            continue;
        }
        let cv = match rec.message.get(cf.number) {
            Some(FieldValue::Single(v)) => Some(canon_value(v, cf, schema)),
            _ => None,
        };
        let dv = match rec.message.get(df.number) {
            Some(FieldValue::Single(v)) => Some(canon_value(v, df, schema)),
            _ => None,
        };
        if let Some(d) = &dv {
            *marginal.entry(d.clone()).or_insert(0) += 1;
        }
        if let (Some(c), Some(d)) = (cv, dv) {
            distinct.insert(c.clone());
            if distinct.len() > CONDITIONAL_CARDINALITY_LIMIT {
                return Err(Error::Validation(format!(
                    "controlling field `{controlling}` exceeds {CONDITIONAL_CARDINALITY_LIMIT} distinct values"
                )));
            }
            *rows.entry(c).or_default().entry(d).or_insert(0) += 1;
        }
    }
    Ok(ConditionalTable { rows, marginal })
}
