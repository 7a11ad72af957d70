//! Quality assessment: structural validation, two-sample statistical
//! comparison, rule-based semantic checks, and the combined quality score.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{matches_pattern, PatternId};
use crate::schema::{FieldInfo, FieldKind, FieldPath, SchemaGraph, SegmentMarker};
use crate::value::{FieldValue, MessageValue, Value};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_TV_THRESHOLD: f64 = 0.1;

/// Component weights of the overall quality score.
pub const W_STRUCT: f64 = 0.3;
pub const W_STAT: f64 = 0.4;
pub const W_SEM: f64 = 0.2;
pub const W_DIV: f64 = 0.1;

// ---------------------------------------------------------------------------
// Statistical primitives
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d: f64,
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(diff);
    }
    let ne = (n as f64) * (m as f64) / ((n + m) as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Ok(KsResult {
        d,
        p_value: kolmogorov_sf(lambda),
        n,
        m,
    })
}

/// Asymptotic Kolmogorov survival function Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-9 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * lambda.powi(2)).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Shannon entropy in bits of an observed count distribution.
pub fn shannon_entropy(counts: &BTreeMap<String, u64>) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let mut h = 0.0;
    for &c in counts.values() {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    h
}

/// Total variation distance between two count distributions.
pub fn total_variation(p: &BTreeMap<String, u64>, q: &BTreeMap<String, u64>) -> f64 {
    let pt: u64 = p.values().sum();
    let qt: u64 = q.values().sum();
    if pt == 0 || qt == 0 {
        return 1.0;
    }
    let mut keys: std::collections::BTreeSet<&String> = p.keys().collect();
    keys.extend(q.keys());
    let mut tv = 0.0;
    for k in keys {
        let a = *p.get(k).unwrap_or(&0) as f64 / pt as f64;
        let b = *q.get(k).unwrap_or(&0) as f64 / qt as f64;
        tv += (a - b).abs();
    }
    tv / 2.0
}

// ---------------------------------------------------------------------------
// Structural validation
// ---------------------------------------------------------------------------

/// Fraction of instances that round-trip cleanly through the wire format and
/// carry only declared enum values.
pub fn validate_structure(
    instances: &[MessageValue],
    root: &str,
    schema: &SchemaGraph,
) -> Result<f64> {
    if instances.is_empty() {
        return Err(Error::EmptyDataset);
    }
    schema.message(root)?;
    let mut ok = 0usize;
    for m in instances {
        if m.type_name == root && instance_valid(m, schema) {
            ok += 1;
        }
    }
    Ok(ok as f64 / instances.len() as f64)
}

fn instance_valid(m: &MessageValue, schema: &SchemaGraph) -> bool {
    let Ok(bytes) = crate::value::encode_message(m, schema) else {
        return false;
    };
    let Ok(back) = crate::value::decode_message(&bytes, &m.type_name, schema) else {
        return false;
    };
    back == *m && enums_declared(m, schema)
}

fn enums_declared(m: &MessageValue, schema: &SchemaGraph) -> bool {
    let Ok(info) = schema.message(&m.type_name) else {
        return false;
    };
    for field in &info.fields {
        let Some(fv) = m.get(field.number) else { continue };
        let values: Vec<&Value> = match fv {
            FieldValue::Single(v) => vec![v],
            FieldValue::Repeated(vs) => vs.iter().collect(),
        };
        for v in values {
            match v {
                Value::Enum(n) => {
                    let enum_name = field.type_name.as_deref().unwrap_or("");
                    if schema.enum_value_name(enum_name, *n).is_none() {
                        return false;
                    }
                }
                Value::Message(sub)
                    if !enums_declared(sub, schema) => {
                        return false;
                    }
                _ => {}
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Rules engine (rules/v1)
// ---------------------------------------------------------------------------

pub const RULES_FORMAT: &str = "rules/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    NonNull {
        field: String,
    },
    InRange {
        field: String,
        min: f64,
        max: f64,
    },
    OneOf {
        field: String,
        values: Vec<String>,
    },
    Matches {
        field: String,
        pattern: String,
    },
    /// One level of implication: when `if` holds, `then` must hold.
    Implies {
        #[serde(rename = "if")]
        condition: Condition,
        then: Box<Rule>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub field: String,
    pub equals: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub format: String,
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn from_json_str(s: &str) -> Result<RuleSet> {
        let rs: RuleSet = serde_json::from_str(s)?;
        if rs.format != RULES_FORMAT {
            return Err(Error::Config(format!(
                "unsupported rules format `{}`",
                rs.format
            )));
        }
        Ok(rs)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<RuleSet> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    fn fields(&self) -> Vec<&str> {
        fn push<'a>(rule: &'a Rule, out: &mut Vec<&'a str>) {
            match rule {
                Rule::NonNull { field }
                | Rule::InRange { field, .. }
                | Rule::OneOf { field, .. }
                | Rule::Matches { field, .. } => out.push(field),
                Rule::Implies { condition, then } => {
                    out.push(&condition.field);
                    push(then, out);
                }
            }
        }
        let mut out = Vec::new();
        for r in &self.rules {
            push(r, &mut out);
        }
        out
    }
}

/// Checks that a dotted field path exists under `root` in the schema.
fn validate_rule_path(schema: &SchemaGraph, root: &str, path_text: &str) -> Result<()> {
    let path = FieldPath::parse(path_text)
        .map_err(|_| Error::Config(format!("invalid rule field path `{path_text}`")))?;
    let mut current = root.to_string();
    for (i, seg) in path.segments.iter().enumerate() {
        let info = schema
            .messages
            .get(&current)
            .ok_or_else(|| Error::Config(format!("rule path `{path_text}`: unknown type `{current}`")))?;
        let field = info.field(&seg.name).ok_or_else(|| {
            Error::Config(format!(
                "rule path `{path_text}`: no field `{}` in `{current}`",
                seg.name
            ))
        })?;
        if i + 1 < path.segments.len() {
            current = match seg.marker {
                SegmentMarker::MapValue => {
                    let entry = field.type_name.as_deref().unwrap_or("");
                    schema
                        .messages
                        .get(entry)
                        .and_then(|e| e.field("value"))
                        .and_then(|f| f.type_name.clone())
                        .ok_or_else(|| {
                            Error::Config(format!("rule path `{path_text}` is not traversable"))
                        })?
                }
                _ => field.type_name.clone().ok_or_else(|| {
                    Error::Config(format!(
                        "rule path `{path_text}`: `{}` is not a message field",
                        seg.name
                    ))
                })?,
            };
        }
    }
    Ok(())
}

/// Collects every value reachable at `path` inside one instance.
fn values_at<'a>(msg: &'a MessageValue, schema: &SchemaGraph, path: &FieldPath) -> Vec<&'a Value> {
    fn step<'a>(
        msg: &'a MessageValue,
        schema: &SchemaGraph,
        segs: &[crate::schema::PathSegment],
        out: &mut Vec<&'a Value>,
    ) {
        let Some(seg) = segs.first() else { return };
        let Ok(info) = schema.message(&msg.type_name) else {
            return;
        };
        let Some(field) = info.field(&seg.name) else {
            return;
        };
        let Some(fv) = msg.get(field.number) else {
            return;
        };
        let rest = &segs[1..];
        let candidates: Vec<&Value> = match fv {
            FieldValue::Single(v) => vec![v],
            FieldValue::Repeated(vs) => vs.iter().collect(),
        };
        match seg.marker {
            SegmentMarker::MapKey | SegmentMarker::MapValue => {
                let want = if seg.marker == SegmentMarker::MapKey {
                    "key"
                } else {
                    "value"
                };
                for v in candidates {
                    let Value::Message(entry) = v else { continue };
                    let Ok(einfo) = schema.message(&entry.type_name) else {
                        continue;
                    };
                    let Some(ef) = einfo.field(want) else { continue };
                    if let Some(FieldValue::Single(inner)) = entry.get(ef.number) {
                        if rest.is_empty() {
                            out.push(inner);
                        } else if let Value::Message(sub) = inner {
                            step(sub, schema, rest, out);
                        }
                    }
                }
            }
            _ => {
                for v in candidates {
                    if rest.is_empty() {
                        out.push(v);
                    } else if let Value::Message(sub) = v {
                        step(sub, schema, rest, out);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    step(msg, schema, &path.segments, &mut out);
    out
}

fn canon_of(v: &Value, path_field: Option<&FieldInfo>, schema: &SchemaGraph) -> String {
    if let (Value::Enum(n), Some(f)) = (v, path_field) {
        if let Some(enum_name) = f.type_name.as_deref() {
            if let Some(name) = schema.enum_value_name(enum_name, *n) {
                return name.to_string();
            }
        }
    }
    v.canon_key()
}

fn field_of_path<'a>(
    schema: &'a SchemaGraph,
    root: &str,
    path: &FieldPath,
) -> Option<&'a FieldInfo> {
    let mut current = root.to_string();
    let mut found: Option<&FieldInfo> = None;
    for (i, seg) in path.segments.iter().enumerate() {
        let info = schema.messages.get(&current)?;
        let field = info.field(&seg.name)?;
        if matches!(seg.marker, SegmentMarker::MapKey | SegmentMarker::MapValue) {
            let entry = schema.messages.get(field.type_name.as_deref()?)?;
            let inner = entry.field(if seg.marker == SegmentMarker::MapKey {
                "key"
            } else {
                "value"
            })?;
            if i + 1 == path.segments.len() {
                return Some(inner);
            }
            current = inner.type_name.clone()?;
            continue;
        }
        found = Some(field);
        if i + 1 < path.segments.len() {
            current = field.type_name.clone()?;
        }
    }
    found
}

fn rule_holds(rule: &Rule, msg: &MessageValue, root: &str, schema: &SchemaGraph) -> bool {
    match rule {
        Rule::NonNull { field } => {
            let Ok(path) = FieldPath::parse(field) else {
                return false;
            };
            !values_at(msg, schema, &path).is_empty()
        }
        Rule::InRange { field, min, max } => {
            with_values(msg, root, schema, field, |values, _| {
                values
                    .iter()
                    .all(|v| v.as_f64().map(|x| x >= *min && x <= *max).unwrap_or(false))
            })
        }
        Rule::OneOf { field, values: allowed } => {
            with_values(msg, root, schema, field, |values, fi| {
                values
                    .iter()
                    .all(|v| allowed.contains(&canon_of(v, fi, schema)))
            })
        }
        Rule::Matches { field, pattern } => {
            let Some(pid) = PatternId::parse(pattern) else {
                return false;
            };
            with_values(msg, root, schema, field, |values, _| {
                values.iter().all(|v| match v {
                    Value::Str(s) => matches_pattern(pid, s),
                    _ => false,
                })
            })
        }
        Rule::Implies { condition, then } => {
            let triggered = with_values(msg, root, schema, &condition.field, |values, fi| {
                values
                    .iter()
                    .any(|v| canon_of(v, fi, schema) == condition.equals)
            });
            // vacuous truth requires the condition to have evaluable values
            let Ok(path) = FieldPath::parse(&condition.field) else {
                return false;
            };
            let any = !values_at(msg, schema, &path).is_empty();
            if any && triggered {
                rule_holds(then, msg, root, schema)
            } else {
                true
            }
        }
    }
}

/// Rules other than non_null hold vacuously when the field is absent.
fn with_values(
    msg: &MessageValue,
    root: &str,
    schema: &SchemaGraph,
    field: &str,
    pred: impl Fn(&[&Value], Option<&FieldInfo>) -> bool,
) -> bool {
    let Ok(path) = FieldPath::parse(field) else {
        return false;
    };
    let values = values_at(msg, schema, &path);
    if values.is_empty() {
        return true;
    }
    let fi = field_of_path(schema, root, &path);
    pred(&values, fi)
}

/// Fraction of instances satisfying every rule. Unresolvable rule targets are
/// a configuration error.
pub fn evaluate_rules(
    instances: &[MessageValue],
    rules: &RuleSet,
    root: &str,
    schema: &SchemaGraph,
) -> Result<f64> {
    for field in rules.fields() {
        validate_rule_path(schema, root, field)?;
    }
    if instances.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let ok = instances
        .iter()
        .filter(|m| rules.rules.iter().all(|r| rule_holds(r, m, root, schema)))
        .count();
    Ok(ok as f64 / instances.len() as f64)
}

// ---------------------------------------------------------------------------
// Combined score and full assessment
// ---------------------------------------------------------------------------

/// Q = 0.3·q_struct + 0.4·q_stat + 0.2·q_sem + 0.1·q_div.
pub fn quality_score(q_struct: f64, q_stat: f64, q_sem: f64, q_div: f64) -> Result<f64> {
    for (name, v) in [
        ("q_struct", q_struct),
        ("q_stat", q_stat),
        ("q_sem", q_sem),
        ("q_div", q_div),
    ] {
        if !(0.0..=1.0).contains(&v) || v.is_nan() {
            return Err(Error::Validation(format!(
                "{name} = {v} is outside [0, 1]"
            )));
        }
    }
    Ok(W_STRUCT * q_struct + W_STAT * q_stat + W_SEM * q_sem + W_DIV * q_div)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldComparison {
    pub path: String,
    pub kind: String,
    pub test: String,
    pub statistic: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub q_struct: f64,
    pub q_stat: f64,
    pub q_sem: f64,
    pub q_div: f64,
    pub overall: f64,
    pub compared_fields: usize,
    pub fields: Vec<FieldComparison>,
}

impl QualityReport {
    /// Structured text rendering with an aligned per-field table.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("quality assessment\n");
        out.push_str(&format!("  structural  (w=0.3): {:.4}\n", self.q_struct));
        out.push_str(&format!("  statistical (w=0.4): {:.4}\n", self.q_stat));
        out.push_str(&format!("  semantic    (w=0.2): {:.4}\n", self.q_sem));
        out.push_str(&format!("  diversity   (w=0.1): {:.4}\n", self.q_div));
        out.push_str(&format!("  overall            : {:.4}\n", self.overall));
        if !self.fields.is_empty() {
            let width = self
                .fields
                .iter()
                .map(|f| f.path.len())
                .max()
                .unwrap_or(4)
                .max(5);
            out.push_str(&format!(
                "\n  {:<width$}  {:<8}  {:<10}  {:>9}  result\n",
                "field", "kind", "test", "statistic"
            ));
            for f in &self.fields {
                out.push_str(&format!(
                    "  {:<width$}  {:<8}  {:<10}  {:>9.4}  {}\n",
                    f.path,
                    f.kind,
                    f.test,
                    f.statistic,
                    if f.passed { "pass" } else { "FAIL" }
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct AssessOptions {
    pub alpha: f64,
    pub tv_threshold: f64,
    /// Reference distinct-value cap above which categorical TV is skipped.
    pub top_k: usize,
}

impl Default for AssessOptions {
    fn default() -> Self {
        AssessOptions {
            alpha: DEFAULT_ALPHA,
            tv_threshold: DEFAULT_TV_THRESHOLD,
            top_k: crate::analyzer::DEFAULT_TOP_K,
        }
    }
}

#[derive(Default)]
struct FieldSample {
    numeric: Vec<f64>,
    lengths: Vec<f64>,
    counts: BTreeMap<String, u64>,
    kind: Option<FieldKind>,
}

fn collect_samples(
    instances: &[MessageValue],
    schema: &SchemaGraph,
) -> BTreeMap<String, FieldSample> {
    let mut out: BTreeMap<String, FieldSample> = BTreeMap::new();
    for m in instances {
        walk(m, schema, &FieldPath::root(), &mut out);
    }
    out
}

fn record_value(
    out: &mut BTreeMap<String, FieldSample>,
    schema: &SchemaGraph,
    path: &FieldPath,
    field: &FieldInfo,
    v: &Value,
) {
    let entry = out.entry(path.to_string()).or_default();
    entry.kind = Some(field.kind);
    let key = canon_of(v, Some(field), schema);
    *entry.counts.entry(key).or_insert(0) += 1;
    if let Some(x) = v.as_f64() {
        entry.numeric.push(x);
    }
    if let Value::Str(s) = v {
        entry.lengths.push(s.chars().count() as f64);
    }
}

fn walk(
    msg: &MessageValue,
    schema: &SchemaGraph,
    prefix: &FieldPath,
    out: &mut BTreeMap<String, FieldSample>,
) {
    let Ok(info) = schema.message(&msg.type_name) else {
        return;
    };
    for field in &info.fields {
        let Some(fv) = msg.get(field.number) else { continue };
        if field.is_map {
            let key_path = prefix.child(&field.name, SegmentMarker::MapKey);
            let value_path = prefix.child(&field.name, SegmentMarker::MapValue);
            let FieldValue::Repeated(entries) = fv else { continue };
            for e in entries {
                let Value::Message(em) = e else { continue };
                let Ok(einfo) = schema.message(&em.type_name) else {
                    continue;
                };
                if let (Some(kf), Some(vf)) = (einfo.field("key"), einfo.field("value")) {
                    if let Some(FieldValue::Single(kv)) = em.get(kf.number) {
                        record_value(out, schema, &key_path, kf, kv);
                    }
                    if let Some(FieldValue::Single(vv)) = em.get(vf.number) {
                        match vv {
                            Value::Message(sub) => walk(sub, schema, &value_path, out),
                            other => record_value(out, schema, &value_path, vf, other),
                        }
                    }
                }
            }
            continue;
        }
        let marker = if matches!(fv, FieldValue::Repeated(_)) {
            SegmentMarker::Repeated
        } else {
            SegmentMarker::Plain
        };
        let path = prefix.child(&field.name, marker);
        let values: Vec<&Value> = match fv {
            FieldValue::Single(v) => vec![v],
            FieldValue::Repeated(vs) => vs.iter().collect(),
        };
        for v in values {
            match v {
                Value::Message(sub) => walk(sub, schema, &path, out),
                other => record_value(out, schema, &path, field, other),
            }
        }
    }
}

/// Full four-component assessment of generated instances against a reference
/// sample of the same root type.
pub fn assess(
    schema: &SchemaGraph,
    root: &str,
    generated: &[MessageValue],
    reference: &[MessageValue],
    rules: Option<&RuleSet>,
    opts: &AssessOptions,
) -> Result<QualityReport> {
    if generated.is_empty() || reference.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let q_struct = validate_structure(generated, root, schema)?;
    let q_sem = match rules {
        Some(rs) => evaluate_rules(generated, rs, root, schema)?,
        None => 1.0,
    };

    let gen_samples = collect_samples(generated, schema);
    let ref_samples = collect_samples(reference, schema);

    let mut fields = Vec::new();
    let mut passed = 0usize;
    let mut compared = 0usize;
    let mut div_sum = 0.0;
    let mut div_n = 0usize;

    for (path, rs) in &ref_samples {
        let Some(kind) = rs.kind else { continue };
        if rs.counts.values().sum::<u64>() < 2 {
            continue;
        }
        // diversity: entropy ratio, 1.0 for single-valued references
        let h_ref = shannon_entropy(&rs.counts);
        if let Some(gs) = gen_samples.get(path) {
            let ratio = if h_ref <= 0.0 {
                1.0
            } else {
                (shannon_entropy(&gs.counts) / h_ref).clamp(0.0, 1.0)
            };
            div_sum += ratio;
            div_n += 1;
        } else {
            div_n += 1; // missing field contributes zero diversity
        }

        let empty = FieldSample::default();
        let g = gen_samples.get(path).unwrap_or(&empty);
        let missing = |test: &str| FieldComparison {
            path: path.clone(),
            kind: format!("{kind:?}").to_lowercase(),
            test: test.into(),
            statistic: 0.0,
            passed: false,
        };
        let comparison = match kind {
            k if k.is_numeric() => {
                if rs.numeric.len() < 2 {
                    None
                } else if g.numeric.len() < 2 {
                    Some(missing("ks"))
                } else {
                    let ks = ks_two_sample(&rs.numeric, &g.numeric)?;
                    Some(FieldComparison {
                        path: path.clone(),
                        kind: format!("{kind:?}").to_lowercase(),
                        test: "ks".into(),
                        statistic: ks.p_value,
                        passed: ks.p_value > opts.alpha,
                    })
                }
            }
            FieldKind::String => {
                if rs.lengths.len() < 2 {
                    None
                } else if g.lengths.len() < 2 {
                    Some(missing("length-ks"))
                } else {
                    let ks = ks_two_sample(&rs.lengths, &g.lengths)?;
                    let mut ok = ks.p_value > opts.alpha;
                    let mut stat = ks.p_value;
                    let mut test = "length-ks".to_string();
                    // value-level TV only when the reference is low-cardinality
                    if rs.counts.len() <= opts.top_k {
                        let tv = total_variation(&rs.counts, &g.counts);
                        ok = ok && tv < opts.tv_threshold;
                        stat = tv;
                        test = "length-ks+tv".into();
                    }
                    Some(FieldComparison {
                        path: path.clone(),
                        kind: "string".into(),
                        test,
                        statistic: stat,
                        passed: ok,
                    })
                }
            }
            FieldKind::Bool | FieldKind::Enum => {
                let tv = total_variation(&rs.counts, &g.counts);
                Some(FieldComparison {
                    path: path.clone(),
                    kind: format!("{kind:?}").to_lowercase(),
                    test: "tv".into(),
                    statistic: tv,
                    passed: tv < opts.tv_threshold,
                })
            }
            _ => None,
        };
        if let Some(c) = comparison {
            compared += 1;
            if c.passed {
                passed += 1;
            }
            fields.push(c);
        }
    }
    if compared == 0 {
        return Err(Error::NoComparableFields);
    }
    let q_stat = passed as f64 / compared as f64;
    let q_div = if div_n == 0 {
        1.0
    } else {
        div_sum / div_n as f64
    };
    let overall = quality_score(q_struct, q_stat, q_sem, q_div)?;
    Ok(QualityReport {
        q_struct,
        q_stat,
        q_sem,
        q_div,
        overall,
        compared_fields: compared,
        fields,
    })
}
