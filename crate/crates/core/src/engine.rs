//! Instance generation: recursive descent over the schema with cycle
//! handling, constraint propagation, and seed-deterministic batch output.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analyzer::{ConditionalTable, DomainModel};
use crate::depgraph::{build_dependency_graph, DependencyGraph, FieldOrder};
use crate::error::{Error, Result};
use crate::pattern::{CharClass, PatternId, PatternSpec};
use crate::registry::{FieldPlan, FieldStrategy, GeneratorRegistry};
use crate::schema::{Cardinality, FieldInfo, FieldKind, MessageInfo, SchemaGraph};
use crate::stats::NumericSummary;
use crate::value::{FieldValue, MessageValue, Value};

pub const DEFAULT_MAX_DEPTH: usize = 16;
pub const DEFAULT_LAMBDA: f64 = 0.5;
/// Mean of the default geometric repeated-length distribution.
pub const DEFAULT_REPEATED_MEAN: f64 = 3.0;
/// Hard cap on generated repeated-field lengths.
pub const REPEATED_CAP: usize = 100;
/// Upper bound for single-document JSON array output.
pub const JSON_ARRAY_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleStrategy {
    Reuse,
    Minimal,
    Probabilistic,
}

impl CycleStrategy {
    pub fn parse(s: &str) -> Result<CycleStrategy> {
        match s {
            "reuse" => Ok(CycleStrategy::Reuse),
            "minimal" => Ok(CycleStrategy::Minimal),
            "probabilistic" => Ok(CycleStrategy::Probabilistic),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CycleStrategy::Reuse => "reuse",
            CycleStrategy::Minimal => "minimal",
            CycleStrategy::Probabilistic => "probabilistic",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerationConfig {
    pub max_depth: usize,
    pub cycle_strategy: CycleStrategy,
    pub lambda: f64,
    /// Overrides learned per-field null probabilities when set.
    pub null_probability_override: Option<f64>,
    pub seed: u64,
    /// Extra times a type may repeat on the stack before counting as a cycle.
    pub recursion_allowance: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            max_depth: DEFAULT_MAX_DEPTH,
            cycle_strategy: CycleStrategy::Reuse,
            lambda: DEFAULT_LAMBDA,
            null_probability_override: None,
            seed: 0,
            recursion_allowance: 0,
        }
    }
}

/// True when `type_name` already appears in the active generation stack.
pub fn has_cycle(type_name: &str, stack: &[String]) -> bool {
    stack.iter().any(|t| t == type_name)
}

/// Probability of terminating recursion at depth `d`: 1 − e^(−λd).
pub fn termination_probability(lambda: f64, depth: usize) -> f64 {
    1.0 - (-lambda * depth as f64).exp()
}

/// Mixes a batch seed and instance index into an independent stream seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

struct Ctx {
    rng: ChaCha8Rng,
    stack: Vec<String>,
    /// Per-top-level-call instance cache for the reuse strategy.
    reuse_cache: HashMap<String, MessageValue>,
}

/// Reusable generator: precomputes per-message field orders and dependency
/// tables, then produces instances deterministically from (seed, index).
pub struct Generator<'a> {
    pub schema: &'a SchemaGraph,
    pub registry: &'a GeneratorRegistry,
    pub config: GenerationConfig,
    orders: BTreeMap<String, FieldOrder>,
    graphs: BTreeMap<String, DependencyGraph>,
}

impl<'a> Generator<'a> {
    pub fn new(
        schema: &'a SchemaGraph,
        registry: &'a GeneratorRegistry,
        config: GenerationConfig,
    ) -> Result<Generator<'a>> {
        // dependency edges live in the registry; wrap them for graph building
        let mut model = DomainModel::empty();
        model.dependencies = registry.dependencies.clone();
        let mut orders = BTreeMap::new();
        let mut graphs = BTreeMap::new();
        for name in schema.messages.keys() {
            let g = build_dependency_graph(schema, name, Some(&model))?;
            orders.insert(name.clone(), g.topo_order());
            graphs.insert(name.clone(), g);
        }
        Ok(Generator {
            schema,
            registry,
            config,
            orders,
            graphs,
        })
    }

    /// Generates instance `index` of `root`. Identical (seed, index) pairs
    /// always produce identical instances.
    pub fn generate(&self, root: &str, index: u64) -> Result<MessageValue> {
        self.schema.message(root)?;
        let mut ctx = Ctx {
            rng: ChaCha8Rng::seed_from_u64(derive_seed(self.config.seed, index)),
            stack: Vec::new(),
            reuse_cache: HashMap::new(),
        };
        self.generate_message(&mut ctx, root, false)
    }

    fn generate_message(&self, ctx: &mut Ctx, type_name: &str, minimal: bool) -> Result<MessageValue> {
        let info = self.schema.message(type_name)?;
        ctx.stack.push(type_name.to_string());
        let mut msg = MessageValue::new(type_name);
        // values generated so far in this message, for dependency lookups
        let mut local: BTreeMap<String, Value> = BTreeMap::new();

        // one member per oneof group, weighted by observed presence
        let selected = self.select_oneof_members(ctx, type_name, info);

        let order = self.orders.get(type_name);
        let names: Vec<&str> = match order {
            Some(o) => o.order.iter().map(|s| s.as_str()).collect(),
            None => info.fields.iter().map(|f| f.name.as_str()).collect(),
        };
        for name in names {
            let Some(field) = info.field(name) else { continue };
            if let Some(group) = &field.oneof {
                if selected.get(group).map(|s| s.as_str()) != Some(name) {
                    continue;
                }
            }
            if minimal && field.kind == FieldKind::Message {
                continue;
            }
            if let Some(fv) = self.generate_field(ctx, type_name, field, &local)? {
                if let FieldValue::Single(v) = &fv {
                    local.insert(field.name.clone(), v.clone());
                }
                msg.set(field.number, fv);
            }
        }
        ctx.stack.pop();
        if self.config.cycle_strategy == CycleStrategy::Reuse
            && !minimal
            && self.schema.is_cyclic(type_name)
        {
            ctx.reuse_cache
                .entry(type_name.to_string())
                .or_insert_with(|| msg.clone());
        }
        Ok(msg)
    }

    fn select_oneof_members(
        &self,
        ctx: &mut Ctx,
        type_name: &str,
        info: &MessageInfo,
    ) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for group in &info.oneofs {
            let members: Vec<&FieldInfo> = info
                .fields
                .iter()
                .filter(|f| f.oneof.as_deref() == Some(group.as_str()))
                .collect();
            if members.is_empty() {
                continue;
            }
            // presence frequency doubles as selection weight
            let weights: Vec<f64> = members
                .iter()
                .map(|f| {
                    let p = self.registry.plan(type_name, &f.name);
                    (1.0 - p.null_probability).max(0.0)
                })
                .collect();
            let total: f64 = weights.iter().sum();
            let pick = if total > 0.0 {
                let mut u = ctx.rng.gen_range(0.0..total);
                let mut chosen = members.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    if u < *w {
                        chosen = i;
                        break;
                    }
                    u -= w;
                }
                chosen
            } else {
                ctx.rng.gen_range(0..members.len())
            };
            out.insert(group.clone(), members[pick].name.clone());
        }
        out
    }

    fn generate_field(
        &self,
        ctx: &mut Ctx,
        msg_type: &str,
        field: &FieldInfo,
        local: &BTreeMap<String, Value>,
    ) -> Result<Option<FieldValue>> {
        if field.is_map {
            return self.generate_map(ctx, msg_type, field);
        }
        if field.kind == FieldKind::Message {
            return self.generate_message_field(ctx, field);
        }
        let plan = self.registry.plan(msg_type, &field.name);
        // optional fields may be left unset
        if field.cardinality == Cardinality::Optional {
            let p = self
                .config
                .null_probability_override
                .unwrap_or(plan.null_probability);
            if p > 0.0 && ctx.rng.gen::<f64>() < p {
                return Ok(None);
            }
        }
        if field.cardinality == Cardinality::Repeated {
            let len = self.repeated_len(ctx, plan);
            let mut values = Vec::with_capacity(len);
            for _ in 0..len {
                values.push(self.scalar_value(ctx, msg_type, field, plan, local)?);
            }
            return Ok(Some(FieldValue::Repeated(values)));
        }
        let v = self.scalar_value(ctx, msg_type, field, plan, local)?;
        Ok(Some(FieldValue::Single(v)))
    }

    fn generate_message_field(&self, ctx: &mut Ctx, field: &FieldInfo) -> Result<Option<FieldValue>> {
        let target = field.type_name.as_deref().unwrap_or("");
        if field.cardinality == Cardinality::Repeated {
            let default = FieldPlan::default_plan();
            let plan_len = self.repeated_len(ctx, &default);
            let mut values = Vec::new();
            for _ in 0..plan_len {
                if let Some(m) = self.descend(ctx, target)? {
                    values.push(Value::Message(m));
                }
            }
            if values.is_empty() {
                return Ok(None);
            }
            return Ok(Some(FieldValue::Repeated(values)));
        }
        Ok(self
            .descend(ctx, target)?
            .map(|m| FieldValue::Single(Value::Message(m))))
    }

    /// Recurses into a message-typed field, applying depth and cycle policy.
    fn descend(&self, ctx: &mut Ctx, target: &str) -> Result<Option<MessageValue>> {
        if ctx.stack.len() >= self.config.max_depth {
            return Ok(None);
        }
        let occurrences = ctx.stack.iter().filter(|t| *t == target).count();
        let cyclic = has_cycle(target, &ctx.stack) && occurrences > self.config.recursion_allowance;
        if !cyclic {
            return Ok(Some(self.generate_message(ctx, target, false)?));
        }
        match self.config.cycle_strategy {
            CycleStrategy::Reuse => {
                if let Some(cached) = ctx.reuse_cache.get(target) {
                    return Ok(Some(cached.clone()));
                }
                let m = self.generate_message(ctx, target, true)?;
                ctx.reuse_cache.insert(target.to_string(), m.clone());
                Ok(Some(m))
            }
            CycleStrategy::Minimal => Ok(Some(self.generate_message(ctx, target, true)?)),
            CycleStrategy::Probabilistic => {
                let p = termination_probability(self.config.lambda, ctx.stack.len());
                if ctx.rng.gen::<f64>() < p {
                    Ok(None)
                } else {
                    Ok(Some(self.generate_message(ctx, target, false)?))
                }
            }
        }
    }

    fn generate_map(&self, ctx: &mut Ctx, msg_type: &str, field: &FieldInfo) -> Result<Option<FieldValue>> {
        let entry_type = field.type_name.as_deref().unwrap_or("");
        let entry_info = self.schema.message(entry_type)?;
        let (Some(kf), Some(vf)) = (entry_info.field("key"), entry_info.field("value")) else {
            return Ok(None);
        };
        let plan = self.registry.plan(msg_type, &field.name);
        let len = self.repeated_len(ctx, plan);
        let key_plan = self.registry.plan(entry_type, "key");
        let value_plan = self.registry.plan(entry_type, "value");
        let empty = BTreeMap::new();
        let mut entries: Vec<Value> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..len {
            let key = self.scalar_value(ctx, entry_type, kf, key_plan, &empty)?;
            if !seen.insert(key.canon_key()) {
                continue; // duplicate map key
            }
            let value = if vf.kind == FieldKind::Message {
                match self.descend(ctx, vf.type_name.as_deref().unwrap_or(""))? {
                    Some(m) => Value::Message(m),
                    None => continue,
                }
            } else {
                self.scalar_value(ctx, entry_type, vf, value_plan, &empty)?
            };
            let mut entry = MessageValue::new(entry_type);
            entry.set(kf.number, FieldValue::Single(key));
            entry.set(vf.number, FieldValue::Single(value));
            entries.push(Value::Message(entry));
        }
        if entries.is_empty() {
            return Ok(None);
        }
        Ok(Some(FieldValue::Repeated(entries)))
    }

    fn repeated_len(&self, ctx: &mut Ctx, plan: &FieldPlan) -> usize {
        if let Some(hist) = &plan.repeated_len {
            let total: u64 = hist.values().sum();
            if total > 0 {
                let mut u = ctx.rng.gen_range(0..total);
                for (len, count) in hist {
                    if u < *count {
                        return (*len).min(REPEATED_CAP);
                    }
                    u -= count;
                }
            }
        }
        // geometric with mean DEFAULT_REPEATED_MEAN
        let p = 1.0 / (1.0 + DEFAULT_REPEATED_MEAN);
        let mut n = 0usize;
        while n < REPEATED_CAP && ctx.rng.gen::<f64>() >= p {
            n += 1;
        }
        n
    }

    fn scalar_value(
        &self,
        ctx: &mut Ctx,
        msg_type: &str,
        field: &FieldInfo,
        plan: &FieldPlan,
        local: &BTreeMap<String, Value>,
    ) -> Result<Value> {
        // dependency propagation first: conditional tables, then id copies
        if let Some(graph) = self.graphs.get(msg_type) {
            for edge in &graph.edges {
                if edge.to != field.name {
                    continue;
                }
                if let Some(table) = &edge.table {
                    if let Some(ctrl) = local.get(&edge.from) {
                        let key = self.canon_for_lookup(ctrl, graph, &edge.from, msg_type);
                        if let Some(v) = self.sample_conditional(ctx, table, &key, field) {
                            return Ok(v);
                        }
                    }
                }
                // semantic id copy: controlling message's `id` field
                if edge.table.is_none() {
                    if let Some(Value::Message(m)) = local.get(&edge.from) {
                        if let Some(v) = copy_id_value(m, self.schema, field.kind) {
                            return Ok(v);
                        }
                    }
                }
            }
        }
        self.sample_strategy(ctx, field, plan)
    }

    fn canon_for_lookup(
        &self,
        value: &Value,
        _graph: &DependencyGraph,
        from_field: &str,
        msg_type: &str,
    ) -> String {
        // enum controllers are keyed by declared name, matching the analyzer
        if let Value::Enum(n) = value {
            if let Some(info) = self.schema.messages.get(msg_type) {
                if let Some(f) = info.field(from_field) {
                    if let Some(enum_name) = f.type_name.as_deref() {
                        if let Some(name) = self.schema.enum_value_name(enum_name, *n) {
                            return name.to_string();
                        }
                    }
                }
            }
        }
        value.canon_key()
    }

    fn sample_conditional(
        &self,
        ctx: &mut Ctx,
        table: &ConditionalTable,
        ctrl_key: &str,
        field: &FieldInfo,
    ) -> Option<Value> {
        let dist = table.rows.get(ctrl_key).unwrap_or(&table.marginal);
        let total: u64 = dist.values().sum();
        if total == 0 {
            return None;
        }
        let mut u = ctx.rng.gen_range(0..total);
        for (key, count) in dist {
            if u < *count {
                return parse_canon(field, key, self.schema);
            }
            u -= count;
        }
        None
    }

    fn sample_strategy(&self, ctx: &mut Ctx, field: &FieldInfo, plan: &FieldPlan) -> Result<Value> {
        match &plan.strategy {
            FieldStrategy::Empirical { table } => {
                if let Some(v) = sample_freq(ctx, &table.entries, field, self.schema) {
                    return Ok(v);
                }
                self.default_value(ctx, field)
            }
            FieldStrategy::Range { summary } => Ok(range_value(ctx, summary, field.kind)),
            FieldStrategy::Pattern { spec } => Ok(Value::Str(pattern_string(ctx, spec))),
            FieldStrategy::EnumWeighted { table } => {
                let enum_name = field.type_name.as_deref().unwrap_or("");
                let values = self.schema.enum_values(enum_name)?;
                let weighted: Vec<(i32, u64)> = values
                    .iter()
                    .filter_map(|(name, num)| table.entries.get(name).map(|c| (*num, *c)))
                    .collect();
                let total: u64 = weighted.iter().map(|(_, c)| c).sum();
                if total > 0 {
                    let mut u = ctx.rng.gen_range(0..total);
                    for (num, count) in &weighted {
                        if u < *count {
                            return Ok(Value::Enum(*num));
                        }
                        u -= count;
                    }
                }
                self.default_value(ctx, field)
            }
            FieldStrategy::Default => self.default_value(ctx, field),
        }
    }

    fn default_value(&self, ctx: &mut Ctx, field: &FieldInfo) -> Result<Value> {
        Ok(match field.kind {
            FieldKind::Double => Value::Double(ctx.rng.gen_range(0.0..1000.0)),
            FieldKind::Float => Value::Float(ctx.rng.gen_range(0.0f32..1000.0)),
            FieldKind::Int32 | FieldKind::SInt32 | FieldKind::SFixed32 => {
                Value::Int32(ctx.rng.gen_range(0..=1000))
            }
            FieldKind::Int64 | FieldKind::SInt64 | FieldKind::SFixed64 => {
                Value::Int64(ctx.rng.gen_range(0..=1000))
            }
            FieldKind::UInt32 | FieldKind::Fixed32 => Value::UInt32(ctx.rng.gen_range(0..=1000)),
            FieldKind::UInt64 | FieldKind::Fixed64 => Value::UInt64(ctx.rng.gen_range(0..=1000)),
            FieldKind::Bool => Value::Bool(ctx.rng.gen()),
            FieldKind::String => {
                let len = ctx.rng.gen_range(8..=16);
                Value::Str(random_alnum(&mut ctx.rng, len))
            }
            FieldKind::Bytes => {
                let len = ctx.rng.gen_range(0..=32);
                let mut buf = vec![0u8; len];
                ctx.rng.fill(buf.as_mut_slice());
                Value::Bytes(buf)
            }
            FieldKind::Enum => {
                let enum_name = field.type_name.as_deref().unwrap_or("");
                let values = self.schema.enum_values(enum_name)?;
                if values.is_empty() {
                    Value::Enum(0)
                } else {
                    Value::Enum(values[ctx.rng.gen_range(0..values.len())].1)
                }
            }
            FieldKind::Message => {
                return Err(Error::Validation(
                    "default_value called for a message field".into(),
                ))
            }
        })
    }
}

fn random_alnum(rng: &mut ChaCha8Rng, len: usize) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
    (0..len)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
        .collect()
}

/// Copies the `id` field of a generated controlling message, converting to
/// the dependent field's numeric/string kind where possible.
fn copy_id_value(m: &MessageValue, schema: &SchemaGraph, target_kind: FieldKind) -> Option<Value> {
    let info = schema.messages.get(&m.type_name)?;
    let id_field = info.field("id")?;
    let FieldValue::Single(v) = m.get(id_field.number)? else {
        return None;
    };
    convert_value(v, target_kind)
}

fn convert_value(v: &Value, kind: FieldKind) -> Option<Value> {
    match kind {
        FieldKind::String => Some(Value::Str(v.canon_key())),
        FieldKind::Int32 | FieldKind::SInt32 | FieldKind::SFixed32 => {
            Some(Value::Int32(v.as_f64()? as i32))
        }
        FieldKind::Int64 | FieldKind::SInt64 | FieldKind::SFixed64 => {
            Some(Value::Int64(v.as_f64()? as i64))
        }
        FieldKind::UInt32 | FieldKind::Fixed32 => Some(Value::UInt32(v.as_f64()? as u32)),
        FieldKind::UInt64 | FieldKind::Fixed64 => Some(Value::UInt64(v.as_f64()? as u64)),
        FieldKind::Double => Some(Value::Double(v.as_f64()?)),
        FieldKind::Float => Some(Value::Float(v.as_f64()? as f32)),
        _ => None,
    }
}

fn sample_freq(
    ctx: &mut Ctx,
    entries: &BTreeMap<String, u64>,
    field: &FieldInfo,
    schema: &SchemaGraph,
) -> Option<Value> {
    let total: u64 = entries.values().sum();
    if total == 0 {
        return None;
    }
    let mut u = ctx.rng.gen_range(0..total);
    for (key, count) in entries {
        if u < *count {
            return parse_canon(field, key, schema);
        }
        u -= count;
    }
    None
}

/// Parses a canonical frequency-table key back into a typed value.
pub fn parse_canon(field: &FieldInfo, key: &str, schema: &SchemaGraph) -> Option<Value> {
    use base64::Engine as _;
    Some(match field.kind {
        FieldKind::Double => Value::Double(key.parse().ok()?),
        FieldKind::Float => Value::Float(key.parse().ok()?),
        FieldKind::Int32 | FieldKind::SInt32 | FieldKind::SFixed32 => {
            Value::Int32(key.parse().ok()?)
        }
        FieldKind::Int64 | FieldKind::SInt64 | FieldKind::SFixed64 => {
            Value::Int64(key.parse().ok()?)
        }
        FieldKind::UInt32 | FieldKind::Fixed32 => Value::UInt32(key.parse().ok()?),
        FieldKind::UInt64 | FieldKind::Fixed64 => Value::UInt64(key.parse().ok()?),
        FieldKind::Bool => Value::Bool(key.parse().ok()?),
        FieldKind::String => Value::Str(key.to_string()),
        FieldKind::Bytes => Value::Bytes(
            base64::engine::general_purpose::STANDARD
                .decode(key)
                .ok()?,
        ),
        FieldKind::Enum => {
            let enum_name = field.type_name.as_deref().unwrap_or("");
            let number = schema
                .enums
                .get(enum_name)
                .and_then(|vals| vals.iter().find(|(n, _)| n == key).map(|(_, num)| *num))
                .or_else(|| key.parse().ok())?;
            Value::Enum(number)
        }
        FieldKind::Message => return None,
    })
}

/// Interpolates within the observed percentile grid of a numeric summary.
fn range_value(ctx: &mut Ctx, summary: &NumericSummary<f64>, kind: FieldKind) -> Value {
    let mut grid: Vec<(f64, f64)> = vec![(0.0, summary.min)];
    for (&p, &v) in &summary.percentiles {
        grid.push((p as f64 / 100.0, v));
    }
    grid.push((1.0, summary.max));
    let u: f64 = ctx.rng.gen();
    let mut value = summary.max;
    for w in grid.windows(2) {
        let (p0, v0) = w[0];
        let (p1, v1) = w[1];
        if u <= p1 {
            value = if p1 > p0 {
                v0 + (v1 - v0) * (u - p0) / (p1 - p0)
            } else {
                v1
            };
            break;
        }
    }
    let value = value.clamp(summary.min, summary.max);
    match kind {
        FieldKind::Double => Value::Double(value),
        FieldKind::Float => Value::Float(value as f32),
        FieldKind::Int32 | FieldKind::SInt32 | FieldKind::SFixed32 => {
            Value::Int32(value.round() as i32)
        }
        FieldKind::Int64 | FieldKind::SInt64 | FieldKind::SFixed64 => {
            Value::Int64(value.round() as i64)
        }
        FieldKind::UInt32 | FieldKind::Fixed32 => Value::UInt32(value.round().max(0.0) as u32),
        FieldKind::UInt64 | FieldKind::Fixed64 => Value::UInt64(value.round().max(0.0) as u64),
        _ => Value::Double(value),
    }
}

fn pattern_string(ctx: &mut Ctx, spec: &PatternSpec) -> String {
    let rng = &mut ctx.rng;
    match spec.pattern_id {
        PatternId::Uuid => {
            let a: u32 = rng.gen();
            let b: u16 = rng.gen();
            let c: u16 = rng.gen::<u16>() & 0x0fff | 0x4000;
            let d: u16 = rng.gen::<u16>() & 0x3fff | 0x8000;
            let e: u64 = rng.gen::<u64>() & 0xffff_ffff_ffff;
            format!("{a:08x}-{b:04x}-{c:04x}-{d:04x}-{e:012x}")
        }
        PatternId::Iso8601 => {
            let year = rng.gen_range(2020..=2024);
            let month = rng.gen_range(1..=12);
            let day = rng.gen_range(1..=28);
            let h = rng.gen_range(0..24);
            let m = rng.gen_range(0..60);
            let s = rng.gen_range(0..60);
            format!("{year:04}-{month:02}-{day:02}T{h:02}:{m:02}:{s:02}Z")
        }
        PatternId::Email => {
            const DOMAINS: [&str; 3] = ["example.com", "mail.test", "site.org"];
            let len = rng.gen_range(5..=10);
            let local = random_alnum(rng, len);
            format!("{local}@{}", DOMAINS[rng.gen_range(0..DOMAINS.len())])
        }
        PatternId::NumericString => {
            let len = rng.gen_range(1..=12);
            let mut s = String::with_capacity(len);
            s.push((b'1' + rng.gen_range(0..9u8)) as char);
            for _ in 1..len {
                s.push((b'0' + rng.gen_range(0..10u8)) as char);
            }
            s
        }
        PatternId::Hex => {
            const HEX: &[u8] = b"0123456789abcdef";
            let len = rng.gen_range(4..=16) * 2;
            (0..len).map(|_| HEX[rng.gen_range(0..16)] as char).collect()
        }
        PatternId::Generic => {
            let len = match &spec.length_hist {
                Some(hist) if !hist.is_empty() => {
                    let total: u64 = hist.values().sum();
                    let mut u = rng.gen_range(0..total.max(1));
                    let mut chosen = *hist.keys().next().unwrap();
                    for (l, c) in hist {
                        if u < *c {
                            chosen = *l;
                            break;
                        }
                        u -= c;
                    }
                    chosen
                }
                _ => rng.gen_range(8..=16),
            };
            let classes: Vec<(CharClass, u64)> = spec
                .char_classes
                .as_ref()
                .map(|m| m.iter().map(|(c, n)| (*c, *n)).collect())
                .unwrap_or_default();
            let total: u64 = classes.iter().map(|(_, n)| n).sum();
            (0..len)
                .map(|_| {
                    let class = if total > 0 {
                        let mut u = rng.gen_range(0..total);
                        let mut chosen = CharClass::Lower;
                        for (c, n) in &classes {
                            if u < *n {
                                chosen = *c;
                                break;
                            }
                            u -= n;
                        }
                        chosen
                    } else {
                        CharClass::Lower
                    };
                    match class {
                        CharClass::Lower => (b'a' + rng.gen_range(0..26u8)) as char,
                        CharClass::Upper => (b'A' + rng.gen_range(0..26u8)) as char,
                        CharClass::Digit => (b'0' + rng.gen_range(0..10u8)) as char,
                        CharClass::Space => ' ',
                        CharClass::Punct => {
                            const PUNCT: &[u8] = b"-_.:/@";
                            PUNCT[rng.gen_range(0..PUNCT.len())] as char
                        }
                        CharClass::Other => 'x',
                    }
                })
                .collect()
        }
    }
}

// ---------------------------------------------------------------------------
// Batch output
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Pb,
    Json,
    Ndjson,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<OutputFormat> {
        match s {
            "pb" => Ok(OutputFormat::Pb),
            "json" => Ok(OutputFormat::Json),
            "ndjson" => Ok(OutputFormat::Ndjson),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

fn encode_instance(
    gen: &Generator<'_>,
    root: &str,
    format: OutputFormat,
    index: u64,
) -> Result<Vec<u8>> {
    let msg = gen.generate(root, index)?;
    match format {
        OutputFormat::Pb => crate::value::encode_message(&msg, gen.schema),
        OutputFormat::Ndjson => {
            let payload = crate::value::to_json(&msg, gen.schema)?;
            let line = serde_json::json!({"type": root, "payload": payload});
            let mut bytes = serde_json::to_vec(&line)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        OutputFormat::Json => {
            let payload = crate::value::to_json(&msg, gen.schema)?;
            Ok(serde_json::to_vec(&payload)?)
        }
    }
}

/// Generates `count` instances and streams them to `out`. Output bytes depend
/// only on (seed, count, format), never on `workers`.
pub fn generate_batch(
    gen: &Generator<'_>,
    root: &str,
    count: u64,
    format: OutputFormat,
    out: &mut dyn Write,
    workers: usize,
) -> Result<u64> {
    if format == OutputFormat::Json && count > JSON_ARRAY_LIMIT {
        return Err(Error::Validation(format!(
            "json array output is limited to {JSON_ARRAY_LIMIT} instances; use ndjson or pb"
        )));
    }
    gen.schema.message(root)?;
    let workers = workers.max(1);
    let chunk: u64 = 1024;
    if format == OutputFormat::Json {
        out.write_all(b"[")?;
    }
    let mut written = 0u64;
    let mut start = 0u64;
    while start < count {
        let end = (start + chunk * workers as u64).min(count);
        let encoded = encode_chunk(gen, root, format, start, end, workers)?;
        for (i, bytes) in encoded.into_iter().enumerate() {
            let index = start + i as u64;
            match format {
                OutputFormat::Pb => {
                    let mut prefix = Vec::with_capacity(10);
                    crate::wire::encode_varint(bytes.len() as u64, &mut prefix);
                    out.write_all(&prefix)?;
                    out.write_all(&bytes)?;
                }
                OutputFormat::Ndjson => out.write_all(&bytes)?,
                OutputFormat::Json => {
                    if index > 0 {
                        out.write_all(b",")?;
                    }
                    out.write_all(&bytes)?;
                }
            }
            written += 1;
        }
        start = end;
    }
    if format == OutputFormat::Json {
        out.write_all(b"]")?;
    }
    out.flush()?;
    Ok(written)
}

fn encode_chunk(
    gen: &Generator<'_>,
    root: &str,
    format: OutputFormat,
    start: u64,
    end: u64,
    workers: usize,
) -> Result<Vec<Vec<u8>>> {
    let n = (end - start) as usize;
    if workers <= 1 || n < 2 {
        let mut out = Vec::with_capacity(n);
        for index in start..end {
            out.push(encode_instance(gen, root, format, index)?);
        }
        return Ok(out);
    }
    let mut slots: Vec<Vec<u8>> = vec![Vec::new(); n];
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::with_capacity(workers);
        for w in 0..workers {
            handles.push(scope.spawn(move || -> Result<Vec<(usize, Vec<u8>)>> {
                let mut local = Vec::new();
                let mut i = w;
                while i < n {
                    let index = start + i as u64;
                    local.push((i, encode_instance(gen, root, format, index)?));
                    i += workers;
                }
                Ok(local)
            }));
        }
        for h in handles {
            let produced = h.join().expect("worker thread panicked")?;
            for (i, bytes) in produced {
                slots[i] = bytes;
            }
        }
        Ok(())
    })?;
    Ok(slots)
}
