//! Baseline generators (random, template) and the benchmark harness that
//! compares them against the statistical strategy.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analyzer::DomainModel;
use crate::engine::{derive_seed, CycleStrategy, GenerationConfig, Generator};
use crate::error::{Error, Result};
use crate::quality::{assess, AssessOptions, QualityReport, RuleSet};
use crate::registry::{enhance, GeneratorRegistry};
use crate::schema::{Cardinality, FieldKind, SchemaGraph};
use crate::value::{FieldValue, MessageValue, Value};

pub const TEMPLATE_FORMAT: &str = "template/v1";
/// Minimum timed runs per (strategy, size) cell.
pub const MIN_BENCH_RUNS: usize = 10;
/// Two-sided 95% t quantile for n = 10 (9 degrees of freedom).
const T_95_N10: f64 = 2.262;

// ---------------------------------------------------------------------------
// Random baseline
// ---------------------------------------------------------------------------

/// Schema-only baseline: default value distributions, minimal cycle handling.
pub fn random_generate(
    schema: &SchemaGraph,
    root: &str,
    seed: u64,
    count: u64,
) -> Result<Vec<MessageValue>> {
    let registry = enhance(schema, None);
    let config = GenerationConfig {
        cycle_strategy: CycleStrategy::Minimal,
        seed,
        ..GenerationConfig::default()
    };
    let gen = Generator::new(schema, &registry, config)?;
    (0..count).map(|i| gen.generate(root, i)).collect()
}

// ---------------------------------------------------------------------------
// Template baseline (template/v1)
// ---------------------------------------------------------------------------

/// One templated field: a fixed value, a uniform choice, a numeric range, or
/// an index-based counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Slot {
    Choice { choice: Vec<serde_json::Value> },
    Range { min: f64, max: f64 },
    Counter { counter: i64 },
    Fixed { value: serde_json::Value },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub format: String,
    #[serde(rename = "type")]
    pub type_name: String,
    pub fields: BTreeMap<String, Slot>,
}

impl Template {
    pub fn from_json_str(s: &str) -> Result<Template> {
        let t: Template = serde_json::from_str(s)?;
        if t.format != TEMPLATE_FORMAT {
            return Err(Error::Config(format!(
                "unsupported template format `{}`",
                t.format
            )));
        }
        Ok(t)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Template> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Checks every templated field against the schema at load time.
    pub fn validate(&self, schema: &SchemaGraph) -> Result<()> {
        let info = schema.message(&self.type_name)?;
        for (name, slot) in &self.fields {
            let field = info.field(name).ok_or_else(|| Error::UnknownField {
                message: self.type_name.clone(),
                field: name.clone(),
            })?;
            if field.kind == FieldKind::Message {
                return Err(Error::Config(format!(
                    "template field `{name}` is message-typed; only scalars can be templated"
                )));
            }
            match slot {
                Slot::Range { min, max } => {
                    if !field.kind.is_numeric() {
                        return Err(Error::Config(format!(
                            "range slot on non-numeric field `{name}`"
                        )));
                    }
                    if min > max {
                        return Err(Error::Config(format!(
                            "range slot on `{name}` has min > max"
                        )));
                    }
                }
                Slot::Counter { .. } => {
                    if !field.kind.is_integer() {
                        return Err(Error::Config(format!(
                            "counter slot on non-integer field `{name}`"
                        )));
                    }
                }
                Slot::Choice { choice } => {
                    if choice.is_empty() {
                        return Err(Error::Config(format!("empty choice slot on `{name}`")));
                    }
                    for v in choice {
                        crate::value::scalar_from_json(v, field, schema)?;
                    }
                }
                Slot::Fixed { value } => {
                    crate::value::scalar_from_json(value, field, schema)?;
                }
            }
        }
        Ok(())
    }
}

fn slot_value(
    slot: &Slot,
    field: &crate::schema::FieldInfo,
    schema: &SchemaGraph,
    rng: &mut ChaCha8Rng,
    index: u64,
) -> Result<Value> {
    match slot {
        Slot::Fixed { value } => crate::value::scalar_from_json(value, field, schema),
        Slot::Choice { choice } => {
            let pick = &choice[rng.gen_range(0..choice.len())];
            crate::value::scalar_from_json(pick, field, schema)
        }
        Slot::Counter { counter } => {
            let v = counter + index as i64;
            crate::value::scalar_from_json(&serde_json::json!(v), field, schema)
        }
        Slot::Range { min, max } => {
            let x = if max > min {
                rng.gen_range(*min..=*max)
            } else {
                *min
            };
            let json = if field.kind.is_integer() {
                serde_json::json!(x.round() as i64)
            } else {
                serde_json::json!(x)
            };
            crate::value::scalar_from_json(&json, field, schema)
        }
    }
}

/// Template baseline: slot-driven values for templated fields, schema
/// defaults elsewhere. Counter slots advance with the instance index.
pub fn template_generate(
    schema: &SchemaGraph,
    template: &Template,
    seed: u64,
    count: u64,
) -> Result<Vec<MessageValue>> {
    template.validate(schema)?;
    let registry = enhance(schema, None);
    let config = GenerationConfig {
        cycle_strategy: CycleStrategy::Minimal,
        seed,
        ..GenerationConfig::default()
    };
    let gen = Generator::new(schema, &registry, config)?;
    let info = schema.message(&template.type_name)?;
    let mut out = Vec::with_capacity(count as usize);
    for index in 0..count {
        let mut msg = gen.generate(&template.type_name, index)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed ^ 0x7e3a9, index));
        for (name, slot) in &template.fields {
            let field = info.field(name).expect("validated above");
            let value = slot_value(slot, field, schema, &mut rng, index)?;
            if field.cardinality == Cardinality::Repeated {
                msg.set(field.number, FieldValue::Repeated(vec![value]));
            } else {
                msg.set(field.number, FieldValue::Single(value));
            }
        }
        out.push(msg);
    }
    Ok(out)
}

/// Derives a template from a domain model: top observed values become choice
/// slots, numeric ranges become range slots.
pub fn derive_template(
    schema: &SchemaGraph,
    root: &str,
    model: &DomainModel,
) -> Result<Template> {
    let info = schema.message(root)?;
    let mut fields = BTreeMap::new();
    let profiles = model.profiles.get(root);
    for field in &info.fields {
        if field.kind == FieldKind::Message || field.cardinality == Cardinality::Repeated {
            continue;
        }
        let Some(profile) = profiles.and_then(|p| p.get(&field.name)) else {
            continue;
        };
        if let Some(summary) = &profile.stats.numeric {
            fields.insert(
                field.name.clone(),
                Slot::Range {
                    min: summary.min,
                    max: summary.max,
                },
            );
            continue;
        }
        let freqs = &profile.stats.frequencies;
        if freqs.distinct() > 0 {
            let mut ranked: Vec<(&String, &u64)> = freqs.entries.iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
            let choice: Vec<serde_json::Value> = ranked
                .into_iter()
                .take(10)
                .map(|(k, _)| {
                    // canon keys are strings; booleans need native JSON form
                    if field.kind == FieldKind::Bool {
                        serde_json::json!(k == "true")
                    } else {
                        serde_json::json!(k)
                    }
                })
                .collect();
            fields.insert(field.name.clone(), Slot::Choice { choice });
        }
    }
    Ok(Template {
        format: TEMPLATE_FORMAT.to_string(),
        type_name: root.to_string(),
        fields,
    })
}

// ---------------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchStrategy {
    Random,
    Template,
    Statistical,
}

impl BenchStrategy {
    pub fn parse(s: &str) -> Result<BenchStrategy> {
        match s {
            "random" => Ok(BenchStrategy::Random),
            "template" => Ok(BenchStrategy::Template),
            "statistical" => Ok(BenchStrategy::Statistical),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BenchStrategy::Random => "random",
            BenchStrategy::Template => "template",
            BenchStrategy::Statistical => "statistical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub strategy: String,
    pub size: u64,
    pub runs: usize,
    pub mean_ms: f64,
    pub ci95_ms: f64,
    pub throughput_per_s: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub quality: Option<QualityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub root: String,
    pub entries: Vec<BenchEntry>,
}

impl BenchReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("benchmark: {}\n", self.root));
        out.push_str(&format!(
            "{:<12} {:>9} {:>6} {:>12} {:>11} {:>14} {:>8}\n",
            "strategy", "size", "runs", "mean (ms)", "ci95 (ms)", "inst/s", "quality"
        ));
        for e in &self.entries {
            let q = e
                .quality
                .as_ref()
                .map(|q| format!("{:.4}", q.overall))
                .unwrap_or_else(|| "-".to_string());
            out.push_str(&format!(
                "{:<12} {:>9} {:>6} {:>12.3} {:>11.3} {:>14.0} {:>8}\n",
                e.strategy, e.size, e.runs, e.mean_ms, e.ci95_ms, e.throughput_per_s, q
            ));
        }
        out
    }
}

pub struct BenchOptions<'a> {
    pub sizes: Vec<u64>,
    pub strategies: Vec<BenchStrategy>,
    pub runs: usize,
    pub seed: u64,
    pub rules: Option<&'a RuleSet>,
    /// Reference instances for quality assessment; skipped when empty.
    pub reference: &'a [MessageValue],
}

fn mean_ci(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = if n == MIN_BENCH_RUNS { T_95_N10 } else { 1.96 };
    (mean, t * (var / n as f64).sqrt())
}

/// Runs each requested strategy at each size: at least [`MIN_BENCH_RUNS`]
/// timed runs with distinct seeds, plus one quality assessment per cell.
pub fn run_benchmark(
    schema: &SchemaGraph,
    root: &str,
    model: Option<&DomainModel>,
    opts: &BenchOptions<'_>,
) -> Result<BenchReport> {
    schema.message(root)?;
    let runs = opts.runs.max(MIN_BENCH_RUNS);
    let template = match model {
        Some(m) => Some(derive_template(schema, root, m)?),
        None => None,
    };
    let stat_registry: Option<GeneratorRegistry> = model.map(|m| enhance(schema, Some(m)));

    let mut entries = Vec::new();
    for &strategy in &opts.strategies {
        for &size in &opts.sizes {
            let mut times = Vec::with_capacity(runs);
            let mut representative: Option<Vec<MessageValue>> = None;
            for run in 0..runs {
                let seed = opts.seed.wrapping_add(run as u64);
                let start = Instant::now();
                let instances = match strategy {
                    BenchStrategy::Random => random_generate(schema, root, seed, size)?,
                    BenchStrategy::Template => {
                        let t = template.as_ref().ok_or_else(|| {
                            Error::Config(
                                "template strategy requires a domain model".to_string(),
                            )
                        })?;
                        template_generate(schema, t, seed, size)?
                    }
                    BenchStrategy::Statistical => {
                        let registry = stat_registry.as_ref().ok_or_else(|| {
                            Error::Config(
                                "statistical strategy requires a domain model".to_string(),
                            )
                        })?;
                        let config = GenerationConfig {
                            seed,
                            ..GenerationConfig::default()
                        };
                        let gen = Generator::new(schema, registry, config)?;
                        (0..size)
                            .map(|i| gen.generate(root, i))
                            .collect::<Result<Vec<_>>>()?
                    }
                };
                times.push(start.elapsed().as_secs_f64() * 1000.0);
                if run == 0 {
                    representative = Some(instances);
                }
            }
            let (mean_ms, ci95_ms) = mean_ci(&times);
            let quality = match (&representative, opts.reference.is_empty()) {
                (Some(instances), false) => Some(assess(
                    schema,
                    root,
                    instances,
                    opts.reference,
                    opts.rules,
                    &AssessOptions::default(),
                )?),
                _ => None,
            };
            entries.push(BenchEntry {
                strategy: strategy.as_str().to_string(),
                size,
                runs,
                mean_ms,
                ci95_ms,
                throughput_per_s: if mean_ms > 0.0 {
                    size as f64 / (mean_ms / 1000.0)
                } else {
                    f64::INFINITY
                },
                quality,
            });
        }
    }
    Ok(BenchReport {
        root: root.to_string(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::{analyze_stream, AnalyzeOptions};
    use crate::corpus::{Record, VecStream};
    use crate::schema::testutil::*;

    fn ping_schema() -> SchemaGraph {
        graph(vec![("demo.Ping", vec![scalar("seq", 1, FieldKind::Int32)])])
    }

    #[test]
    fn random_baseline_is_deterministic() {
        let schema = ping_schema();
        let a = random_generate(&schema, "demo.Ping", 42, 20).unwrap();
        let b = random_generate(&schema, "demo.Ping", 42, 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn template_slots() {
        let schema = graph(vec![(
            "t.M",
            vec![
                scalar("name", 1, FieldKind::String),
                scalar("kind", 2, FieldKind::String),
                scalar("n", 3, FieldKind::Int32),
                scalar("id", 4, FieldKind::Int64),
            ],
        )]);
        let doc = r#"{
            "format": "template/v1",
            "type": "t.M",
            "fields": {
                "name": {"value": "fixed-name"},
                "kind": {"choice": ["a", "b"]},
                "n": {"min": 5, "max": 10},
                "id": {"counter": 100}
            }
        }"#;
        let template = Template::from_json_str(doc).unwrap();
        let out = template_generate(&schema, &template, 1, 10).unwrap();
        for (i, m) in out.iter().enumerate() {
            assert_eq!(
                m.get(1),
                Some(&FieldValue::Single(Value::Str("fixed-name".into())))
            );
            match m.get(2) {
                Some(FieldValue::Single(Value::Str(s))) => assert!(s == "a" || s == "b"),
                other => panic!("kind missing: {other:?}"),
            }
            match m.get(3) {
                Some(FieldValue::Single(Value::Int32(v))) => assert!((5..=10).contains(v)),
                other => panic!("n missing: {other:?}"),
            }
            assert_eq!(
                m.get(4),
                Some(&FieldValue::Single(Value::Int64(100 + i as i64)))
            );
        }
    }

    #[test]
    fn template_validation_errors() {
        let schema = ping_schema();
        // unknown field
        let t = Template {
            format: TEMPLATE_FORMAT.into(),
            type_name: "demo.Ping".into(),
            fields: [("ghost".to_string(), Slot::Counter { counter: 0 })]
                .into_iter()
                .collect(),
        };
        assert!(matches!(
            t.validate(&schema),
            Err(Error::UnknownField { .. })
        ));
        // range on integer field with min > max
        let t = Template {
            format: TEMPLATE_FORMAT.into(),
            type_name: "demo.Ping".into(),
            fields: [(
                "seq".to_string(),
                Slot::Range {
                    min: 10.0,
                    max: 1.0,
                },
            )]
            .into_iter()
            .collect(),
        };
        assert!(matches!(t.validate(&schema), Err(Error::Config(_))));
    }

    #[test]
    fn derived_template_reflects_model() {
        let schema = graph(vec![(
            "t.M",
            vec![
                scalar("n", 1, FieldKind::Int32),
                scalar("s", 2, FieldKind::String),
            ],
        )]);
        let records: Vec<Record> = (0..50)
            .map(|i| {
                let mut m = MessageValue::new("t.M");
                m.set(1, FieldValue::Single(Value::Int32(10 + i % 5)));
                m.set(2, FieldValue::Single(Value::Str(format!("k{}", i % 3))));
                Record {
                    type_name: "t.M".into(),
                    message: m,
                }
            })
            .collect();
        let mut stream = VecStream::new(records);
        let model = analyze_stream(&mut stream, &schema, &AnalyzeOptions::default()).unwrap();
        let t = derive_template(&schema, "t.M", &model).unwrap();
        assert_eq!(t.fields.get("n"), Some(&Slot::Range { min: 10.0, max: 14.0 }));
        match t.fields.get("s") {
            Some(Slot::Choice { choice }) => assert_eq!(choice.len(), 3),
            other => panic!("expected choice slot, got {other:?}"),
        }
    }

    #[test]
    fn benchmark_runs_and_reports() {
        let schema = ping_schema();
        let records: Vec<Record> = (0..200)
            .map(|i| {
                let mut m = MessageValue::new("demo.Ping");
                m.set(1, FieldValue::Single(Value::Int32(i % 9)));
                Record {
                    type_name: "demo.Ping".into(),
                    message: m,
                }
            })
            .collect();
        let reference: Vec<MessageValue> = records.iter().map(|r| r.message.clone()).collect();
        let mut stream = VecStream::new(records);
        let model = analyze_stream(&mut stream, &schema, &AnalyzeOptions::default()).unwrap();
        let report = run_benchmark(
            &schema,
            "demo.Ping",
            Some(&model),
            &BenchOptions {
                sizes: vec![50],
                strategies: vec![
                    BenchStrategy::Random,
                    BenchStrategy::Template,
                    BenchStrategy::Statistical,
                ],
                runs: 10,
                seed: 1,
                rules: None,
                reference: &reference,
            },
        )
        .unwrap();
        assert_eq!(report.entries.len(), 3);
        for e in &report.entries {
            assert_eq!(e.runs, 10);
            assert!(e.mean_ms >= 0.0);
            assert!(e.quality.is_some());
        }
        let q = |name: &str| {
            report
                .entries
                .iter()
                .find(|e| e.strategy == name)
                .and_then(|e| e.quality.as_ref())
                .map(|q| q.overall)
                .unwrap()
        };
        // statistical resampling should dominate the naive baselines here
        assert!(q("statistical") > q("random"));
        let text = report.render();
        assert!(text.contains("statistical"));
        assert!(text.contains("inst/s"));
    }
}
