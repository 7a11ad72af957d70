//! Generator registry: a total mapping from (message type, field name) to a
//! generation plan. `enhance` overlays domain-model evidence on schema-derived
//! defaults; fields without evidence keep the default strategy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analyzer::{DomainModel, MessageDependency};
use crate::pattern::PatternSpec;
use crate::schema::{FieldKind, FieldPath, SchemaGraph, SegmentMarker};
use crate::stats::{FreqTable, NumericSummary};

/// How values for one field are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum FieldStrategy {
    /// Schema-derived fallback (uniform numerics, random strings, ...).
    Default,
    /// Resample an observed value distribution exactly.
    Empirical { table: FreqTable },
    /// Draw from the observed numeric range via percentile interpolation.
    Range { summary: NumericSummary<f64> },
    /// Synthesize strings matching a detected format.
    Pattern { spec: PatternSpec },
    /// Pick enum values with observed weights.
    EnumWeighted { table: FreqTable },
}

impl FieldStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            FieldStrategy::Default => "default",
            FieldStrategy::Empirical { .. } => "empirical",
            FieldStrategy::Range { .. } => "range",
            FieldStrategy::Pattern { .. } => "pattern",
            FieldStrategy::EnumWeighted { .. } => "enum-weighted",
        }
    }
}

/// Complete generation plan for one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldPlan {
    pub strategy: FieldStrategy,
    /// Probability an optional field is left unset.
    pub null_probability: f64,
    /// Observed repeated-length histogram, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub repeated_len: Option<BTreeMap<usize, u64>>,
}

impl FieldPlan {
    pub fn default_plan() -> FieldPlan {
        FieldPlan {
            strategy: FieldStrategy::Default,
            null_probability: 0.0,
            repeated_len: None,
        }
    }
}

/// Total registry: `plan` answers for every (message, field) pair, falling
/// back to the default plan when no evidence was recorded.
#[derive(Debug, Clone, Default)]
pub struct GeneratorRegistry {
    plans: BTreeMap<(String, String), FieldPlan>,
    /// message type -> dependencies with conditional tables, from the model.
    pub dependencies: BTreeMap<String, Vec<MessageDependency>>,
    fallback: Option<FieldPlan>,
}

impl GeneratorRegistry {
    pub fn plan(&self, message: &str, field: &str) -> &FieldPlan {
        static DEFAULT: std::sync::OnceLock<FieldPlan> = std::sync::OnceLock::new();
        self.plans
            .get(&(message.to_string(), field.to_string()))
            .or(self.fallback.as_ref())
            .unwrap_or_else(|| DEFAULT.get_or_init(FieldPlan::default_plan))
    }

    pub fn has_plan(&self, message: &str, field: &str) -> bool {
        self.plans
            .contains_key(&(message.to_string(), field.to_string()))
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    pub fn strategy_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for plan in self.plans.values() {
            *out.entry(plan.strategy.name()).or_insert(0) += 1;
        }
        out
    }
}

/// Builds the registry for `schema`, optionally specialized by a domain model.
pub fn enhance(schema: &SchemaGraph, model: Option<&DomainModel>) -> GeneratorRegistry {
    let mut registry = GeneratorRegistry::default();
    // schema-derived defaults: every non-message field gets a plan
    for (msg_name, info) in &schema.messages {
        for field in &info.fields {
            if field.kind == FieldKind::Message && !field.is_map {
                continue;
            }
            registry.plans.insert(
                (msg_name.clone(), field.name.clone()),
                FieldPlan::default_plan(),
            );
        }
    }
    let Some(model) = model else {
        return registry;
    };
    registry.dependencies = model.dependencies.clone();
    // overlay observed profiles; first (root, path) occurrence wins per field
    let mut claimed: BTreeMap<(String, String), ()> = BTreeMap::new();
    for (root, paths) in &model.profiles {
        for (path_text, profile) in paths {
            let Ok(path) = FieldPath::parse(path_text) else {
                continue;
            };
            let Some(msg_type) = crate::analyzer::containing_message_type(schema, root, &path)
            else {
                continue;
            };
            let field_name = match path.segments.last() {
                Some(seg) => match seg.marker {
                    SegmentMarker::MapKey => "key".to_string(),
                    SegmentMarker::MapValue => "value".to_string(),
                    _ => seg.name.clone(),
                },
                None => continue,
            };
            let Some(field) = schema
                .messages
                .get(&msg_type)
                .and_then(|m| m.field(&field_name))
            else {
                continue;
            };
            if field.kind == FieldKind::Message {
                continue;
            }
            let key = (msg_type.clone(), field_name.clone());
            if claimed.contains_key(&key) || profile.stats.present_count == 0 {
                continue;
            }
            let strategy = choose_strategy(field.kind, profile);
            claimed.insert(key.clone(), ());
            registry.plans.insert(
                key,
                FieldPlan {
                    strategy,
                    null_probability: profile.constraints.null_probability,
                    repeated_len: profile.repeated_len.clone(),
                },
            );
        }
    }
    registry
}

fn choose_strategy(kind: FieldKind, profile: &crate::analyzer::Profile) -> FieldStrategy {
    let freqs = &profile.stats.frequencies;
    let complete = !freqs.overflowed() && freqs.distinct() > 0;
    match kind {
        FieldKind::Enum => FieldStrategy::EnumWeighted {
            table: freqs.clone(),
        },
        FieldKind::Bool => {
            if complete {
                FieldStrategy::Empirical {
                    table: freqs.clone(),
                }
            } else {
                FieldStrategy::Default
            }
        }
        FieldKind::String => {
            if complete {
                FieldStrategy::Empirical {
                    table: freqs.clone(),
                }
            } else if let Some(spec) = &profile.pattern {
                FieldStrategy::Pattern { spec: spec.clone() }
            } else {
                FieldStrategy::Default
            }
        }
        FieldKind::Bytes => FieldStrategy::Default,
        _ => {
            // numeric: exact resampling when the value set fit the table,
            // otherwise interpolate within the observed percentile grid
            if complete {
                FieldStrategy::Empirical {
                    table: freqs.clone(),
                }
            } else if let Some(summary) = &profile.stats.numeric {
                FieldStrategy::Range {
                    summary: summary.clone(),
                }
            } else {
                FieldStrategy::Default
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::{analyze_stream, AnalyzeOptions};
    use crate::corpus::{Record, VecStream};
    use crate::schema::testutil::*;
    use crate::value::{FieldValue, MessageValue, Value};

    fn sample_schema() -> SchemaGraph {
        graph(vec![(
            "t.M",
            vec![
                scalar("n", 1, FieldKind::Int32),
                scalar("s", 2, FieldKind::String),
                scalar("flag", 3, FieldKind::Bool),
            ],
        )])
    }

    #[test]
    fn registry_is_total_without_model() {
        let schema = sample_schema();
        let reg = enhance(&schema, None);
        assert_eq!(reg.len(), 3);
        for f in ["n", "s", "flag"] {
            assert_eq!(reg.plan("t.M", f).strategy, FieldStrategy::Default);
        }
        // unknown fields still answer with the default plan
        assert_eq!(reg.plan("t.M", "ghost").strategy, FieldStrategy::Default);
        assert_eq!(reg.plan("t.Missing", "x").strategy, FieldStrategy::Default);
    }

    #[test]
    fn model_evidence_upgrades_strategies() {
        let schema = sample_schema();
        let records: Vec<Record> = (0..100)
            .map(|i| {
                let mut m = MessageValue::new("t.M");
                m.set(1, FieldValue::Single(Value::Int32(i % 5)));
                m.set(2, FieldValue::Single(Value::Str(format!("tag{}", i % 3))));
                m.set(3, FieldValue::Single(Value::Bool(i % 2 == 0)));
                Record {
                    type_name: "t.M".into(),
                    message: m,
                }
            })
            .collect();
        let mut stream = VecStream::new(records);
        let model = analyze_stream(&mut stream, &schema, &AnalyzeOptions::default()).unwrap();
        let reg = enhance(&schema, Some(&model));
        assert!(matches!(
            reg.plan("t.M", "n").strategy,
            FieldStrategy::Empirical { .. }
        ));
        assert!(matches!(
            reg.plan("t.M", "s").strategy,
            FieldStrategy::Empirical { .. }
        ));
        assert!(matches!(
            reg.plan("t.M", "flag").strategy,
            FieldStrategy::Empirical { .. }
        ));
    }

    #[test]
    fn overflowed_string_field_uses_pattern() {
        let schema = graph(vec![("t.M", vec![scalar("id", 1, FieldKind::String)])]);
        let records: Vec<Record> = (0..100)
            .map(|i| {
                let mut m = MessageValue::new("t.M");
                m.set(
                    1,
                    FieldValue::Single(Value::Str(format!(
                        "{:08x}-{:04x}-4{:03x}-a{:03x}-{:012x}",
                        i, i, i, i, i
                    ))),
                );
                Record {
                    type_name: "t.M".into(),
                    message: m,
                }
            })
            .collect();
        let mut stream = VecStream::new(records);
        let opts = AnalyzeOptions {
            top_k: 4, // force the frequency table to overflow
            ..AnalyzeOptions::default()
        };
        let model = analyze_stream(&mut stream, &schema, &opts).unwrap();
        let reg = enhance(&schema, Some(&model));
        match &reg.plan("t.M", "id").strategy {
            FieldStrategy::Pattern { spec } => {
                assert_eq!(spec.pattern_id, crate::pattern::PatternId::Uuid);
            }
            other => panic!("expected pattern strategy, got {}", other.name()),
        }
    }
}
