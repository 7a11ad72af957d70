//! Field dependency resolution: evidence-weighted edges among the direct
//! fields of a message, and a deterministic topological generation order.

use serde::{Deserialize, Serialize};

use crate::analyzer::{ConditionalTable, DomainModel, Provenance};
use crate::error::Result;
use crate::schema::{FieldKind, SchemaGraph};

/// Weight given to semantic and annotation evidence; correlation edges carry
/// |r| (always below this, so they break first under cycle pressure).
pub const STRUCTURAL_EDGE_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepEdge {
    pub from: String,
    pub to: String,
    pub weight: f64,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub table: Option<ConditionalTable>,
}

/// Dependency graph over the direct fields of one message type.
#[derive(Debug, Clone, Default)]
pub struct DependencyGraph {
    pub message: String,
    /// Field names in declaration order.
    pub fields: Vec<String>,
    pub edges: Vec<DepEdge>,
}

/// Result of ordering: the generation order plus any edges dropped to break
/// cycles.
#[derive(Debug, Clone)]
pub struct FieldOrder {
    pub order: Vec<String>,
    pub broken: Vec<DepEdge>,
}

fn tokens(name: &str) -> Vec<&str> {
    name.split('_').filter(|t| !t.is_empty()).collect()
}

/// True when `candidate` names an identifier of `base`: its tokens are the
/// base tokens followed by `id`.
fn is_id_of(base_tokens: &[&str], candidate: &str) -> bool {
    let ct = tokens(candidate);
    ct.len() == base_tokens.len() + 1
        && ct.last() == Some(&"id")
        && ct[..base_tokens.len()] == *base_tokens
}

/// Builds the dependency graph for `message` from semantic naming evidence,
/// model correlations, and model annotations.
pub fn build_dependency_graph(
    schema: &SchemaGraph,
    message: &str,
    model: Option<&DomainModel>,
) -> Result<DependencyGraph> {
    let info = schema.message(message)?;
    let fields: Vec<String> = info.fields.iter().map(|f| f.name.clone()).collect();
    let mut edges: Vec<DepEdge> = Vec::new();
    let push = |edge: DepEdge, edges: &mut Vec<DepEdge>| {
        if let Some(existing) = edges
            .iter_mut()
            .find(|e| e.from == edge.from && e.to == edge.to)
        {
            // keep the strongest evidence; prefer its table when present
            if edge.weight > existing.weight {
                let table = edge.table.clone().or_else(|| existing.table.take());
                *existing = DepEdge { table, ..edge };
            } else if existing.table.is_none() {
                existing.table = edge.table;
            }
        } else {
            edges.push(edge);
        }
    };

    // semantic: `x` controls `x_id`; a message-typed `x: pkg.User` also
    // controls `user_id`
    for x in &info.fields {
        let base = tokens(&x.name);
        // lowercased last component of a referenced message type name
        let ref_base: Option<String> = match (x.kind, x.type_name.as_deref()) {
            (FieldKind::Message, Some(t)) => {
                t.rsplit('.').next().map(|s| s.to_ascii_lowercase())
            }
            _ => None,
        };
        for y in &info.fields {
            if x.name == y.name {
                continue;
            }
            let semantic = is_id_of(&base, &y.name)
                || ref_base
                    .as_deref()
                    .map(|rb| is_id_of(&[rb], &y.name))
                    .unwrap_or(false);
            if semantic {
                push(
                    DepEdge {
                        from: x.name.clone(),
                        to: y.name.clone(),
                        weight: STRUCTURAL_EDGE_WEIGHT,
                        provenance: Provenance::Semantic,
                        table: None,
                    },
                    &mut edges,
                );
            }
        }
    }

    // model evidence: correlations carry |r|, annotations are structural
    if let Some(model) = model {
        if let Some(deps) = model.dependencies.get(message) {
            for d in deps {
                let weight = match d.provenance {
                    Provenance::Annotation => STRUCTURAL_EDGE_WEIGHT,
                    _ => d.r.abs(),
                };
                if fields.contains(&d.controlling) && fields.contains(&d.dependent) {
                    push(
                        DepEdge {
                            from: d.controlling.clone(),
                            to: d.dependent.clone(),
                            weight,
                            provenance: d.provenance,
                            table: d.table.clone(),
                        },
                        &mut edges,
                    );
                }
            }
        }
    }

    Ok(DependencyGraph {
        message: message.to_string(),
        fields,
        edges,
    })
}

impl DependencyGraph {
    /// Deterministic topological order over fields. Ties are broken by
    /// declaration order; cycles are broken by repeatedly dropping the
    /// weakest edge (lowest weight, then lexicographic (from, to)).
    pub fn topo_order(&self) -> FieldOrder {
        let index_of = |name: &str| self.fields.iter().position(|f| f == name);
        let mut live: Vec<(usize, usize, usize)> = Vec::new(); // (edge idx, from, to)
        for (i, e) in self.edges.iter().enumerate() {
            if let (Some(f), Some(t)) = (index_of(&e.from), index_of(&e.to)) {
                if f != t {
                    live.push((i, f, t));
                }
            }
        }
        let n = self.fields.len();
        let mut broken: Vec<DepEdge> = Vec::new();
        loop {
            match kahn_order(n, live.iter().map(|&(_, f, t)| (f, t))) {
                Some(order) => {
                    return FieldOrder {
                        order: order.into_iter().map(|i| self.fields[i].clone()).collect(),
                        broken,
                    };
                }
                None => {
                    // drop the weakest edge and retry
                    let victim = live
                        .iter()
                        .enumerate()
                        .min_by(|(_, &(a, _, _)), (_, &(b, _, _))| {
                            let ea = &self.edges[a];
                            let eb = &self.edges[b];
                            ea.weight
                                .partial_cmp(&eb.weight)
                                .unwrap_or(std::cmp::Ordering::Equal)
                                .then_with(|| (&ea.from, &ea.to).cmp(&(&eb.from, &eb.to)))
                        })
                        .map(|(pos, _)| pos);
                    match victim {
                        Some(pos) => {
                            let (edge_idx, _, _) = live.remove(pos);
                            broken.push(self.edges[edge_idx].clone());
                        }
                        None => {
                            // no edges left; cannot happen with a cycle
                            return FieldOrder {
                                order: self.fields.clone(),
                                broken,
                            };
                        }
                    }
                }
            }
        }
    }

    pub fn edge(&self, from: &str, to: &str) -> Option<&DepEdge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }
}

/// Kahn's algorithm over node indices, always emitting the smallest ready
/// index. Returns `None` when the edge set contains a cycle.
pub fn kahn_order(n: usize, edges: impl Iterator<Item = (usize, usize)> + Clone) -> Option<Vec<usize>> {
    let mut indegree = vec![0usize; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (f, t) in edges {
        indegree[t] += 1;
        adj[f].push(t);
    }
    let mut ready: std::collections::BTreeSet<usize> =
        (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&next) = ready.iter().next() {
        ready.remove(&next);
        order.push(next);
        for &t in &adj[next] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.insert(t);
            }
        }
    }
    if order.len() == n {
        Some(order)
    } else {
        None
    }
}
