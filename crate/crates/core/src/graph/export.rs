//! DOT and JSON serialization of [`CointGraph`].
//!
//! JSON layout (field names are frozen by round-trip tests):
//!
//! ```text
//! { "epoch": u64, "next_edge_id": u32,
//!   "meta":  { "epsilon", "window_id", "window_len" },
//!   "nodes": [ { "id", "symbol", "last_price"|null, "fresh",
//!                "alert_state": "clear"|"alerted",
//!                "alert_history": [[epoch, state], ...] } ],
//!   "edges": [ { "id", "src", "dst", "broken",
//!                "model": { "beta0", "beta1", "resid_mean", "resid_std",
//!                           "pvalue", "adf_stat", "window_id" } } ] }
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{AlertState, CointEdge, CointGraph, EdgeId, GraphError, GraphMeta, NodeId};
use crate::coint::CointModel;

/// Thickest edge in DOT output; pen width scales as `1 / resid_std`.
const MAX_PENWIDTH: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub epoch: u64,
    pub next_edge_id: u32,
    pub meta: GraphMeta,
    pub nodes: Vec<NodeDocument>,
    pub edges: Vec<EdgeDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDocument {
    pub id: NodeId,
    pub symbol: String,
    pub last_price: Option<f64>,
    pub fresh: bool,
    pub alert_state: AlertState,
    pub alert_history: Vec<(u64, AlertState)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub broken: bool,
    pub model: CointModel,
}

fn violation(path: impl Into<String>, message: impl Into<String>) -> GraphError {
    GraphError::SchemaViolation {
        path: path.into(),
        message: message.into(),
    }
}

pub(super) fn check_model(path: &str, m: &CointModel) -> Result<(), GraphError> {
    let finite = [
        ("beta0", m.beta0),
        ("beta1", m.beta1),
        ("resid_mean", m.resid_mean),
        ("resid_std", m.resid_std),
        ("pvalue", m.pvalue),
        ("adf_stat", m.adf_stat),
    ];
    for (field, v) in finite {
        if !v.is_finite() {
            return Err(violation(format!("{path}.{field}"), "must be finite"));
        }
    }
    if !(0.0..=1.0).contains(&m.pvalue) {
        return Err(violation(format!("{path}.pvalue"), format!("{} outside [0, 1]", m.pvalue)));
    }
    if m.resid_std <= 0.0 {
        return Err(violation(format!("{path}.resid_std"), "must be > 0"));
    }
    Ok(())
}

impl CointGraph {
    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            epoch: self.epoch,
            next_edge_id: self.next_edge_id().0,
            meta: self.meta.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDocument {
                    id: n.id,
                    symbol: n.symbol.clone(),
                    last_price: n.last_price,
                    fresh: n.fresh,
                    alert_state: n.alert_state,
                    alert_history: n.alert_history.iter().map(|(k, v)| (*k, *v)).collect(),
                })
                .collect(),
            edges: self
                .edges()
                .map(|e| EdgeDocument {
                    id: e.id,
                    src: e.src,
                    dst: e.dst,
                    broken: e.broken,
                    model: e.model.clone(),
                })
                .collect(),
        }
    }

    /// Rebuilds a graph, validating model invariants and adjacency.
    pub fn from_document(doc: GraphDocument) -> Result<Self, GraphError> {
        for (i, n) in doc.nodes.iter().enumerate() {
            if n.id.index() != i {
                return Err(violation(format!("nodes[{i}].id"), "ids must be dense and ordered"));
            }
            if let Some(p) = n.last_price {
                if !(p.is_finite() && p > 0.0) {
                    return Err(violation(format!("nodes[{i}].last_price"), "must be finite and > 0"));
                }
            }
            let mut prev: Option<u64> = None;
            for (j, (epoch, _)) in n.alert_history.iter().enumerate() {
                if prev.is_some_and(|p| p >= *epoch) || *epoch > doc.epoch {
                    return Err(violation(
                        format!("nodes[{i}].alert_history[{j}]"),
                        "epochs must increase and not exceed the graph epoch",
                    ));
                }
                prev = Some(*epoch);
            }
        }
        if !(0.0..=1.0).contains(&doc.meta.epsilon) {
            return Err(violation("meta.epsilon", "outside [0, 1]"));
        }

        let symbols: Vec<&str> = doc.nodes.iter().map(|n| n.symbol.as_str()).collect();
        let mut g = CointGraph::with_symbols(&symbols, doc.meta.clone())?;
        g.epoch = doc.epoch;
        for (node, d) in g.nodes.iter_mut().zip(&doc.nodes) {
            node.last_price = d.last_price;
            node.fresh = d.fresh;
            node.alert_state = d.alert_state;
            node.alert_history = d.alert_history.iter().copied().collect::<BTreeMap<_, _>>();
        }

        let slots = doc.next_edge_id as usize;
        g.edges = vec![None; slots];
        let mut prev: Option<EdgeId> = None;
        for (i, e) in doc.edges.into_iter().enumerate() {
            let path = format!("edges[{i}]");
            if e.id.index() >= slots || prev.is_some_and(|p| p >= e.id) {
                return Err(violation(
                    format!("{path}.id"),
                    "ids must be ascending and below next_edge_id",
                ));
            }
            prev = Some(e.id);
            for (field, n) in [("src", e.src), ("dst", e.dst)] {
                if n.index() >= g.nodes.len() {
                    return Err(violation(format!("{path}.{field}"), format!("unknown node {n}")));
                }
            }
            if e.src == e.dst {
                return Err(violation(format!("{path}.dst"), "self loop"));
            }
            if g.find_edge(e.src, e.dst).is_some() {
                return Err(violation(path, "duplicate (src, dst)"));
            }
            check_model(&format!("{path}.model"), &e.model)?;
            g.out_adj[e.src.index()].push(e.id);
            g.in_adj[e.dst.index()].push(e.id);
            g.edges[e.id.index()] = Some(CointEdge {
                id: e.id,
                src: e.src,
                dst: e.dst,
                model: e.model,
                broken: e.broken,
            });
            g.edge_count += 1;
        }
        g.audit()?;
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_document()).expect("graph serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: GraphDocument = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            violation(path, e.into_inner().to_string())
        })?;
        Self::from_document(doc)
    }

    /// Graphviz rendering: pen width proportional to `1 / resid_std`
    /// (normalized so the tightest edge gets `MAX_PENWIDTH`); broken edges
    /// are dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph coint {\n");
        for n in &self.nodes {
            let style = match n.alert_state {
                AlertState::Alerted => ", style=filled, fillcolor=salmon",
                AlertState::Clear => "",
            };
            let _ = writeln!(out, "  {} [label=\"{}\"{style}];", n.id.0, escape(&n.symbol));
        }
        let tightest = self
            .edges()
            .map(|e| e.model.resid_std)
            .fold(f64::INFINITY, f64::min);
        for e in self.edges() {
            let pen = MAX_PENWIDTH * tightest / e.model.resid_std;
            let _ = write!(
                out,
                "  {} -> {} [penwidth={:.4}, label=\"p={:.4} sd={:.4}\"",
                e.src.0, e.dst.0, pen, e.model.pvalue, e.model.resid_std
            );
            if e.broken {
                out.push_str(", style=dashed, color=red");
            }
            out.push_str("];\n");
        }
        out.push_str("}\n");
        out
    }

    pub fn export(&self, format: ExportFormat) -> Vec<u8> {
        match format {
            ExportFormat::Dot => self.to_dot().into_bytes(),
            ExportFormat::Json => self.to_json().into_bytes(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
