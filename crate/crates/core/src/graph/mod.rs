//! Directed, attributed cointegration graph.
//!
//! Nodes are symbols with their latest price and alert status; edges carry
//! the fitted [`CointModel`] predicting `dst` from `src`. Every mutating
//! operation returns a new version and leaves `self` readable.

mod export;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coint::{admits, CointModel, ScanResult};

pub use export::{ExportFormat, GraphDocument};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("duplicate edge {src} -> {dst}")]
    DuplicateEdge { src: String, dst: String },
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("non-positive or non-finite price {price} for {symbol}")]
    NonPositivePrice { symbol: String, price: f64 },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("adjacency audit failed: {0}")]
    AuditFailed(String),
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertState {
    #[default]
    Clear,
    Alerted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolNode {
    pub id: NodeId,
    pub symbol: String,
    /// `None` until the first price arrives.
    pub last_price: Option<f64>,
    /// Whether `last_price` was supplied by the current epoch's tick.
    pub fresh: bool,
    pub alert_state: AlertState,
    /// Epoch -> alert state evaluated at that epoch.
    pub alert_history: BTreeMap<u64, AlertState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CointEdge {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub model: CointModel,
    pub broken: bool,
}

/// Provenance of the fitted edge models.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GraphMeta {
    pub epsilon: f64,
    pub window_id: String,
    pub window_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub edge: EdgeId,
    pub node: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CointGraph {
    nodes: Vec<SymbolNode>,
    /// Indexed by edge id; removed edges leave a hole so ids stay stable.
    edges: Vec<Option<CointEdge>>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    by_symbol: HashMap<String, NodeId>,
    epoch: u64,
    edge_count: usize,
    meta: GraphMeta,
}

impl CointGraph {
    /// A graph with the given symbols and no edges, at epoch 0.
    pub fn with_symbols<S: AsRef<str>>(symbols: &[S], meta: GraphMeta) -> Result<Self, GraphError> {
        let mut by_symbol = HashMap::with_capacity(symbols.len());
        let mut nodes = Vec::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            let id = NodeId(i as u32);
            if by_symbol.insert(s.as_ref().to_owned(), id).is_some() {
                return Err(GraphError::SchemaViolation {
                    path: format!("nodes[{i}].symbol"),
                    message: format!("duplicate symbol {}", s.as_ref()),
                });
            }
            nodes.push(SymbolNode {
                id,
                symbol: s.as_ref().to_owned(),
                last_price: None,
                fresh: false,
                alert_state: AlertState::Clear,
                alert_history: BTreeMap::new(),
            });
        }
        Ok(Self {
            out_adj: vec![Vec::new(); nodes.len()],
            in_adj: vec![Vec::new(); nodes.len()],
            nodes,
            edges: Vec::new(),
            by_symbol,
            epoch: 0,
            edge_count: 0,
            meta,
        })
    }

    /// Appends an edge with the next free id.
    /// Rejects self-loops, repeated `(src, dst)` pairs and models that are
    /// non-finite, have p outside [0, 1] or a non-positive residual spread.
    pub fn add_edge(&mut self, src: NodeId, dst: NodeId, model: CointModel) -> Result<EdgeId, GraphError> {
        for n in [src, dst] {
            if n.index() >= self.nodes.len() {
                return Err(GraphError::UnknownNode(n));
            }
        }
        export::check_model("model", &model)?;
        if src == dst || self.find_edge(src, dst).is_some() {
            return Err(GraphError::DuplicateEdge {
                src: self.nodes[src.index()].symbol.clone(),
                dst: self.nodes[dst.index()].symbol.clone(),
            });
        }
        let id = EdgeId(self.edges.len() as u32);
        self.edges.push(Some(CointEdge {
            id,
            src,
            dst,
            model,
            broken: false,
        }));
        self.out_adj[src.index()].push(id);
        self.in_adj[dst.index()].push(id);
        self.edge_count += 1;
        Ok(id)
    }

    pub fn find_edge(&self, src: NodeId, dst: NodeId) -> Option<EdgeId> {
        self.out_adj
            .get(src.index())?
            .iter()
            .copied()
            .find(|e| self.edges[e.index()].as_ref().is_some_and(|e| e.dst == dst))
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> &[SymbolNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&SymbolNode, GraphError> {
        self.nodes.get(id.index()).ok_or(GraphError::UnknownNode(id))
    }

    pub fn node_id(&self, symbol: &str) -> Option<NodeId> {
        self.by_symbol.get(symbol).copied()
    }

    /// Live edges in ascending id order.
    pub fn edges(&self) -> impl Iterator<Item = &CointEdge> + '_ {
        self.edges.iter().flatten()
    }

    pub fn edge(&self, id: EdgeId) -> Result<&CointEdge, GraphError> {
        self.edges
            .get(id.index())
            .and_then(Option::as_ref)
            .ok_or(GraphError::UnknownEdge(id))
    }

    /// One past the largest edge id ever issued.
    pub fn next_edge_id(&self) -> EdgeId {
        EdgeId(self.edges.len() as u32)
    }

    pub fn out_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.out_adj[node.index()]
    }

    pub fn in_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.in_adj[node.index()]
    }

    /// In- and out-incident edges with their opposite endpoint, sorted by
    /// neighbor id and then edge id.
    pub fn neighbors(&self, node: NodeId) -> Result<Vec<Neighbor>, GraphError> {
        self.node(node)?;
        let mut out: Vec<Neighbor> = self.out_adj[node.index()]
            .iter()
            .map(|&e| Neighbor {
                edge: e,
                node: self.edges[e.index()].as_ref().expect("adjacency").dst,
            })
            .chain(self.in_adj[node.index()].iter().map(|&e| Neighbor {
                edge: e,
                node: self.edges[e.index()].as_ref().expect("adjacency").src,
            }))
            .collect();
        out.sort_by_key(|n| (n.node, n.edge));
        Ok(out)
    }

    /// Sets prices for the supplied symbols and advances the epoch.
    ///
    /// Symbols absent from `tick` keep their previous price and become stale
    /// for the new epoch.
    pub fn update_prices<K: AsRef<str>>(
        &self,
        tick: impl IntoIterator<Item = (K, f64)>,
    ) -> Result<Self, GraphError> {
        let mut next = self.clone();
        for node in &mut next.nodes {
            node.fresh = false;
        }
        for (symbol, price) in tick {
            let symbol = symbol.as_ref();
            let id = self
                .node_id(symbol)
                .ok_or_else(|| GraphError::UnknownSymbol(symbol.to_owned()))?;
            if !(price.is_finite() && price > 0.0) {
                return Err(GraphError::NonPositivePrice {
                    symbol: symbol.to_owned(),
                    price,
                });
            }
            let node = &mut next.nodes[id.index()];
            node.last_price = Some(price);
            node.fresh = true;
        }
        next.epoch += 1;
        Ok(next)
    }

    /// Sets initial prices without advancing the epoch; all nodes stay stale.
    pub fn with_initial_prices<K: AsRef<str>>(
        &self,
        prices: impl IntoIterator<Item = (K, f64)>,
    ) -> Result<Self, GraphError> {
        let mut next = self.update_prices(prices)?;
        next.epoch = self.epoch;
        for node in &mut next.nodes {
            node.fresh = false;
        }
        Ok(next)
    }

    pub fn remove_edges(&self, ids: &[EdgeId]) -> Result<Self, GraphError> {
        let mut next = self.clone();
        next.remove_in_place(ids)?;
        Ok(next)
    }

    pub(crate) fn remove_in_place(&mut self, ids: &[EdgeId]) -> Result<(), GraphError> {
        for &id in ids {
            self.edge(id)?;
        }
        let doomed: BTreeSet<EdgeId> = ids.iter().copied().collect();
        for &id in &doomed {
            let edge = self.edges[id.index()].take().expect("checked above");
            self.out_adj[edge.src.index()].retain(|e| *e != id);
            self.in_adj[edge.dst.index()].retain(|e| *e != id);
            self.edge_count -= 1;
        }
        Ok(())
    }

    pub(crate) fn edge_mut(&mut self, id: EdgeId) -> Result<&mut CointEdge, GraphError> {
        self.edges
            .get_mut(id.index())
            .and_then(Option::as_mut)
            .ok_or(GraphError::UnknownEdge(id))
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut SymbolNode {
        &mut self.nodes[id.index()]
    }

    /// Checks that adjacency lists and the edge collection agree exactly.
    pub fn audit(&self) -> Result<(), GraphError> {
        let fail = |m: String| Err(GraphError::AuditFailed(m));
        if self.out_adj.len() != self.nodes.len() || self.in_adj.len() != self.nodes.len() {
            return fail("adjacency length differs from node count".into());
        }
        let mut seen_pairs = BTreeSet::new();
        let mut live = 0;
        for (i, slot) in self.edges.iter().enumerate() {
            let Some(e) = slot else { continue };
            live += 1;
            if e.id.index() != i {
                return fail(format!("edge slot {i} holds {}", e.id));
            }
            if e.src == e.dst || e.src.index() >= self.nodes.len() || e.dst.index() >= self.nodes.len() {
                return fail(format!("{} has invalid endpoints", e.id));
            }
            if !seen_pairs.insert((e.src, e.dst)) {
                return fail(format!("parallel edge {} -> {}", e.src, e.dst));
            }
            if self.out_adj[e.src.index()].iter().filter(|x| **x == e.id).count() != 1
                || self.in_adj[e.dst.index()].iter().filter(|x| **x == e.id).count() != 1
            {
                return fail(format!("{} missing from adjacency", e.id));
            }
        }
        if live != self.edge_count {
            return fail(format!("edge count {} but {live} live", self.edge_count));
        }
        let listed: usize = self.out_adj.iter().map(Vec::len).sum();
        let listed_in: usize = self.in_adj.iter().map(Vec::len).sum();
        if listed != live || listed_in != live {
            return fail("adjacency lists reference dead or foreign edges".into());
        }
        for (n, list) in self.out_adj.iter().enumerate() {
            for e in list {
                match self.edges.get(e.index()).and_then(Option::as_ref) {
                    Some(edge) if edge.src.index() == n => {}
                    _ => return fail(format!("out list of n{n} holds stray {e}")),
                }
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return fail(format!("out list of n{n} not ascending"));
            }
        }
        for (n, list) in self.in_adj.iter().enumerate() {
            for e in list {
                match self.edges.get(e.index()).and_then(Option::as_ref) {
                    Some(edge) if edge.dst.index() == n => {}
                    _ => return fail(format!("in list of n{n} holds stray {e}")),
                }
            }
        }
        Ok(())
    }
}

/// Builds the graph from a pair scan: one node per universe symbol and one
/// edge per pair admitted at `epsilon`.
pub fn build_graph(scan: &ScanResult, epsilon: f64) -> Result<CointGraph, GraphError> {
    let meta = GraphMeta {
        epsilon,
        window_id: scan.window_id.clone(),
        window_len: scan.window_len,
    };
    let mut g = CointGraph::with_symbols(&scan.symbols, meta)?;
    let mut seen = BTreeSet::new();
    for p in &scan.pairs {
        if !seen.insert((p.src, p.dst)) {
            return Err(GraphError::DuplicateEdge {
                src: scan.symbols[p.src].clone(),
                dst: scan.symbols[p.dst].clone(),
            });
        }
    }
    for p in scan.pairs.iter().filter(|p| admits(&p.model, epsilon)) {
        g.add_edge(NodeId(p.src as u32), NodeId(p.dst as u32), p.model.clone())?;
    }
    Ok(g)
}
