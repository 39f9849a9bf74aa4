use serde::Serialize;

use super::leash_check;
use crate::engine::{Compute, VertexContext, VertexMessage, VertexProgram};
use crate::graph::{CointGraph, EdgeId, NodeId};

/// Price sent along one incident edge; `None` when the sender is stale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceMsg {
    pub edge: EdgeId,
    pub price: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeCheck {
    pub edge: EdgeId,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct AlertVertexState {
    pub alerted: bool,
    /// Failing checks, ascending by edge id.
    pub broken: Vec<EdgeCheck>,
    pub checked: usize,
    pub skipped_stale: usize,
}

/// Superstep 1 broadcasts each node's price along every incident edge;
/// on receipt every node checks all of its incident edges.
#[derive(Debug, Clone)]
pub struct AlertProgram {
    pub sigma_k: f64,
}

fn incident(graph: &CointGraph, node: NodeId) -> impl Iterator<Item = EdgeId> + '_ {
    graph
        .out_edges(node)
        .iter()
        .chain(graph.in_edges(node))
        .copied()
}

impl AlertProgram {
    fn own_price(ctx: &VertexContext<'_>) -> Option<f64> {
        let node = &ctx.graph.nodes()[ctx.node.index()];
        node.fresh.then_some(node.last_price).flatten()
    }

    fn evaluate(&self, ctx: &VertexContext<'_>, inbox: &[VertexMessage<PriceMsg>]) -> AlertVertexState {
        let mut received: Vec<(EdgeId, Option<f64>)> =
            inbox.iter().map(|m| (m.payload.edge, m.payload.price)).collect();
        received.sort_by_key(|(e, _)| *e);
        let own = Self::own_price(ctx);

        let mut state = AlertVertexState::default();
        let mut edges: Vec<EdgeId> = incident(ctx.graph, ctx.node).collect();
        edges.sort();
        for id in edges {
            let theirs = received
                .binary_search_by_key(&id, |(e, _)| *e)
                .ok()
                .and_then(|i| received[i].1);
            let (Some(mine), Some(theirs)) = (own, theirs) else {
                state.skipped_stale += 1;
                continue;
            };
            let edge = ctx.graph.edge(id).expect("incident edge exists");
            let (x, y) = if edge.src == ctx.node {
                (mine, theirs)
            } else {
                (theirs, mine)
            };
            state.checked += 1;
            let deviation = match leash_check(&edge.model, x, y, self.sigma_k) {
                Ok(c) if !c.alert => continue,
                Ok(c) => c.deviation_sigmas,
                // zero-width band: every observation is outside it
                Err(_) => f64::INFINITY,
            };
            state.alerted = true;
            state.broken.push(EdgeCheck { edge: id, deviation });
        }
        state
    }
}

impl VertexProgram for AlertProgram {
    type State = AlertVertexState;
    type Payload = PriceMsg;

    fn init(&self, _: &CointGraph, _: NodeId) -> AlertVertexState {
        AlertVertexState::default()
    }

    fn compute(
        &self,
        ctx: &VertexContext<'_>,
        state: &AlertVertexState,
        inbox: &[VertexMessage<PriceMsg>],
    ) -> Compute<AlertVertexState, PriceMsg> {
        if ctx.superstep == 1 && inbox.is_empty() {
            let price = Self::own_price(ctx);
            let outbox = incident(ctx.graph, ctx.node)
                .map(|id| {
                    let e = ctx.graph.edge(id).expect("incident edge exists");
                    let other = if e.src == ctx.node { e.dst } else { e.src };
                    (other, PriceMsg { edge: id, price })
                })
                .collect();
            return Compute {
                state: state.clone(),
                outbox,
                halt: true,
            };
        }
        Compute::halt(self.evaluate(ctx, inbox))
    }

    fn absorb(
        &self,
        ctx: &VertexContext<'_>,
        _state: &AlertVertexState,
        inbox: &[VertexMessage<PriceMsg>],
    ) -> AlertVertexState {
        self.evaluate(ctx, inbox)
    }
}
