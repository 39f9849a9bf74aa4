//! Synchronous vertex-centric superstep engine.
//!
//! Each superstep runs `compute` on every active vertex in parallel, then
//! routes the emitted messages behind a barrier: a message sent in
//! superstep `s` is only visible in superstep `s + 1`. Inboxes are ordered
//! by sender id, which makes results independent of the worker count for
//! any deterministic program. A vertex that votes to halt stays dormant
//! until a message arrives for it.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{CointGraph, NodeId};
use crate::workers::Workers;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("vertex {src} sent a message to nonexistent vertex {dst} in superstep {superstep}")]
    InvalidDestination {
        src: NodeId,
        dst: NodeId,
        superstep: usize,
    },
    #[error("max_supersteps must be at least 1")]
    ZeroBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexMessage<P> {
    pub src: NodeId,
    pub payload: P,
}

pub struct VertexContext<'g> {
    pub graph: &'g CointGraph,
    pub node: NodeId,
    /// 1-based; zero while absorbing at the final barrier.
    pub superstep: usize,
}

impl VertexContext<'_> {
    pub fn epoch(&self) -> u64 {
        self.graph.epoch()
    }
}

pub struct Compute<S, P> {
    pub state: S,
    pub outbox: Vec<(NodeId, P)>,
    pub halt: bool,
}

impl<S, P> Compute<S, P> {
    pub fn halt(state: S) -> Self {
        Self {
            state,
            outbox: Vec::new(),
            halt: true,
        }
    }
}

pub trait VertexProgram: Sync {
    type State: Clone + Send + Sync;
    type Payload: Clone + Send + Sync;

    fn init(&self, graph: &CointGraph, node: NodeId) -> Self::State;

    /// Must be deterministic in `(state, inbox, ctx)`.
    fn compute(
        &self,
        ctx: &VertexContext<'_>,
        state: &Self::State,
        inbox: &[VertexMessage<Self::Payload>],
    ) -> Compute<Self::State, Self::Payload>;

    /// Receive-only step for messages still in flight when the superstep
    /// budget runs out. Only called under [`CapPolicy::AbsorbAtBarrier`].
    fn absorb(
        &self,
        _ctx: &VertexContext<'_>,
        state: &Self::State,
        _inbox: &[VertexMessage<Self::Payload>],
    ) -> Self::State {
        state.clone()
    }
}

/// What happens to messages in flight when `max_supersteps` is reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CapPolicy {
    #[default]
    Discard,
    AbsorbAtBarrier,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub max_supersteps: usize,
    pub cap_policy: CapPolicy,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_supersteps: 1,
            cap_policy: CapPolicy::Discard,
        }
    }
}

pub enum InitialMessages<P> {
    /// Every vertex starts active with an empty inbox.
    Empty,
    /// `(destination, message)` pairs delivered to superstep 1.
    Seeded(Vec<(NodeId, VertexMessage<P>)>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SuperstepResult {
    pub supersteps_run: usize,
    pub halted_all: bool,
    /// Messages emitted in each superstep run.
    pub messages_sent: Vec<usize>,
    /// Total inbox size at the start of each superstep run.
    pub messages_delivered: Vec<usize>,
    /// Messages consumed by the final-barrier absorb.
    pub absorbed: usize,
    /// Messages dropped at the cap.
    pub discarded: usize,
    /// Messages that became visible in the superstep that emitted them.
    /// Always zero; kept as an instrumented check of the barrier.
    pub same_step_deliveries: usize,
}

struct Envelope<P> {
    sent_in: usize,
    msg: VertexMessage<P>,
}

type Inboxes<P> = Vec<Vec<Envelope<P>>>;

fn route<P>(
    n: usize,
    superstep: usize,
    outputs: impl IntoIterator<Item = (NodeId, Vec<(NodeId, P)>)>,
) -> Result<(Inboxes<P>, usize), EngineError> {
    let mut inboxes: Inboxes<P> = (0..n).map(|_| Vec::new()).collect();
    let mut sent = 0;
    // sources arrive in ascending id order, so every inbox is sorted by src
    for (src, outbox) in outputs {
        for (dst, payload) in outbox {
            let slot = inboxes.get_mut(dst.index()).ok_or(EngineError::InvalidDestination {
                src,
                dst,
                superstep,
            })?;
            slot.push(Envelope {
                sent_in: superstep,
                msg: VertexMessage { src, payload },
            });
            sent += 1;
        }
    }
    Ok((inboxes, sent))
}

fn open<P: Clone>(
    inbox: &[Envelope<P>],
    superstep: usize,
    same_step: &mut usize,
) -> Vec<VertexMessage<P>> {
    inbox
        .iter()
        .map(|e| {
            if e.sent_in >= superstep {
                *same_step += 1;
            }
            e.msg.clone()
        })
        .collect()
}

/// Runs `program` over `graph` until every vertex has halted with no
/// messages in flight, or `max_supersteps` supersteps have run.
pub fn run_supersteps<Pr: VertexProgram>(
    graph: &CointGraph,
    program: &Pr,
    opts: &RunOptions,
    initial: InitialMessages<Pr::Payload>,
    workers: &Workers,
) -> Result<(Vec<Pr::State>, SuperstepResult), EngineError> {
    if opts.max_supersteps == 0 {
        return Err(EngineError::ZeroBudget);
    }
    let n = graph.node_count();
    let mut states: Vec<Pr::State> = (0..n)
        .map(|i| program.init(graph, NodeId(i as u32)))
        .collect();
    let mut halted = vec![false; n];
    let mut result = SuperstepResult::default();

    let mut inboxes: Inboxes<Pr::Payload> = (0..n).map(|_| Vec::new()).collect();
    if let InitialMessages::Seeded(mut seeded) = initial {
        seeded.sort_by_key(|(_, m)| m.src);
        for (dst, msg) in seeded {
            let slot = inboxes.get_mut(dst.index()).ok_or(EngineError::InvalidDestination {
                src: msg.src,
                dst,
                superstep: 0,
            })?;
            slot.push(Envelope { sent_in: 0, msg });
        }
    }

    let mut superstep = 0;
    loop {
        superstep += 1;
        let first = superstep == 1;
        result.messages_delivered.push(inboxes.iter().map(Vec::len).sum());

        let mut same_step = 0;
        let opened: Vec<Vec<VertexMessage<Pr::Payload>>> = inboxes
            .iter()
            .map(|b| open(b, superstep, &mut same_step))
            .collect();
        result.same_step_deliveries += same_step;

        let outputs: Vec<Option<Compute<Pr::State, Pr::Payload>>> = workers.install(|| {
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let active = first || !halted[i] || !opened[i].is_empty();
                    active.then(|| {
                        let ctx = VertexContext {
                            graph,
                            node: NodeId(i as u32),
                            superstep,
                        };
                        program.compute(&ctx, &states[i], &opened[i])
                    })
                })
                .collect()
        });

        let mut outboxes = Vec::with_capacity(n);
        for (i, out) in outputs.into_iter().enumerate() {
            if let Some(c) = out {
                states[i] = c.state;
                halted[i] = c.halt;
                outboxes.push((NodeId(i as u32), c.outbox));
            }
        }
        let (next, sent) = route(n, superstep, outboxes)?;
        inboxes = next;
        result.messages_sent.push(sent);
        result.supersteps_run = superstep;

        let all_halted = halted.iter().all(|h| *h);
        if sent == 0 && all_halted {
            result.halted_all = true;
            break;
        }
        if superstep == opts.max_supersteps {
            match opts.cap_policy {
                CapPolicy::Discard => result.discarded = sent,
                CapPolicy::AbsorbAtBarrier => {
                    let mut same_step = 0;
                    let opened: Vec<Vec<VertexMessage<Pr::Payload>>> = inboxes
                        .iter()
                        .map(|b| open(b, superstep + 1, &mut same_step))
                        .collect();
                    result.same_step_deliveries += same_step;
                    let absorbed: Vec<Option<Pr::State>> = workers.install(|| {
                        (0..n)
                            .into_par_iter()
                            .map(|i| {
                                (!opened[i].is_empty()).then(|| {
                                    let ctx = VertexContext {
                                        graph,
                                        node: NodeId(i as u32),
                                        superstep: 0,
                                    };
                                    program.absorb(&ctx, &states[i], &opened[i])
                                })
                            })
                            .collect()
                    });
                    for (i, s) in absorbed.into_iter().enumerate() {
                        if let Some(s) = s {
                            states[i] = s;
                        }
                    }
                    result.absorbed = sent;
                    result.halted_all = all_halted;
                }
            }
            break;
        }
    }
    Ok((states, result))
}

/// Runs the program once per worker count and reports whether every run
/// produced byte-identical final states.
pub fn audit_determinism<Pr>(
    graph: &CointGraph,
    program: &Pr,
    opts: &RunOptions,
    worker_counts: &[usize],
) -> bool
where
    Pr: VertexProgram,
    Pr::State: Serialize,
{
    let mut reference: Option<Vec<u8>> = None;
    for &w in worker_counts {
        let workers = Workers::new(w);
        let bytes = match run_supersteps(graph, program, opts, InitialMessages::Empty, &workers) {
            Ok((states, _)) => serde_json::to_vec(&states).expect("state serializes"),
            Err(e) => e.to_string().into_bytes(),
        };
        match &reference {
            None => reference = Some(bytes),
            Some(r) if *r != bytes => return false,
            Some(_) => {}
        }
    }
    true
}
