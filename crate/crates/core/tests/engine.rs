mod common;

use leashwatch::alert::AlertProgram;
use leashwatch::coint::CointModel;
use leashwatch::engine::{
    audit_determinism, run_supersteps, CapPolicy, Compute, EngineError, InitialMessages, RunOptions,
    VertexContext, VertexMessage, VertexProgram,
};
use leashwatch::graph::{CointGraph, GraphMeta, NodeId};
use leashwatch::synth::{planted_graph, rng, PlantedGraphSpec};
use leashwatch::Workers;
use proptest::prelude::*;
use rand::Rng;

fn model() -> CointModel {
    CointModel {
        beta0: 0.0,
        beta1: 1.0,
        resid_mean: 0.0,
        resid_std: 1.0,
        pvalue: 0.01,
        adf_stat: -4.0,
        window_id: "w".into(),
    }
}

fn graph(n: usize, edges: &[(u32, u32)]) -> CointGraph {
    let symbols: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut g = CointGraph::with_symbols(&symbols, GraphMeta::default()).unwrap();
    for &(s, d) in edges {
        g.add_edge(NodeId(s), NodeId(d), model()).unwrap();
    }
    g
}

fn random_graph(n: usize, density: f64, seed: u64) -> CointGraph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for s in 0..n as u32 {
        for d in 0..n as u32 {
            if s != d && r.random::<f64>() < density {
                edges.push((s, d));
            }
        }
    }
    graph(n, &edges)
}

fn opts(max: usize) -> RunOptions {
    RunOptions {
        max_supersteps: max,
        cap_policy: CapPolicy::Discard,
    }
}

struct HaltNow;

impl VertexProgram for HaltNow {
    type State = u32;
    type Payload = ();

    fn init(&self, _: &CointGraph, _: NodeId) -> u32 {
        0
    }

    fn compute(&self, _: &VertexContext<'_>, s: &u32, _: &[VertexMessage<()>]) -> Compute<u32, ()> {
        Compute::halt(s + 1)
    }
}

/// Sends its id to every neighbour in superstep 1 and records what arrives.
struct SendIds;

impl VertexProgram for SendIds {
    type State = Vec<u32>;
    type Payload = u32;

    fn init(&self, _: &CointGraph, _: NodeId) -> Vec<u32> {
        Vec::new()
    }

    fn compute(&self, ctx: &VertexContext<'_>, s: &Vec<u32>, inbox: &[VertexMessage<u32>]) -> Compute<Vec<u32>, u32> {
        if ctx.superstep == 1 {
            let outbox = ctx
                .graph
                .neighbors(ctx.node)
                .unwrap()
                .iter()
                .map(|n| (n.node, ctx.node.0))
                .collect();
            return Compute {
                state: s.clone(),
                outbox,
                halt: true,
            };
        }
        let mut seen = s.clone();
        seen.extend(inbox.iter().map(|m| m.payload));
        Compute::halt(seen)
    }
}

/// Keeps talking to its out-neighbours for a fixed number of rounds and
/// counts every compute call it receives.
struct Chatter {
    rounds: usize,
}

impl VertexProgram for Chatter {
    type State = (usize, usize);
    type Payload = u64;

    fn init(&self, _: &CointGraph, _: NodeId) -> (usize, usize) {
        (0, 0)
    }

    fn compute(
        &self,
        ctx: &VertexContext<'_>,
        s: &(usize, usize),
        inbox: &[VertexMessage<u64>],
    ) -> Compute<(usize, usize), u64> {
        let state = (s.0 + 1, s.1 + inbox.len());
        if ctx.superstep > self.rounds {
            return Compute::halt(state);
        }
        let outbox = ctx
            .graph
            .out_edges(ctx.node)
            .iter()
            .map(|&e| (ctx.graph.edge(e).unwrap().dst, ctx.superstep as u64))
            .collect();
        Compute {
            state,
            outbox,
            halt: true,
        }
    }
}

/// Negative control: the state depends on the pool it ran on.
struct PoolSensitive;

impl VertexProgram for PoolSensitive {
    type State = usize;
    type Payload = ();

    fn init(&self, _: &CointGraph, _: NodeId) -> usize {
        0
    }

    fn compute(&self, _: &VertexContext<'_>, _: &usize, _: &[VertexMessage<()>]) -> Compute<usize, ()> {
        Compute::halt(rayon::current_num_threads())
    }
}

struct Stray;

impl VertexProgram for Stray {
    type State = ();
    type Payload = ();

    fn init(&self, _: &CointGraph, _: NodeId) {}

    fn compute(&self, ctx: &VertexContext<'_>, _: &(), _: &[VertexMessage<()>]) -> Compute<(), ()> {
        Compute {
            state: (),
            outbox: if ctx.node.0 == 1 { vec![(NodeId(42), ())] } else { vec![] },
            halt: true,
        }
    }
}

#[test]
fn immediate_halt_runs_one_superstep() {
    let g = random_graph(12, 0.3, 1);
    let (states, res) = run_supersteps(&g, &HaltNow, &opts(10), InitialMessages::Empty, &Workers::new(2)).unwrap();
    assert_eq!(res.supersteps_run, 1);
    assert!(res.halted_all);
    assert!(states.iter().all(|&s| s == 1));
}

#[test]
fn path_graph_inboxes_match_oracle() {
    let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
    let (states, res) = run_supersteps(&g, &SendIds, &opts(2), InitialMessages::Empty, &Workers::new(3)).unwrap();
    assert_eq!(res.supersteps_run, 2);
    let m = common::adjacency_matrix(5, &common::graph_edges(&g));
    for (i, got) in states.iter().enumerate() {
        let want: Vec<u32> = common::matrix_neighbors(&m, i).iter().map(|(n, _)| *n as u32).collect();
        assert_eq!(got, &want, "node {i}");
    }
}

#[test]
fn cap_wins_over_pending_messages() {
    let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
    let (states, res) = run_supersteps(&g, &SendIds, &opts(1), InitialMessages::Empty, &Workers::single()).unwrap();
    assert_eq!(res.supersteps_run, 1);
    assert!(!res.halted_all);
    assert_eq!(res.discarded, 8);
    assert!(states.iter().all(Vec::is_empty));
}

#[test]
fn absorb_policy_consumes_final_messages() {
    let g = graph(3, &[(0, 1), (1, 2)]);
    let o = RunOptions {
        max_supersteps: 1,
        cap_policy: CapPolicy::AbsorbAtBarrier,
    };
    let (_, res) = run_supersteps(&g, &SendIds, &o, InitialMessages::Empty, &Workers::single()).unwrap();
    assert_eq!((res.supersteps_run, res.absorbed, res.discarded), (1, 4, 0));
}

#[test]
fn invalid_destination_names_sender() {
    let g = graph(3, &[]);
    let e = run_supersteps(&g, &Stray, &opts(2), InitialMessages::Empty, &Workers::single()).unwrap_err();
    assert_eq!(
        e,
        EngineError::InvalidDestination {
            src: NodeId(1),
            dst: NodeId(42),
            superstep: 1
        }
    );
    assert!(e.to_string().contains("n1"));
}

#[test]
fn zero_budget_rejected() {
    let g = graph(2, &[]);
    assert_eq!(
        run_supersteps(&g, &HaltNow, &opts(0), InitialMessages::Empty, &Workers::single()).unwrap_err(),
        EngineError::ZeroBudget
    );
}

#[test]
fn halted_vertices_wake_only_on_messages() {
    // 0 -> 1 -> 2, node 3 isolated; three rounds of chatter
    let g = graph(4, &[(0, 1), (1, 2)]);
    let (states, res) = run_supersteps(&g, &Chatter { rounds: 3 }, &opts(10), InitialMessages::Empty, &Workers::single()).unwrap();
    assert!(res.halted_all);
    // node 0 never receives anything, so it runs only in superstep 1
    assert_eq!(states[0], (1, 0));
    assert_eq!(states[3], (1, 0));
    // node 1 wakes once for 0's message and forwards in superstep 2, so
    // node 2 wakes in supersteps 2 and 3
    assert_eq!(states[1], (2, 1));
    assert_eq!(states[2], (3, 2));
}

#[test]
fn seeded_initial_messages_delivered_in_superstep_one() {
    let g = graph(3, &[]);
    let seeded = vec![
        (NodeId(2), VertexMessage { src: NodeId(1), payload: 5 }),
        (NodeId(2), VertexMessage { src: NodeId(0), payload: 7 }),
    ];
    let (states, res) = run_supersteps(&g, &Chatter { rounds: 0 }, &opts(3), InitialMessages::Seeded(seeded), &Workers::single()).unwrap();
    assert_eq!(res.messages_delivered[0], 2);
    assert_eq!(states[2], (1, 2));
}

#[test]
fn determinism_audit_passes_for_sound_programs() {
    assert!(audit_determinism(&random_graph(20, 0.2, 3), &HaltNow, &opts(1), &[1, 4]));
    assert!(audit_determinism(&random_graph(30, 0.2, 4), &SendIds, &opts(2), &[1, 2, 8]));

    let planted = planted_graph(&PlantedGraphSpec::cluster_64(), 5);
    let mut r = rng(6);
    let (tick, _, _) = planted.turbulent_day(&mut r, 6.0);
    let g = planted.graph.update_prices(tick.prices.iter().map(|(s, p)| (s.as_str(), *p))).unwrap();
    let absorb = RunOptions {
        max_supersteps: 1,
        cap_policy: CapPolicy::AbsorbAtBarrier,
    };
    assert!(audit_determinism(&g, &AlertProgram { sigma_k: 3.0 }, &absorb, &[1, 2, 8]));
}

#[test]
fn determinism_audit_catches_pool_dependent_program() {
    let g = random_graph(8, 0.3, 9);
    assert!(!audit_determinism(&g, &PoolSensitive, &opts(1), &[1, 2]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn barrier_and_conservation(seed in 0u64..10_000, n in 1usize..30, density in 0.0f64..0.4, rounds in 0usize..5, max in 1usize..8, workers in 1usize..5) {
        let g = random_graph(n, density, seed);
        let (_, res) = run_supersteps(&g, &Chatter { rounds }, &opts(max), InitialMessages::Empty, &Workers::new(workers)).unwrap();
        prop_assert!(res.supersteps_run <= max);
        prop_assert_eq!(res.same_step_deliveries, 0);
        prop_assert_eq!(res.messages_sent.len(), res.supersteps_run);
        for s in 1..res.supersteps_run {
            prop_assert_eq!(res.messages_sent[s - 1], res.messages_delivered[s]);
        }
        let last = res.messages_sent.last().copied().unwrap_or(0);
        if res.supersteps_run == max && !res.halted_all {
            prop_assert_eq!(last, res.discarded);
        }
        let single = run_supersteps(&g, &Chatter { rounds }, &opts(max), InitialMessages::Empty, &Workers::single()).unwrap();
        let multi = run_supersteps(&g, &Chatter { rounds }, &opts(max), InitialMessages::Empty, &Workers::new(workers)).unwrap();
        prop_assert_eq!(single.0, multi.0);
        prop_assert_eq!(single.1, multi.1);
    }
}
