//! Seeded synthetic data: planted universes for the pair scan, planted
//! graphs with known leash breaks, and pair scenarios for recomputation.
//!
//! Every generator is a pure function of its spec and seed.

use std::collections::BTreeSet;
use std::sync::Arc;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::alert::Tick;
use crate::coint::{CointModel, PriceSeries};
use crate::graph::{CointGraph, EdgeId, GraphMeta, NodeId};
use crate::pipeline::PriceTable;
use crate::stats::Series;

pub type SynthRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SynthRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn first_day() -> NaiveDate {
    NaiveDate::from_ymd_opt(2015, 1, 2).expect("valid date")
}

/// `n` weekdays starting at `start` (inclusive if it is a weekday).
pub fn business_days_from(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

pub fn business_days(n: usize) -> Arc<[NaiveDate]> {
    business_days_from(first_day(), n).into()
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("finite sd")
}

pub fn white_noise(rng: &mut SynthRng, n: usize, sd: f64) -> Vec<f64> {
    let d = normal(sd);
    (0..n).map(|_| d.sample(rng)).collect()
}

pub fn random_walk(rng: &mut SynthRng, n: usize, start: f64, sd: f64) -> Vec<f64> {
    let d = normal(sd);
    let mut level = start;
    (0..n)
        .map(|i| {
            if i > 0 {
                level += d.sample(rng);
            }
            level
        })
        .collect()
}

/// Shifts a path up so its minimum is at least `floor`.
fn lift(path: &mut [f64], floor: f64) {
    let min = path.iter().copied().fold(f64::INFINITY, f64::min);
    if min < floor {
        path.iter_mut().for_each(|v| *v += floor - min);
    }
}

fn symbol_names(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len().max(3);
    (0..n).map(|i| format!("S{i:0width$}")).collect()
}

/// Clusters of noisy affine copies of a shared latent walk, plus
/// independent walks.
#[derive(Debug, Clone, PartialEq)]
pub struct UniverseSpec {
    pub cluster_sizes: Vec<usize>,
    pub independent: usize,
    pub days: usize,
    pub step_sd: f64,
    pub noise_sd: f64,
}

impl UniverseSpec {
    /// Five copies of one driver and five independent walks, 250 days.
    pub fn planted_ten() -> Self {
        Self {
            cluster_sizes: vec![5],
            independent: 5,
            days: 250,
            step_sd: 1.0,
            noise_sd: 1.0,
        }
    }

    pub fn symbol_count(&self) -> usize {
        self.cluster_sizes.iter().sum::<usize>() + self.independent
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticUniverse {
    pub spec: UniverseSpec,
    pub symbols: Vec<String>,
    pub dates: Arc<[NaiveDate]>,
    /// `prices[symbol][day]`.
    pub prices: Vec<Vec<f64>>,
    pub cluster_of: Vec<Option<usize>>,
    /// `(intercept, loading)` on the cluster driver; unused for walks.
    loadings: Vec<(f64, f64)>,
    drivers: Vec<Vec<f64>>,
}

pub fn planted_universe(spec: &UniverseSpec, seed: u64) -> SyntheticUniverse {
    let mut r = rng(seed);
    let n = spec.symbol_count();
    let noise = normal(spec.noise_sd);
    let mut prices = Vec::with_capacity(n);
    let mut cluster_of = Vec::with_capacity(n);
    let mut loadings = Vec::with_capacity(n);
    let mut drivers = Vec::new();

    for (c, &size) in spec.cluster_sizes.iter().enumerate() {
        let mut driver = random_walk(&mut r, spec.days, 100.0, spec.step_sd);
        lift(&mut driver, 20.0);
        for _ in 0..size {
            let a = r.random_range(10.0..40.0);
            let b = r.random_range(0.5..1.5);
            let mut path: Vec<f64> = driver
                .iter()
                .map(|d| a + b * d + noise.sample(&mut r))
                .collect();
            lift(&mut path, 1.0);
            prices.push(path);
            cluster_of.push(Some(c));
            loadings.push((a, b));
        }
        drivers.push(driver);
    }
    for _ in 0..spec.independent {
        let start = r.random_range(50.0..150.0);
        let mut path = random_walk(&mut r, spec.days, start, spec.step_sd);
        lift(&mut path, 20.0);
        prices.push(path);
        cluster_of.push(None);
        loadings.push((0.0, 0.0));
    }

    SyntheticUniverse {
        spec: spec.clone(),
        symbols: symbol_names(n),
        dates: business_days(spec.days),
        prices,
        cluster_of,
        loadings,
        drivers,
    }
}

/// A price shift applied to one symbol at one continuation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceShock {
    pub day: usize,
    pub symbol: usize,
    /// In units of the pair residual scale `noise_sd * sqrt(2)`.
    pub sigmas: f64,
}

impl SyntheticUniverse {
    pub fn series(&self) -> Vec<PriceSeries> {
        self.symbols
            .iter()
            .zip(&self.prices)
            .map(|(s, p)| {
                PriceSeries::new(s.clone(), self.dates.clone(), Series::new(p.clone()).expect("finite"))
            })
            .collect()
    }

    pub fn price_table(&self) -> PriceTable {
        PriceTable {
            calendar: self.dates.to_vec(),
            symbols: self.symbols.clone(),
            prices: (0..self.dates.len())
                .map(|t| self.prices.iter().map(|p| Some(p[t])).collect())
                .collect(),
        }
    }

    /// Pairs `(i, j)` with both symbols in the same cluster.
    pub fn same_cluster(&self, i: usize, j: usize) -> bool {
        matches!((self.cluster_of[i], self.cluster_of[j]), (Some(a), Some(b)) if a == b)
    }

    /// Continues the generating process for `n` business days after the
    /// window. Drivers and walks reflect off 1.0 to stay positive.
    pub fn continue_ticks(&self, seed: u64, n: usize, shocks: &[PriceShock]) -> Vec<Tick> {
        let mut r = rng(seed);
        let step = normal(self.spec.step_sd);
        let noise = normal(self.spec.noise_sd);
        let last = *self.dates.last().expect("non-empty universe");
        let dates = business_days_from(last.succ_opt().expect("date"), n);
        let mut drivers: Vec<f64> = self.drivers.iter().map(|d| d[d.len() - 1]).collect();
        let mut walks: Vec<f64> = self.prices.iter().map(|p| p[p.len() - 1]).collect();
        let reflect = |v: f64| if v < 1.0 { 2.0 - v } else { v };

        dates
            .into_iter()
            .enumerate()
            .map(|(day, date)| {
                for d in &mut drivers {
                    *d = reflect(*d + step.sample(&mut r));
                }
                let prices = (0..self.symbols.len()).map(|i| {
                    let mut p = match self.cluster_of[i] {
                        Some(c) => {
                            let (a, b) = self.loadings[i];
                            a + b * drivers[c] + noise.sample(&mut r)
                        }
                        None => {
                            walks[i] = reflect(walks[i] + step.sample(&mut r));
                            walks[i]
                        }
                    };
                    for s in shocks.iter().filter(|s| s.day == day && s.symbol == i) {
                        p += s.sigmas * self.spec.noise_sd * std::f64::consts::SQRT_2;
                    }
                    (self.symbols[i].clone(), reflect(p))
                });
                Tick::new(Some(date), prices.collect::<Vec<_>>())
            })
            .collect()
    }
}

/// A graph whose edge models are set from known factor loadings rather
/// than fitted, so in-band and shocked prices can be produced exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedGraphSpec {
    pub cluster_sizes: Vec<usize>,
    /// Probability that each within-cluster ordered pair becomes an edge.
    pub edge_keep: f64,
    pub noise_sd: f64,
}

impl PlantedGraphSpec {
    /// 64 nodes in 8 clusters of 8; roughly 400 edges.
    pub fn cluster_64() -> Self {
        Self {
            cluster_sizes: vec![8; 8],
            edge_keep: 0.9,
            noise_sd: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedGraph {
    pub graph: CointGraph,
    pub cluster_of: Vec<usize>,
    loadings: Vec<(f64, f64)>,
    noise_sd: f64,
}

/// Size of an injected shock, in residual standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shock {
    /// Moves every incident edge by at least this many sigmas.
    AtLeast(f64),
    /// Moves every incident edge by at most this many sigmas.
    AtMost(f64),
}

pub fn planted_graph(spec: &PlantedGraphSpec, seed: u64) -> PlantedGraph {
    let mut r = rng(seed);
    let n: usize = spec.cluster_sizes.iter().sum();
    let symbols = symbol_names(n);
    let meta = GraphMeta {
        epsilon: 0.05,
        window_id: format!("planted-{seed}"),
        window_len: 250,
    };
    let mut graph = CointGraph::with_symbols(&symbols, meta).expect("unique symbols");
    let mut cluster_of = Vec::with_capacity(n);
    for (c, &size) in spec.cluster_sizes.iter().enumerate() {
        cluster_of.extend(std::iter::repeat_n(c, size));
    }
    let loadings: Vec<(f64, f64)> = (0..n)
        .map(|_| (r.random_range(5.0..20.0), r.random_range(0.5..1.5)))
        .collect();
    for i in 0..n {
        for j in 0..n {
            if i == j || cluster_of[i] != cluster_of[j] || r.random::<f64>() >= spec.edge_keep {
                continue;
            }
            let (ai, bi) = loadings[i];
            let (aj, bj) = loadings[j];
            let beta1 = bj / bi;
            let model = CointModel {
                beta0: aj - beta1 * ai,
                beta1,
                resid_mean: 0.0,
                resid_std: spec.noise_sd * (1.0 + beta1 * beta1).sqrt(),
                pvalue: r.random_range(1e-6..0.04),
                adf_stat: r.random_range(-8.0..-3.0),
                window_id: format!("planted-{seed}"),
            };
            graph
                .add_edge(NodeId(i as u32), NodeId(j as u32), model)
                .expect("fresh pair");
        }
    }
    PlantedGraph {
        graph,
        cluster_of,
        loadings,
        noise_sd: spec.noise_sd,
    }
}

impl PlantedGraph {
    pub fn clusters(&self) -> usize {
        self.cluster_of.iter().max().map_or(0, |c| c + 1)
    }

    /// Prices on the latent factor plus uniform jitter of at most
    /// `jitter * noise_sd`. With `jitter <= 0.5` every edge deviation stays
    /// below `jitter * sqrt(2) < 1` sigma.
    pub fn calm_tick(&self, rng: &mut SynthRng, jitter: f64) -> Tick {
        let factors: Vec<f64> = (0..self.clusters())
            .map(|_| rng.random_range(80.0..120.0))
            .collect();
        let half = jitter * self.noise_sd;
        let prices = self.graph.nodes().iter().map(|n| {
            let i = n.id.index();
            let (a, b) = self.loadings[i];
            let e = if half > 0.0 { rng.random_range(-half..=half) } else { 0.0 };
            (n.symbol.clone(), a + b * factors[self.cluster_of[i]] + e)
        });
        Tick::new(None, prices.collect::<Vec<_>>())
    }

    /// Residual sigmas per unit price move of `node`, for each incident edge.
    fn sensitivities(&self, node: NodeId) -> Vec<(EdgeId, f64)> {
        let g = &self.graph;
        g.out_edges(node)
            .iter()
            .chain(g.in_edges(node))
            .map(|&id| {
                let e = g.edge(id).expect("incident");
                let coef = if e.src == node { e.model.beta1.abs() } else { 1.0 };
                (id, coef / e.model.resid_std)
            })
            .collect()
    }

    /// Shifts `node`'s price in `tick`; returns the signed shift applied.
    pub fn shock(&self, tick: &mut Tick, node: NodeId, size: Shock, upward: bool) -> f64 {
        let sens: Vec<f64> = self.sensitivities(node).into_iter().map(|(_, s)| s).collect();
        let magnitude = match size {
            _ if sens.is_empty() => self.noise_sd,
            Shock::AtLeast(m) => m / sens.iter().copied().fold(f64::INFINITY, f64::min),
            Shock::AtMost(m) => m / sens.iter().copied().fold(0.0, f64::max),
        };
        let delta = if upward { magnitude } else { -magnitude };
        let symbol = &self.graph.nodes()[node.index()].symbol;
        let price = tick.prices.get_mut(symbol).expect("tick covers node");
        // keep the shocked price positive; only downward moves can cross zero
        if *price + delta <= 0.0 {
            *price += magnitude;
            return magnitude;
        }
        *price += delta;
        delta
    }

    pub fn incident_edges(&self, node: NodeId) -> BTreeSet<EdgeId> {
        self.sensitivities(node).into_iter().map(|(e, _)| e).collect()
    }

    /// Shocks one node per cluster by at least `sigmas`, on top of a calm
    /// tick. Returns the tick, the shocked nodes and the exact set of edges
    /// that must break (every edge incident to a shocked node).
    pub fn turbulent_day(&self, rng: &mut SynthRng, sigmas: f64) -> (Tick, Vec<NodeId>, BTreeSet<EdgeId>) {
        let mut tick = self.calm_tick(rng, 0.5);
        let mut shocked = Vec::new();
        let mut expected = BTreeSet::new();
        for c in 0..self.clusters() {
            let members: Vec<usize> = (0..self.cluster_of.len())
                .filter(|&i| self.cluster_of[i] == c)
                .collect();
            let node = NodeId(members[rng.random_range(0..members.len())] as u32);
            let upward = rng.random::<bool>();
            self.shock(&mut tick, node, Shock::AtLeast(sigmas), upward);
            shocked.push(node);
            expected.extend(self.incident_edges(node));
        }
        (tick, shocked, expected)
    }
}

/// A cointegrated pair: fitting window plus continuation ticks.
#[derive(Debug, Clone)]
pub struct PairScenario {
    /// `[x, y]` over the fitting window.
    pub window: Vec<PriceSeries>,
    pub ticks: Vec<Tick>,
}

fn pair_base(r: &mut SynthRng, total: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = random_walk(r, total, 100.0, 1.0);
    lift(&mut x, 30.0);
    let noise = white_noise(r, total, 1.0);
    let y = x.iter().zip(noise).map(|(x, e)| 2.0 + 0.8 * x + e).collect();
    (x, y)
}

fn split_pair(x: Vec<f64>, y: Vec<f64>, window: usize) -> PairScenario {
    let dates = business_days_from(first_day(), x.len());
    let win_dates: Arc<[NaiveDate]> = dates[..window].into();
    let series = |s: &str, v: &[f64]| {
        PriceSeries::new(s, win_dates.clone(), Series::new(v[..window].to_vec()).expect("finite"))
    };
    let ticks = (window..x.len())
        .map(|t| {
            Tick::new(
                Some(dates[t]),
                [("X".to_string(), x[t]), ("Y".to_string(), y[t])],
            )
        })
        .collect();
    PairScenario {
        window: vec![series("X", &x), series("Y", &y)],
        ticks,
    }
}

/// `y = 2 + 0.8 x + e` throughout, except one tick right after the window
/// where `y` jumps by `shock_sigmas` residual sigmas and then returns.
pub fn transient_shock_pair(seed: u64, window: usize, after: usize, shock_sigmas: f64) -> PairScenario {
    let mut r = rng(seed);
    let (x, mut y) = pair_base(&mut r, window + after);
    if after > 0 {
        y[window] += shock_sigmas;
    }
    split_pair(x, y, window)
}

/// Same relation over the window; afterwards `y` wanders off as an
/// independent random walk.
pub fn regime_break_pair(seed: u64, window: usize, after: usize) -> PairScenario {
    let mut r = rng(seed);
    let (x, mut y) = pair_base(&mut r, window + after);
    let step = normal(1.0);
    for t in window..y.len() {
        y[t] = (y[t - 1] + step.sample(&mut r)).abs().max(1.0);
    }
    split_pair(x, y, window)
}
