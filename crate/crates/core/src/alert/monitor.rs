use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    AlertConfig, AlertError, AlertProgram, AlertReport, AlertVertexState, AlertedFraction,
    BrokenEdge, HealthFunction,
};
use crate::coint::{admits, coint_fit, CointError, PriceSeries};
use crate::engine::{run_supersteps, CapPolicy, InitialMessages, RunOptions};
use crate::graph::{AlertState, CointGraph, EdgeId, NodeId};
use crate::stats::{Series, StatsError};
use crate::workers::Workers;

/// Prices observed at one time step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tick {
    pub date: Option<NaiveDate>,
    pub prices: BTreeMap<String, f64>,
}

impl Tick {
    pub fn new(date: Option<NaiveDate>, prices: impl IntoIterator<Item = (String, f64)>) -> Self {
        Self {
            date,
            prices: prices.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecomputePolicy {
    #[default]
    Off,
    OnBreak,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RecomputeSummary {
    /// Edges refit and kept, with the model replaced.
    pub refit: Vec<EdgeId>,
    /// Edges whose pair no longer passes the admission test.
    pub removed: Vec<EdgeId>,
}

/// Rolling, forward-filled price rows used to cut recompute windows.
#[derive(Debug, Clone)]
pub struct PriceHistory {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
    dates: VecDeque<NaiveDate>,
    rows: VecDeque<Vec<f64>>,
    capacity: usize,
}

impl PriceHistory {
    /// Seeds the history from aligned series (typically the fitting
    /// window), keeping at most `capacity` rows.
    pub fn from_series(series: &[PriceSeries], capacity: usize) -> Self {
        let capacity = capacity.max(1);
        let symbols: Vec<String> = series.iter().map(|s| s.symbol.clone()).collect();
        let index = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let len = series.first().map_or(0, |s| s.len());
        let start = len.saturating_sub(capacity);
        let mut dates = VecDeque::with_capacity(capacity);
        let mut rows = VecDeque::with_capacity(capacity);
        for t in start..len {
            dates.push_back(series[0].dates[t]);
            rows.push_back(series.iter().map(|s| s.values.values()[t]).collect());
        }
        Self {
            symbols,
            index,
            dates,
            rows,
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Appends a row; symbols missing from the tick carry their last value.
    pub fn push(&mut self, tick: &Tick) {
        let Some(prev) = self.rows.back() else { return };
        let mut row = prev.clone();
        for (symbol, price) in &tick.prices {
            if let Some(&i) = self.index.get(symbol) {
                row[i] = *price;
            }
        }
        let date = tick
            .date
            .or_else(|| self.dates.back().and_then(|d| d.succ_opt()))
            .unwrap_or(NaiveDate::MIN);
        if self.rows.len() == self.capacity {
            self.rows.pop_front();
            self.dates.pop_front();
        }
        self.rows.push_back(row);
        self.dates.push_back(date);
    }

    /// Trailing `len` rows for one symbol.
    fn series(&self, symbol: &str, len: usize, dates: &Arc<[NaiveDate]>) -> Option<PriceSeries> {
        let i = *self.index.get(symbol)?;
        let start = self.rows.len().checked_sub(len)?;
        let values: Vec<f64> = self.rows.iter().skip(start).map(|r| r[i]).collect();
        Some(PriceSeries::new(symbol, dates.clone(), Series::new(values).ok()?))
    }

    /// Trailing window of `len` rows for the given symbols.
    pub fn window(&self, symbols: &[&str], len: usize) -> Vec<PriceSeries> {
        let start = self.rows.len().saturating_sub(len);
        let dates: Arc<[NaiveDate]> = self.dates.iter().skip(start).copied().collect();
        let len = dates.len();
        symbols
            .iter()
            .filter_map(|s| self.series(s, len, &dates))
            .collect()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }
}

fn run_options(config: &AlertConfig) -> RunOptions {
    RunOptions {
        max_supersteps: config.max_supersteps,
        cap_policy: CapPolicy::AbsorbAtBarrier,
    }
}

/// One monitoring cycle: update prices, exchange and check, integrate.
///
/// Returns the next graph version (prices, alert states and broken flags
/// applied) together with the epoch's report.
pub fn alert_tick(
    graph: &CointGraph,
    tick: &Tick,
    config: &AlertConfig,
    health: &dyn HealthFunction,
    workers: &Workers,
) -> Result<(CointGraph, AlertReport), AlertError> {
    config.validate()?;
    if let Some(e) = graph.edges().find(|e| e.model.resid_std <= 0.0) {
        return Err(AlertError::ZeroSigma { edge: Some(e.id) });
    }
    let updated = graph.update_prices(tick.prices.iter().map(|(s, p)| (s.as_str(), *p)))?;
    let program = AlertProgram {
        sigma_k: config.sigma_k,
    };
    let (states, _) = run_supersteps(
        &updated,
        &program,
        &run_options(config),
        InitialMessages::Empty,
        workers,
    )?;

    let mut report = assemble(&updated, &states);
    report.date = tick.date.map(|d| d.to_string());
    report.global_alert = health.global_alert(&updated, &report, config);

    let mut next = updated;
    let epoch = next.epoch();
    for (i, s) in states.iter().enumerate() {
        let node = next.node_mut(NodeId(i as u32));
        let latched = config.latch && node.alert_state == AlertState::Alerted;
        let state = if s.alerted || latched {
            AlertState::Alerted
        } else {
            AlertState::Clear
        };
        node.alert_state = state;
        node.alert_history.insert(epoch, state);
    }
    for b in &report.broken_edges {
        next.edge_mut(b.edge)?.broken = true;
    }
    Ok((next, report))
}

fn assemble(graph: &CointGraph, states: &[AlertVertexState]) -> AlertReport {
    let mut broken: BTreeMap<EdgeId, f64> = BTreeMap::new();
    let mut node_alerts = Vec::new();
    let (mut checked, mut skipped) = (0, 0);
    for (i, s) in states.iter().enumerate() {
        checked += s.checked;
        skipped += s.skipped_stale;
        if s.alerted {
            node_alerts.push(NodeId(i as u32));
        }
        for c in &s.broken {
            broken.entry(c.edge).or_insert(c.deviation);
        }
    }
    let broken_edges = broken
        .into_iter()
        .map(|(edge, deviation)| {
            let e = graph.edge(edge).expect("broken edge exists");
            BrokenEdge {
                edge,
                src: e.src,
                dst: e.dst,
                deviation,
            }
        })
        .collect();
    AlertReport {
        epoch: graph.epoch(),
        date: None,
        node_alerts,
        broken_edges,
        global_alert: false,
        edges_checked: checked,
        edges_skipped_stale: skipped,
        edges_total: graph.edge_count(),
        recompute: None,
    }
}

/// Refits only the listed edges on `window`; edges that still pass the
/// admission test get the new model, the rest are removed. Other edges are
/// left untouched.
pub fn selective_recompute(
    graph: &CointGraph,
    broken: &[EdgeId],
    window: &[PriceSeries],
    config: &AlertConfig,
    workers: &Workers,
) -> Result<(CointGraph, RecomputeSummary), AlertError> {
    let mut summary = RecomputeSummary::default();
    if broken.is_empty() {
        return Ok((graph.clone(), summary));
    }
    let by_symbol: HashMap<&str, &PriceSeries> =
        window.iter().map(|s| (s.symbol.as_str(), s)).collect();

    let mut jobs = Vec::with_capacity(broken.len());
    for &id in broken {
        let edge = graph.edge(id)?;
        let lookup = |n: NodeId| {
            let symbol = graph.nodes()[n.index()].symbol.as_str();
            by_symbol
                .get(symbol)
                .copied()
                .ok_or_else(|| AlertError::InsufficientWindow {
                    edge: id,
                    reason: format!("no prices for {symbol}"),
                })
        };
        jobs.push((id, lookup(edge.src)?, lookup(edge.dst)?));
    }
    jobs.sort_by_key(|(id, _, _)| *id);
    jobs.dedup_by_key(|(id, _, _)| *id);

    let fits: Vec<_> = workers.install(|| {
        jobs.par_iter()
            .map(|(_, x, y)| coint_fit(x, y, None))
            .collect()
    });

    let mut next = graph.clone();
    for ((id, _, _), fit) in jobs.iter().zip(fits) {
        match fit {
            Ok(model) if admits(&model, config.epsilon) => {
                let edge = next.edge_mut(*id)?;
                edge.model = model;
                edge.broken = false;
                summary.refit.push(*id);
            }
            Ok(_)
            | Err(CointError::DegeneratePair)
            | Err(CointError::Stats(StatsError::SingularDesign))
            | Err(CointError::Stats(StatsError::DegenerateRegressor)) => summary.removed.push(*id),
            Err(e) => {
                return Err(AlertError::InsufficientWindow {
                    edge: *id,
                    reason: e.to_string(),
                })
            }
        }
    }
    next.remove_in_place(&summary.removed)?;
    Ok((next, summary))
}

/// Drives the tick loop one step at a time, holding the current graph
/// version and, when recomputation is enabled, the rolling price history.
pub struct Monitor {
    graph: CointGraph,
    config: AlertConfig,
    history: Option<PriceHistory>,
    policy: RecomputePolicy,
    health: Box<dyn HealthFunction>,
    workers: Workers,
}

impl Monitor {
    pub fn new(graph: CointGraph, config: AlertConfig, workers: Workers) -> Result<Self, AlertError> {
        config.validate()?;
        Ok(Self {
            graph,
            config,
            history: None,
            policy: RecomputePolicy::Off,
            health: Box::new(AlertedFraction),
            workers,
        })
    }

    /// Enables refitting broken edges on the trailing window of `history`.
    pub fn with_recompute(mut self, history: PriceHistory) -> Self {
        self.history = Some(history);
        self.policy = RecomputePolicy::OnBreak;
        self
    }

    pub fn with_health(mut self, health: Box<dyn HealthFunction>) -> Self {
        self.health = health;
        self
    }

    pub fn graph(&self) -> &CointGraph {
        &self.graph
    }

    pub fn into_graph(self) -> CointGraph {
        self.graph
    }

    pub fn step(&mut self, tick: &Tick) -> Result<AlertReport, AlertError> {
        let epoch = self.graph.epoch() + 1;
        self.try_step(tick).map_err(|e| AlertError::TickFailed {
            epoch,
            source: Box::new(e),
        })
    }

    fn try_step(&mut self, tick: &Tick) -> Result<AlertReport, AlertError> {
        let (mut next, mut report) =
            alert_tick(&self.graph, tick, &self.config, self.health.as_ref(), &self.workers)?;
        if let Some(history) = &mut self.history {
            history.push(tick);
        }
        if self.policy == RecomputePolicy::OnBreak && !report.broken_edges.is_empty() {
            let history = self.history.as_ref().expect("recompute requires history");
            let len = match next.meta().window_len {
                0 => history.len(),
                w => w,
            };
            let broken: Vec<EdgeId> = report.broken_edges.iter().map(|b| b.edge).collect();
            let mut symbols: Vec<&str> = Vec::new();
            for b in &report.broken_edges {
                for n in [b.src, b.dst] {
                    symbols.push(next.nodes()[n.index()].symbol.as_str());
                }
            }
            symbols.sort_unstable();
            symbols.dedup();
            let window = history.window(&symbols, len);
            if window.first().is_some_and(|s| s.len() < len) {
                return Err(AlertError::InsufficientWindow {
                    edge: broken[0],
                    reason: format!("history holds {} of {len} rows", window[0].len()),
                });
            }
            let (refit, summary) =
                selective_recompute(&next, &broken, &window, &self.config, &self.workers)?;
            next = refit;
            report.recompute = Some(summary);
        }
        self.graph = next;
        Ok(report)
    }
}

/// Runs every tick in order and returns the final graph and the reports.
pub fn tick_loop(
    graph: CointGraph,
    ticks: impl IntoIterator<Item = Tick>,
    config: &AlertConfig,
    policy: RecomputePolicy,
    history: Option<PriceHistory>,
    workers: &Workers,
) -> Result<(CointGraph, Vec<AlertReport>), AlertError> {
    let mut monitor = Monitor::new(graph, config.clone(), workers.clone())?;
    if policy == RecomputePolicy::OnBreak {
        let history = history.ok_or_else(|| {
            AlertError::InvalidConfig("recompute on break needs a price history".into())
        })?;
        monitor = monitor.with_recompute(history);
    }
    let reports = ticks
        .into_iter()
        .map(|t| monitor.step(&t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((monitor.into_graph(), reports))
}
