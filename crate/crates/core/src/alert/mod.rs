//! Node alertness over the cointegration graph.
//!
//! Per tick: refresh node prices, run one price-exchange superstep in which
//! every node checks each incident edge's model against the two endpoint
//! prices, fold the local alerts into a report, and ask a health function
//! for a global verdict. Broken edges can then be refit in isolation.

mod monitor;
mod program;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coint::{CointError, CointModel};
use crate::engine::EngineError;
use crate::graph::{CointGraph, EdgeId, GraphError, NodeId};

pub use monitor::{
    alert_tick, selective_recompute, tick_loop, Monitor, PriceHistory, RecomputePolicy,
    RecomputeSummary, Tick,
};
pub use program::{AlertProgram, AlertVertexState, EdgeCheck, PriceMsg};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlertError {
    #[error("model has zero residual spread (edge {edge:?})")]
    ZeroSigma { edge: Option<EdgeId> },
    #[error("invalid alert config: {0}")]
    InvalidConfig(String),
    #[error("recompute window cannot refit {edge}: {reason}")]
    InsufficientWindow { edge: EdgeId, reason: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Coint(#[from] CointError),
    #[error("tick failed at epoch {epoch}: {source}")]
    TickFailed {
        epoch: u64,
        #[source]
        source: Box<AlertError>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertConfig {
    /// Leash width in residual standard deviations.
    pub sigma_k: f64,
    /// Admission threshold reused when refitting broken edges.
    pub epsilon: f64,
    /// Global alert when more than this fraction of nodes is alerted.
    /// 0.2 is an arbitrary default.
    pub global_fraction: f64,
    pub max_supersteps: usize,
    /// Keep a node alerted once raised instead of re-evaluating every tick.
    pub latch: bool,
}

impl Default for AlertConfig {
    fn default() -> Self {
        Self {
            sigma_k: 3.0,
            epsilon: 0.05,
            global_fraction: 0.2,
            max_supersteps: 1,
            latch: false,
        }
    }
}

impl AlertConfig {
    pub fn validate(&self) -> Result<(), AlertError> {
        let bad = |m: &str| Err(AlertError::InvalidConfig(m.to_owned()));
        if !(self.sigma_k.is_finite() && self.sigma_k > 0.0) {
            return bad("sigma_k must be > 0");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.global_fraction) {
            return bad("global_fraction must lie in [0, 1]");
        }
        if self.max_supersteps == 0 {
            return bad("max_supersteps must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeashCheck {
    pub alert: bool,
    pub deviation_sigmas: f64,
}

/// Compares the observed pair against the model's residual band.
///
/// `x_price` feeds the model's source side and `y_price` its prediction
/// target. Alerts only when the deviation strictly exceeds `sigma_k`.
pub fn leash_check(
    model: &CointModel,
    x_price: f64,
    y_price: f64,
    sigma_k: f64,
) -> Result<LeashCheck, AlertError> {
    if model.resid_std <= 0.0 {
        return Err(AlertError::ZeroSigma { edge: None });
    }
    let residual = y_price - model.predict(x_price);
    let deviation_sigmas = (residual - model.resid_mean).abs() / model.resid_std;
    Ok(LeashCheck {
        alert: deviation_sigmas > sigma_k,
        deviation_sigmas,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrokenEdge {
    pub edge: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub deviation: f64,
}

/// One epoch of monitoring output; serialized as one JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertReport {
    pub epoch: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
    pub node_alerts: Vec<NodeId>,
    pub broken_edges: Vec<BrokenEdge>,
    pub global_alert: bool,
    pub edges_checked: usize,
    pub edges_skipped_stale: usize,
    pub edges_total: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recompute: Option<RecomputeSummary>,
}

impl AlertReport {
    /// Edges that passed every check this epoch.
    pub fn surviving_edges(&self) -> usize {
        self.edges_total - self.broken_edges.len()
    }
}

/// Turns the set of local alerts into a global verdict.
pub trait HealthFunction: Send + Sync {
    fn global_alert(&self, graph: &CointGraph, report: &AlertReport, config: &AlertConfig) -> bool;
}

/// Raises a global alert when the alerted fraction of nodes exceeds
/// `config.global_fraction`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlertedFraction;

impl HealthFunction for AlertedFraction {
    fn global_alert(&self, graph: &CointGraph, report: &AlertReport, config: &AlertConfig) -> bool {
        if graph.node_count() == 0 {
            return false;
        }
        report.node_alerts.len() as f64 / graph.node_count() as f64 > config.global_fraction
    }
}

pub fn global_reduce(graph: &CointGraph, report: &AlertReport, config: &AlertConfig) -> bool {
    AlertedFraction.global_alert(graph, report, config)
}
