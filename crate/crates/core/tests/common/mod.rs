//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code paths being checked.

#![allow(dead_code)]

use std::collections::BTreeSet;

use leashwatch::alert::Tick;
use leashwatch::graph::{CointGraph, EdgeId, NodeId};

/// Slope and intercept from the centred normal equations, accumulated in
/// extended precision with Neumaier summation.
pub fn normal_equations(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = neumaier(x.iter().copied()) / n;
    let my = neumaier(y.iter().copied()) / n;
    let sxy = neumaier(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = neumaier(x.iter().map(|a| (a - mx) * (a - mx)));
    let b1 = sxy / sxx;
    (my - b1 * mx, b1)
}

pub fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Applies the leash rule to every edge directly, one at a time.
pub fn full_scan_broken(graph: &CointGraph, tick: &Tick, sigma_k: f64) -> BTreeSet<EdgeId> {
    let price = |n: NodeId| tick.prices.get(&graph.nodes()[n.index()].symbol).copied();
    graph
        .edges()
        .filter(|e| {
            let (Some(x), Some(y)) = (price(e.src), price(e.dst)) else {
                return false;
            };
            let m = &e.model;
            let u = y - (m.beta0 + m.beta1 * x);
            (u - m.resid_mean).abs() / m.resid_std > sigma_k
        })
        .map(|e| e.id)
        .collect()
}

/// Dense `n x n` matrix of edge ids, `m[src][dst]`.
pub fn adjacency_matrix(n: usize, edges: &[(usize, usize, u32)]) -> Vec<Vec<Option<u32>>> {
    let mut m = vec![vec![None; n]; n];
    for &(s, d, id) in edges {
        m[s][d] = Some(id);
    }
    m
}

/// `(neighbor, edge)` pairs for `node` read off the matrix, both directions.
pub fn matrix_neighbors(m: &[Vec<Option<u32>>], node: usize) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    for (other, row) in m.iter().enumerate() {
        if let Some(id) = m[node][other] {
            out.push((other, id));
        }
        if let Some(id) = row[node] {
            out.push((other, id));
        }
    }
    out.sort();
    out
}

pub fn graph_edges(g: &CointGraph) -> Vec<(usize, usize, u32)> {
    g.edges().map(|e| (e.src.index(), e.dst.index(), e.id.0)).collect()
}

/// 64-bit LCG used to produce the frozen reference series; the same stream
/// was fed to an external ADF implementation to record the values below.
pub struct Lcg(u64);

impl Lcg {
    pub fn new() -> Self {
        Lcg(12345)
    }

    pub fn uniform(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }
}

/// AR(1) series with coefficient 0.7 (150 points) followed, on the same
/// stream, by a 200-point random walk.
pub fn reference_series() -> (Vec<f64>, Vec<f64>) {
    let mut g = Lcg::new();
    let mut ar = Vec::with_capacity(150);
    let mut prev = 0.0;
    for _ in 0..150 {
        prev = 0.7 * prev + g.uniform();
        ar.push(prev);
    }
    let mut rw = Vec::with_capacity(200);
    let mut level = 0.0;
    for _ in 0..200 {
        level += g.uniform();
        rw.push(level);
    }
    (ar, rw)
}

pub struct AdfReference {
    pub which: &'static str,
    pub lags: usize,
    pub statistic: f64,
    pub pvalue: f64,
    pub nobs: usize,
}

/// Constant-only ADF with fixed lags, as reported by statsmodels 0.14.
pub const ADF_REFERENCE: [AdfReference; 6] = [
    AdfReference { which: "ar", lags: 0, statistic: -5.410504172395092, pvalue: 3.2193e-06, nobs: 149 },
    AdfReference { which: "ar", lags: 3, statistic: -4.4587884608369315, pvalue: 0.00023325, nobs: 146 },
    AdfReference { which: "ar", lags: 8, statistic: -3.714882233400413, pvalue: 0.0039086, nobs: 141 },
    AdfReference { which: "rw", lags: 0, statistic: -1.7527754380710165, pvalue: 0.40414636, nobs: 199 },
    AdfReference { which: "rw", lags: 2, statistic: -1.9472129245709346, pvalue: 0.31018675, nobs: 197 },
    AdfReference { which: "rw", lags: 14, statistic: -1.226396336713798, pvalue: 0.66213887, nobs: 185 },
];
