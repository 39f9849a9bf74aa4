//! Cointegration-graph monitoring for equity pairs: pair scanning, a
//! vertex-centric superstep engine, and leash-break alerting.

pub mod alert;
pub mod coint;
pub mod engine;
pub mod graph;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod workers;

pub use workers::Workers;
