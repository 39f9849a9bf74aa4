use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{io_err, PipelineError};
use crate::alert::AlertReport;
use crate::graph::CointGraph;

pub fn save_graph(graph: &CointGraph, path: &Path) -> Result<(), PipelineError> {
    fs::write(path, graph.to_json()).map_err(io_err(path))
}

/// Reads a graph file, validating every model and the adjacency structure.
pub fn load_graph(path: &Path) -> Result<CointGraph, PipelineError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(CointGraph::from_json(&text)?)
}

/// One JSON object per line, in the order given.
pub fn write_reports<W: Write>(mut out: W, reports: &[AlertReport]) -> std::io::Result<()> {
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_reports(path: &Path) -> Result<Vec<AlertReport>, PipelineError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let report = serde_json::from_str(&line).map_err(|e| PipelineError::Parse {
            path: path.display().to_string(),
            line: i as u64 + 1,
            message: e.to_string(),
        })?;
        out.push(report);
    }
    Ok(out)
}
