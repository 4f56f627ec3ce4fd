//! Line-oriented text format for graphs, with an optional metric override.
//!
//! ```text
//! graph <N>
//! <u> <v> <b>        one line per edge
//! metric             optional section
//! <d 1 1> ... <d 1 N>
//! ...                N rows of N distances
//! ```

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::metric::CompatibleMetric;

/// Parsed graph plus the metric override when a `metric` section is present.
#[derive(Debug)]
pub struct GraphFile {
    pub graph: WeightedGraph,
    pub metric: Option<CompatibleMetric>,
}

impl GraphFile {
    /// The metric override if supplied, otherwise the derived metric.
    pub fn metric_or_default(&self) -> CompatibleMetric {
        match &self.metric {
            Some(m) => m.clone(),
            None => CompatibleMetric::for_graph(&self.graph),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::GraphFileParse {
        line,
        msg: msg.into(),
    }
}

/// Parses the text format. Line numbers in errors are 1-based.
pub fn parse_graph(text: &str) -> Result<GraphFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (lineno, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("graph") {
        return Err(parse_err(lineno, "expected header `graph <N>`"));
    }
    let n: usize = parts
        .next()
        .ok_or_else(|| parse_err(lineno, "missing vertex count"))?
        .parse()
        .map_err(|_| parse_err(lineno, "vertex count is not an integer"))?;
    if parts.next().is_some() {
        return Err(parse_err(lineno, "trailing tokens after vertex count"));
    }

    let mut edges = Vec::new();
    let mut metric_rows: Vec<Vec<f64>> = Vec::new();
    let mut in_metric = false;
    let mut last_line = lineno;
    for (lineno, line) in lines {
        last_line = lineno;
        if !in_metric {
            if line == "metric" {
                in_metric = true;
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(lineno, "expected `<u> <v> <b>`"));
            }
            let u: usize = fields[0]
                .parse()
                .map_err(|_| parse_err(lineno, "vertex index is not an integer"))?;
            let v: usize = fields[1]
                .parse()
                .map_err(|_| parse_err(lineno, "vertex index is not an integer"))?;
            let b: f64 = fields[2]
                .parse()
                .map_err(|_| parse_err(lineno, "weight is not a number"))?;
            edges.push((u, v, b));
        } else {
            if metric_rows.len() == n {
                return Err(parse_err(lineno, format!("more than {n} metric rows")));
            }
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| parse_err(lineno, "metric entry is not a number"))?;
            if row.len() != n {
                return Err(parse_err(
                    lineno,
                    format!("metric row has {} entries, expected {n}", row.len()),
                ));
            }
            metric_rows.push(row);
        }
    }

    let graph = WeightedGraph::new(n, &edges)?;
    let metric = if in_metric {
        if metric_rows.len() != n {
            return Err(parse_err(
                last_line,
                format!(
                    "metric section has {} rows, expected {n}",
                    metric_rows.len()
                ),
            ));
        }
        let flat: Vec<f64> = metric_rows.into_iter().flatten().collect();
        let dist = DMatrix::from_row_slice(n, n, &flat);
        Some(CompatibleMetric::from_matrix(&graph, dist)?)
    } else {
        None
    };

    Ok(GraphFile { graph, metric })
}

/// Renders a graph (and optionally its metric) in the text format.
pub fn write_graph(graph: &WeightedGraph, metric: Option<&CompatibleMetric>) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "graph {}", graph.n_vertices()).unwrap();
    for e in graph.edges() {
        writeln!(out, "{} {} {}", e.u, e.v, e.weight).unwrap();
    }
    if let Some(m) = metric {
        writeln!(out, "metric").unwrap();
        let n = graph.n_vertices();
        for x in 0..n {
            let row: Vec<String> = (0..n).map(|y| format!("{}", m.dist(x, y))).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
    out
}

pub fn read_graph_path(path: &std::path::Path) -> Result<GraphFile> {
    let text = std::fs::read_to_string(path)?;
    parse_graph(&text)
}
