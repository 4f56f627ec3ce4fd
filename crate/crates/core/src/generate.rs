//! Graph generators and greedy support placement for experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::metric::CompatibleMetric;

/// Structural family of a generated graph.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Path { n: usize },
    Cycle { n: usize },
    Grid { rows: usize, cols: usize },
    Complete { n: usize },
    ErdosRenyi { n: usize, p: f64, seed: u64 },
}

/// Edge weights: one constant for all edges, or per-edge uniform draws.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant { value: f64 },
    Uniform { lo: f64, hi: f64, seed: u64 },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Constant { value: 1.0 }
    }
}

fn apply_weights(
    edges: Vec<(usize, usize)>,
    weights: &WeightSpec,
) -> Result<Vec<(usize, usize, f64)>> {
    match *weights {
        WeightSpec::Constant { value } => {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::GenerationFailed(format!(
                    "constant weight {value} must be positive"
                )));
            }
            Ok(edges.into_iter().map(|(u, v)| (u, v, value)).collect())
        }
        WeightSpec::Uniform { lo, hi, seed } => {
            let ordered = lo > 0.0 && hi >= lo;
            if !ordered {
                return Err(Error::GenerationFailed(format!(
                    "bad weight range [{lo}, {hi}]"
                )));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            Ok(edges
                .into_iter()
                .map(|(u, v)| (u, v, rng.gen_range(lo..=hi)))
                .collect())
        }
    }
}

/// Builds a connected graph of the requested family. Erdős–Rényi draws are resampled
/// up to 100 times until connected.
pub fn generate_graph(spec: &GraphSpec, weights: &WeightSpec) -> Result<WeightedGraph> {
    match *spec {
        GraphSpec::Path { n } => {
            if n < 1 {
                return Err(Error::GenerationFailed("path needs n ≥ 1".into()));
            }
            let edges = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
            WeightedGraph::new(n, &apply_weights(edges, weights)?)
        }
        GraphSpec::Cycle { n } => {
            if n < 3 {
                return Err(Error::GenerationFailed("cycle needs n ≥ 3".into()));
            }
            let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
            WeightedGraph::new(n, &apply_weights(edges, weights)?)
        }
        GraphSpec::Grid { rows, cols } => {
            if rows < 1 || cols < 1 {
                return Err(Error::GenerationFailed("grid needs rows, cols ≥ 1".into()));
            }
            let mut edges = Vec::new();
            let at = |r: usize, c: usize| r * cols + c;
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        edges.push((at(r, c), at(r, c + 1)));
                    }
                    if r + 1 < rows {
                        edges.push((at(r, c), at(r + 1, c)));
                    }
                }
            }
            WeightedGraph::new(rows * cols, &apply_weights(edges, weights)?)
        }
        GraphSpec::Complete { n } => {
            if n < 2 {
                return Err(Error::GenerationFailed("complete graph needs n ≥ 2".into()));
            }
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    edges.push((u, v));
                }
            }
            WeightedGraph::new(n, &apply_weights(edges, weights)?)
        }
        GraphSpec::ErdosRenyi { n, p, seed } => {
            if n < 2 || !(0.0..=1.0).contains(&p) {
                return Err(Error::GenerationFailed(format!(
                    "bad Erdős–Rényi parameters n={n}, p={p}"
                )));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            for _attempt in 0..100 {
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in (u + 1)..n {
                        if rng.gen::<f64>() < p {
                            edges.push((u, v));
                        }
                    }
                }
                match WeightedGraph::new(n, &apply_weights(edges, weights)?) {
                    Ok(g) => return Ok(g),
                    Err(Error::DisconnectedGraph(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::GenerationFailed(format!(
                "no connected Erdős–Rényi draw in 100 attempts (n={n}, p={p})"
            )))
        }
    }
}

/// Greedy farthest-point support placement.
///
/// The first vertex is the one farthest from a randomly probed vertex
/// (ties to the smallest index), then each step adds the vertex maximizing
/// its distance to the chosen set. On a path with j = 2 this selects the
/// two endpoints.
pub fn place_support(metric: &CompatibleMetric, j: usize, seed: u64) -> Result<Vec<usize>> {
    let n = metric.n();
    if j == 0 {
        return Err(Error::EmptySupport);
    }
    if j > n {
        return Err(Error::ConfigInvalid(format!(
            "support size {j} exceeds vertex count {n}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let probe = rng.gen_range(0..n);
    let first = (0..n)
        .max_by(|&a, &b| {
            metric
                .dist(probe, a)
                .total_cmp(&metric.dist(probe, b))
                .then(b.cmp(&a)) // ties to the smallest index
        })
        .expect("n ≥ 1");

    let mut chosen = vec![first];
    let mut in_set = vec![false; n];
    in_set[first] = true;
    while chosen.len() < j {
        let next = (0..n)
            .filter(|&v| !in_set[v])
            .max_by(|&a, &b| {
                let da = chosen
                    .iter()
                    .map(|&s| metric.dist(a, s))
                    .fold(f64::INFINITY, f64::min);
                let db = chosen
                    .iter()
                    .map(|&s| metric.dist(b, s))
                    .fold(f64::INFINITY, f64::min);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("j ≤ n");
        in_set[next] = true;
        chosen.push(next);
    }
    Ok(chosen)
}
