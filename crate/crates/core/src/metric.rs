//! Distances compatible with the edge weights.
//!
//! A metric `d` is compatible with the weight `b` when it is geodesic on the
//! graph and every vertex satisfies `Σ_{y ~ x} b(x,y) d(x,y)² ≤ 1`. The
//! built-in construction assigns each edge the length
//! `ℓ(u,v) = (b(u,v) · max(deg u, deg v))^{-1/2}` and closes it under
//! shortest paths. The per-vertex sum is then at most `Σ_y 1/deg(x) = 1`,
//! and the shortest-path closure can only shrink distances.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// All-pairs geodesic distances satisfying the weight-compatibility bound.
#[derive(Debug, Clone)]
pub struct CompatibleMetric {
    dist: DMatrix<f64>,
    edge_lengths: Vec<f64>,
}

impl CompatibleMetric {
    /// Derives a compatible metric from the graph weights via the local
    /// degree rule.
    pub fn for_graph(g: &WeightedGraph) -> Self {
        let n = g.n_vertices();
        let edge_lengths: Vec<f64> = g
            .edges()
            .iter()
            .map(|e| {
                let deg = g.degree(e.u).max(g.degree(e.v)) as f64;
                1.0 / (e.weight * deg).sqrt()
            })
            .collect();
        let dist = shortest_path_closure(n, g, &edge_lengths);
        Self { dist, edge_lengths }
    }

    /// Wraps a caller-supplied distance matrix, validating every invariant:
    /// metric axioms, geodesic closure over the graph edges, and the
    /// per-vertex compatibility sum.
    pub fn from_matrix(g: &WeightedGraph, dist: DMatrix<f64>) -> Result<Self> {
        let n = g.n_vertices();
        if dist.nrows() != n || dist.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: dist.nrows(),
            });
        }
        for x in 0..n {
            if dist[(x, x)] != 0.0 {
                return Err(Error::MetricDiagonalViolation(x));
            }
            for y in (x + 1)..n {
                if dist[(x, y)] != dist[(y, x)] {
                    return Err(Error::MetricNotSymmetric { x, y });
                }
                if !dist[(x, y)].is_finite() || dist[(x, y)] <= 0.0 {
                    return Err(Error::MetricNotPositive {
                        x,
                        y,
                        value: dist[(x, y)],
                    });
                }
            }
        }
        let scale = dist.amax();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if dist[(x, y)] > dist[(x, z)] + dist[(z, y)] + 1e-12 * scale {
                        return Err(Error::TriangleInequalityViolation { x, y, z });
                    }
                }
            }
        }
        let edge_lengths: Vec<f64> = g.edges().iter().map(|e| dist[(e.u, e.v)]).collect();
        let closure = shortest_path_closure(n, g, &edge_lengths);
        for x in 0..n {
            for y in 0..n {
                if (dist[(x, y)] - closure[(x, y)]).abs() > 1e-9 * scale.max(1.0) {
                    return Err(Error::MetricNotGeodesic { x, y });
                }
            }
        }
        let m = Self { dist, edge_lengths };
        m.check_compatibility(g)?;
        Ok(m)
    }

    fn check_compatibility(&self, g: &WeightedGraph) -> Result<()> {
        for x in 0..g.n_vertices() {
            let sum: f64 = g
                .neighbors(x)
                .iter()
                .map(|&(y, b)| b * self.dist[(x, y)].powi(2))
                .sum();
            if sum > 1.0 + 1e-12 {
                return Err(Error::CompatibilityExceeded { vertex: x, sum });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.dist.nrows()
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist[(x, y)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.dist
    }

    /// Edge lengths in the same order as `WeightedGraph::edges`.
    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    /// Minimum pairwise distance within a support set. Returns `+∞` for
    /// fewer than two vertices, which makes every separation-dependent
    /// bound vacuous for single spikes.
    pub fn min_separation(&self, support: &[usize]) -> f64 {
        let mut best = f64::INFINITY;
        for (i, &x) in support.iter().enumerate() {
            for &y in &support[i + 1..] {
                if x != y {
                    best = best.min(self.dist[(x, y)]);
                }
            }
        }
        best
    }

    /// The smallest distance between any two vertices of the graph (ζ).
    pub fn min_vertex_distance(&self) -> Result<f64> {
        let n = self.n();
        if n < 2 {
            return Err(Error::SingletonGraph);
        }
        let mut best = f64::INFINITY;
        for x in 0..n {
            for y in (x + 1)..n {
                best = best.min(self.dist[(x, y)]);
            }
        }
        Ok(best)
    }
}

/// Floyd–Warshall over the given edge lengths.
fn shortest_path_closure(n: usize, g: &WeightedGraph, edge_lengths: &[f64]) -> DMatrix<f64> {
    let mut d = DMatrix::from_element(n, n, f64::INFINITY);
    for x in 0..n {
        d[(x, x)] = 0.0;
    }
    for (e, &len) in g.edges().iter().zip(edge_lengths) {
        if len < d[(e.u, e.v)] {
            d[(e.u, e.v)] = len;
            d[(e.v, e.u)] = len;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[(i, k)];
            if !dik.is_finite() {
                continue;
            }
            for j in 0..n {
                let through = dik + d[(k, j)];
                if through < d[(i, j)] {
                    d[(i, j)] = through;
                }
            }
        }
    }
    d
}
