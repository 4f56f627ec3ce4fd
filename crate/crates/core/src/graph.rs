//! Finite edge-weighted graphs and their Laplacians.
//!
//! A graph is a vertex set `{0, .., n-1}` together with undirected edges
//! carrying strictly positive weights `b(u, v)`. Construction validates the
//! edge list and requires the graph to be connected; everything downstream
//! (heat semigroup, kernel bounds, recovery) assumes connectivity.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One undirected edge, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// A connected, finite, edge-weighted graph.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Builds and validates a graph from an edge list.
    ///
    /// Rejects self-loops, duplicate unordered pairs, non-positive weights
    /// and disconnected vertex sets.
    pub fn new(n_vertices: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::GenerationFailed(
                "graph needs at least one vertex".into(),
            ));
        }
        let n = n_vertices;
        let mut canonical = Vec::with_capacity(edges.len());
        let mut seen = std::collections::HashSet::new();
        for &(u, v, weight) in edges {
            if u >= n {
                return Err(Error::IndexOutOfRange { index: u, n });
            }
            if v >= n {
                return Err(Error::IndexOutOfRange { index: v, n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !weight.is_finite() || weight <= 0.0 {
                return Err(Error::NonPositiveWeight { u, v, weight });
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if !seen.insert((a, b)) {
                return Err(Error::DuplicateEdge { u: a, v: b });
            }
            canonical.push(Edge { u: a, v: b, weight });
        }

        let mut neighbors = vec![Vec::new(); n];
        for e in &canonical {
            neighbors[e.u].push((e.v, e.weight));
            neighbors[e.v].push((e.u, e.weight));
        }

        // connectivity by BFS from vertex 0
        let mut visited = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        visited[0] = true;
        queue.push_back(0usize);
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &neighbors[x] {
                if !visited[y] {
                    visited[y] = true;
                    queue.push_back(y);
                }
            }
        }
        if let Some(missing) = visited.iter().position(|&v| !v) {
            return Err(Error::DisconnectedGraph(missing));
        }

        Ok(Self {
            n,
            edges: canonical,
            neighbors,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Number of incident edges.
    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.neighbors[v]
    }

    /// Weight of the edge `{u, v}`, or `None` if absent.
    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.neighbors[u]
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, b)| b)
    }

    /// The graph Laplacian realizing the Dirichlet form
    /// `<Δf, f> = -Σ_{edges} b(x,y) |f(x)-f(y)|²`.
    pub fn laplacian(&self) -> LaplacianMatrix {
        let mut m = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            m[(e.u, e.v)] = e.weight;
            m[(e.v, e.u)] = e.weight;
            m[(e.u, e.u)] -= e.weight;
            m[(e.v, e.v)] -= e.weight;
        }
        LaplacianMatrix { matrix: m }
    }
}

/// Negative-semidefinite graph Laplacian. Off-diagonal entries are the edge
/// weights, diagonal entries the negated weighted degrees, so row sums vanish
/// and the constant vector spans the kernel on a connected graph.
#[derive(Debug, Clone)]
pub struct LaplacianMatrix {
    matrix: DMatrix<f64>,
}

impl LaplacianMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// `<Δf, f>` evaluated through the matrix.
    pub fn quadratic_form(&self, f: &DVector<f64>) -> f64 {
        (&self.matrix * f).dot(f)
    }
}
