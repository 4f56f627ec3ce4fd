//! Shared instance generators for the integration and acceptance suites.

use heatsparse::bounds::{max_admissible_time, GraphConstants, SupportProfile};
use heatsparse::certificate::SignPattern;
use heatsparse::generate::place_support;
use heatsparse::graph::WeightedGraph;
use heatsparse::metric::CompatibleMetric;
use heatsparse::spectral::SpectralData;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Random connected graph: a random spanning tree plus extra edges with the
/// given probability, weights uniform in [0.5, 1.5].
pub fn random_connected_graph(n: usize, extra_prob: f64, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        edges.push((parent, v, rng.gen_range(0.5..=1.5)));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            let tree_edge = edges.iter().any(|&(a, b, _)| (a, b) == (u, v));
            if !tree_edge && rng.gen::<f64>() < extra_prob {
                edges.push((u, v, rng.gen_range(0.5..=1.5)));
            }
        }
    }
    WeightedGraph::new(n, &edges).expect("spanning tree keeps the graph connected")
}

/// A fully resolved random instance: graph, metric, spectrum, support,
/// signs, magnitudes and the admissible-time bound.
pub struct TestInstance {
    pub graph: WeightedGraph,
    pub spectral: SpectralData,
    pub constants: GraphConstants,
    pub support: Vec<usize>,
    pub profile: SupportProfile,
    pub signs: SignPattern,
    pub coefficients: Vec<f64>,
    pub t_star: f64,
}

pub fn random_instance(seed: u64, min_n: usize, max_n: usize, max_j: usize) -> TestInstance {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = rng.gen_range(min_n..=max_n);
    let extra = rng.gen_range(0.02..0.25);
    let graph = random_connected_graph(n, extra, rng.gen());
    let metric = CompatibleMetric::for_graph(&graph);
    let spectral = SpectralData::decompose(&graph.laplacian()).unwrap();
    let constants = GraphConstants::from_parts(&spectral, &metric).unwrap();

    let j = rng.gen_range(1..=max_j.min(n));
    let support = place_support(&metric, j, rng.gen()).unwrap();
    let profile = SupportProfile::from_support(&metric, &support).unwrap();

    let coefficients: Vec<f64> = (0..j)
        .map(|_| {
            let magnitude = rng.gen_range(0.5..=2.0);
            if rng.gen::<bool>() {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect();
    let signs = SignPattern::of_nonzero(&coefficients).unwrap();
    let t_star = max_admissible_time(&constants, &profile);

    TestInstance {
        graph,
        spectral,
        constants,
        support,
        profile,
        signs,
        coefficients,
        t_star,
    }
}

impl TestInstance {
    /// The sparse signal as a dense vector.
    pub fn g_true(&self) -> nalgebra::DVector<f64> {
        let mut g = nalgebra::DVector::zeros(self.graph.n_vertices());
        for (slot, &v) in self.support.iter().enumerate() {
            g[v] = self.coefficients[slot];
        }
        g
    }
}
