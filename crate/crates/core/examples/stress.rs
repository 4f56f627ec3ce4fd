//! Solver behavior on larger instances: run with
//! `cargo run --release -p heatsparse --example stress`.

use heatsparse::bounds::{max_admissible_time, GraphConstants, SupportProfile};
use heatsparse::generate::{generate_graph, place_support, GraphSpec, WeightSpec};
use heatsparse::heat::HeatOperator;
use heatsparse::metric::CompatibleMetric;
use heatsparse::recovery::{solve, sphere_noise, Observation, SolverOptions};
use heatsparse::spectral::SpectralData;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::time::Instant;

fn main() {
    for (label, spec, j, eps, frac) in [
        (
            "grid 10x10, eps 0.3, 0.99T*",
            GraphSpec::Grid { rows: 10, cols: 10 },
            4usize,
            0.3,
            0.99,
        ),
        (
            "cycle 200, eps 0.1, 0.9T*",
            GraphSpec::Cycle { n: 200 },
            5,
            0.1,
            0.9,
        ),
        (
            "er 120 p=0.06, eps 0.2, 0.95T*",
            GraphSpec::ErdosRenyi {
                n: 120,
                p: 0.06,
                seed: 2,
            },
            6,
            0.2,
            0.95,
        ),
        (
            "complete 60, eps 0.05, 0.9T*",
            GraphSpec::Complete { n: 60 },
            3,
            0.05,
            0.9,
        ),
        (
            "path 400, eps 0.15, 0.5T*",
            GraphSpec::Path { n: 400 },
            8,
            0.15,
            0.5,
        ),
    ] {
        let started = Instant::now();
        let g = generate_graph(&spec, &WeightSpec::default()).unwrap();
        let m = CompatibleMetric::for_graph(&g);
        let s = SpectralData::decompose(&g.laplacian()).unwrap();
        let c = GraphConstants::from_parts(&s, &m).unwrap();
        let support = place_support(&m, j, 1).unwrap();
        let profile = SupportProfile::from_support(&m, &support).unwrap();
        let t_star = max_admissible_time(&c, &profile);
        let t = frac * t_star;
        let h = HeatOperator::new(&s, t).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let mut gt = DVector::zeros(g.n_vertices());
        for (k, &v) in support.iter().enumerate() {
            gt[v] = if k % 2 == 0 { 1.3 } else { -0.7 };
        }
        let w = sphere_noise(g.n_vertices(), eps, &mut rng);
        let f = h.kernel() * &gt + w;
        let obs = Observation::new(f, t, eps).unwrap();
        let out = solve(&h, &obs, &SolverOptions::default()).unwrap();
        println!(
            "{label}: N={} status={} iters={} gap={:.1e} err_l1={:.3} elapsed={:.2?}",
            g.n_vertices(),
            out.status,
            out.iterations,
            out.gap,
            (out.g_hat_vector() - &gt)
                .iter()
                .map(|v| v.abs())
                .sum::<f64>(),
            started.elapsed()
        );
    }
}
