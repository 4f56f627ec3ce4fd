//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured extremes (run with `--nocapture` to see them). Tolerances
//! are pinned in code next to each assertion.

mod common;

use common::{random_connected_graph, random_instance};
use heatsparse::bounds::{
    check_certificate_condition, check_invertibility, diagonal_bounds, folz_bound,
    inverse_norm_bound,
};
use heatsparse::certificate::{self, Certificate};
use heatsparse::experiment::{
    ExperimentConfig, GraphSource, NoiseModel, NoiseSpec, OutputSpec, SignalSpec, SolverConfig,
    SupportSpec, TimeSpec,
};
use heatsparse::generate::GraphSpec;
use heatsparse::heat::HeatOperator;
use heatsparse::metric::CompatibleMetric;
use heatsparse::recovery::{
    self, audit_recovery, brute_force, delta_from_inverse, solve, ErrorBudget, Observation,
    SolverOptions,
};
use heatsparse::spectral::SpectralData;
use heatsparse::{WeightSpec, WeightedGraph};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn pass(criterion: usize, detail: String) {
    println!("acceptance criterion {criterion}: PASS — {detail}");
}

/// The 50-graph family shared by criteria 2 and 3.
fn graph_family() -> Vec<WeightedGraph> {
    (0..50u64)
        .map(|seed| {
            let mut rng = ChaCha20Rng::seed_from_u64(7_000 + seed);
            let n = rng.gen_range(2..=40);
            let extra = rng.gen_range(0.0..0.3);
            random_connected_graph(n, extra, rng.gen())
        })
        .collect()
}

#[test]
fn acceptance_01_closed_form_heat_kernel_on_k2() {
    let g = WeightedGraph::new(2, &[(0, 1, 1.0)]).unwrap();
    let s = SpectralData::decompose(&g.laplacian()).unwrap();
    let mut worst = 0.0_f64;
    for t in [0.0, 0.1, 0.5, 2.0] {
        let h = HeatOperator::new(&s, t).unwrap();
        let a = (-2.0 * t).exp();
        let closed = DMatrix::from_row_slice(
            2,
            2,
            &[
                0.5 * (1.0 + a),
                0.5 * (1.0 - a),
                0.5 * (1.0 - a),
                0.5 * (1.0 + a),
            ],
        );
        let err = (h.kernel() - closed).amax();
        assert!(
            err < 1e-12,
            "t = {t}: kernel deviates from closed form by {err}"
        );
        worst = worst.max(err);
    }
    pass(
        1,
        format!("K₂ kernel matches the two-point closed form, worst error {worst:.2e}"),
    );
}

#[test]
fn acceptance_02_diagonal_sandwich_on_random_graphs() {
    let mut worst_slack = 0.0_f64;
    for g in graph_family() {
        let m = CompatibleMetric::for_graph(&g);
        let s = SpectralData::decompose(&g.laplacian()).unwrap();
        let c = heatsparse::GraphConstants::from_parts(&s, &m).unwrap();
        for t in [0.01, 0.1, 1.0] {
            let h = HeatOperator::new(&s, t).unwrap();
            let (lower, upper) = diagonal_bounds(&c, t).unwrap();
            for x in 0..g.n_vertices() {
                let k = h.entry(x, x);
                assert!(k >= lower - 1e-10, "t={t} x={x}: {k} < lower {lower}");
                assert!(k <= upper + 1e-10, "t={t} x={x}: {k} > upper {upper}");
                worst_slack = worst_slack.max(lower - k).max(k - upper);
            }
        }
    }
    pass(
        2,
        format!("50 graphs × 3 times, worst sandwich violation {worst_slack:.2e} (≤ 1e-10)"),
    );
}

#[test]
fn acceptance_03_folz_dominance_on_random_graphs() {
    let mut worst = f64::NEG_INFINITY;
    for g in graph_family() {
        let m = CompatibleMetric::for_graph(&g);
        let s = SpectralData::decompose(&g.laplacian()).unwrap();
        for t in [0.001, 0.01, 0.1] {
            let h = HeatOperator::new(&s, t).unwrap();
            for x in 0..g.n_vertices() {
                for y in 0..g.n_vertices() {
                    if x == y {
                        continue;
                    }
                    let bound = folz_bound(m.dist(x, y), t).unwrap();
                    let excess = h.entry(x, y) - bound;
                    assert!(
                        excess <= 1e-12,
                        "t={t}: K({x},{y}) exceeds bound by {excess}"
                    );
                    worst = worst.max(excess);
                }
            }
        }
    }
    pass(
        3,
        format!("50 graphs × 3 times, worst K − bound = {worst:.2e} (≤ 1e-12)"),
    );
}

/// Instances for criteria 4 and 5: every (graph, support, t) whose
/// invertibility condition passes.
fn invertibility_instances() -> Vec<(common::TestInstance, f64)> {
    let mut out = Vec::new();
    for seed in 0..50u64 {
        let inst = random_instance(100 + seed, 6, 40, 5);
        for frac in [0.25, 0.6, 0.9] {
            let t = frac * inst.t_star;
            if t <= 0.0 {
                continue;
            }
            let (ok, _) = check_invertibility(&inst.constants, &inst.profile, t).unwrap();
            if ok {
                out.push((random_instance(100 + seed, 6, 40, 5), t));
            }
        }
    }
    assert!(
        out.len() >= 100,
        "only {} feasible invertibility instances",
        out.len()
    );
    out
}

#[test]
fn acceptance_04_inverse_l2_norm_soundness() {
    let instances = invertibility_instances();
    let count = instances.len();
    let mut worst_margin = f64::INFINITY;
    for (inst, t) in instances {
        let bound = inverse_norm_bound(&inst.constants, &inst.profile, t).unwrap();
        let h = HeatOperator::new(&inst.spectral, t).unwrap();
        let m = h.restrict(&inst.support).unwrap();
        let sigma_min = nalgebra::SymmetricEigen::new(m.matrix().clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(
            sigma_min >= 1.0 / bound - 1e-10,
            "σ_min {sigma_min} below 1/bound {} at t {t}",
            1.0 / bound
        );
        let inv = m.invert().unwrap();
        assert!(
            inv.norm_l2() <= bound,
            "‖M^-t‖₂ {} > bound {bound}",
            inv.norm_l2()
        );
        worst_margin = worst_margin.min(bound - inv.norm_l2());
    }
    pass(
        4,
        format!("{count} instances, ‖M^-t‖₂ ≤ bound with min margin {worst_margin:.3e}"),
    );
}

#[test]
fn acceptance_05_inverse_linf_norm_soundness() {
    let instances = invertibility_instances();
    let count = instances.len();
    let mut worst_margin = f64::INFINITY;
    for (inst, t) in instances {
        let bound = inverse_norm_bound(&inst.constants, &inst.profile, t).unwrap();
        let h = HeatOperator::new(&inst.spectral, t).unwrap();
        let inv = h.restrict(&inst.support).unwrap().invert().unwrap();
        assert!(
            inv.norm_linf() <= bound + 1e-10,
            "‖M^-t‖∞ {} > bound {bound} at t {t}",
            inv.norm_linf()
        );
        worst_margin = worst_margin.min(bound - inv.norm_linf());
    }
    pass(
        5,
        format!("{count} instances, ‖M^-t‖∞ ≤ bound + 1e-10 with min margin {worst_margin:.3e}"),
    );
}

#[test]
fn acceptance_06_certificate_end_to_end() {
    let mut min_margin = f64::INFINITY;
    for seed in 0..100u64 {
        let inst = random_instance(200 + seed, 6, 40, 5);
        assert!(inst.t_star > 0.0, "seed {seed}: no admissible time");
        let t = 0.9 * inst.t_star;
        let report = check_certificate_condition(&inst.constants, &inst.profile, t).unwrap();
        assert!(
            report.cond1_ok && report.cond2_ok,
            "seed {seed}: conditions fail at 0.9 T*"
        );

        let h = HeatOperator::new(&inst.spectral, t).unwrap();
        let cert = Certificate::construct(&h, &inst.support, &inst.signs).unwrap();
        let verdict = certificate::verify(&cert, &inst.signs, certificate::DEFAULT_TOL);
        assert!(
            verdict.all_hold(),
            "seed {seed}: verdict {verdict:?}, margin {}",
            cert.interior_margin()
        );
        assert!(
            cert.interior_margin() > 0.0,
            "seed {seed}: off-support margin not strict"
        );
        min_margin = min_margin.min(cert.interior_margin());
    }
    pass(
        6,
        format!(
            "100/100 certificates verified at t = 0.9 T*, min interior margin {min_margin:.3e}"
        ),
    );
}

#[test]
fn acceptance_07_noiseless_exact_recovery() {
    let mut worst = 0.0_f64;
    for seed in 0..100u64 {
        let inst = random_instance(200 + seed, 6, 40, 5);
        let t = 0.9 * inst.t_star;
        let h = HeatOperator::new(&inst.spectral, t).unwrap();
        let g_true = inst.g_true();
        let f = h.kernel() * &g_true;
        let obs = Observation::new(f, t, 0.0).unwrap();
        let out = solve(&h, &obs, &SolverOptions::default()).unwrap();
        let err: f64 = (out.g_hat_vector() - &g_true).iter().map(|v| v.abs()).sum();
        assert!(err < 1e-5, "seed {seed}: ‖ĝ − g‖₁ = {err}");
        worst = worst.max(err);
    }
    pass(
        7,
        format!("100/100 noiseless recoveries exact, worst ‖ĝ − g‖₁ = {worst:.3e} (< 1e-5)"),
    );
}

#[test]
fn acceptance_08_oracle_equivalence_on_small_instances() {
    let mut worst = 0.0_f64;
    for seed in 0..50u64 {
        let inst = random_instance(300 + seed, 6, 10, 2);
        let t = (0.5 * inst.t_star).max(1e-6);
        let h = HeatOperator::new(&inst.spectral, t).unwrap();
        let g_true = inst.g_true();
        let n = inst.graph.n_vertices();

        let eps = if seed % 2 == 0 { 0.0 } else { 0.05 };
        // noise on one random signed coordinate keeps the minimizer within
        // the oracle's support budget
        let mut rng = ChaCha20Rng::seed_from_u64(9_000 + seed);
        let mut w = DVector::zeros(n);
        if eps > 0.0 {
            let k = rng.gen_range(0..n);
            w[k] = if rng.gen::<bool>() { eps } else { -eps };
        }
        let f = h.kernel() * &g_true + w;
        let obs = Observation::new(f, t, eps).unwrap();

        let fast = solve(&h, &obs, &SolverOptions::default()).unwrap();
        let slow = brute_force(&h, &obs, 3).unwrap();
        assert_eq!(slow.status, heatsparse::SolveStatus::Optimal, "seed {seed}");
        let diff = (fast.l1_norm - slow.l1_norm).abs();
        assert!(
            diff < 1e-6,
            "seed {seed}: solver {} vs oracle {}",
            fast.l1_norm,
            slow.l1_norm
        );
        worst = worst.max(diff);
    }
    pass(
        8,
        format!("50/50 instances agree with the oracle, worst value gap {worst:.3e} (< 1e-6)"),
    );
}

#[test]
fn acceptance_09_noisy_error_bound_chain() {
    let mut worst_ratio = 0.0_f64;
    for seed in 0..100u64 {
        let inst = random_instance(400 + seed, 6, 40, 5);
        let t = 0.9 * inst.t_star;
        let report = check_certificate_condition(&inst.constants, &inst.profile, t).unwrap();
        assert!(report.cond1_ok && report.cond2_ok, "seed {seed} infeasible");

        let h = HeatOperator::new(&inst.spectral, t).unwrap();
        let g_true = inst.g_true();
        let eps = if seed % 2 == 0 { 0.01 } else { 0.1 };
        let mut rng = ChaCha20Rng::seed_from_u64(5_000 + seed);
        let w = recovery::sphere_noise(inst.graph.n_vertices(), eps, &mut rng);
        let f = h.kernel() * &g_true + w;
        let obs = Observation::new(f, t, eps).unwrap();
        let out = solve(&h, &obs, &SolverOptions::default()).unwrap();
        assert_eq!(out.status, heatsparse::SolveStatus::Optimal, "seed {seed}");

        let inv = h.restrict(&inst.support).unwrap().invert().unwrap();
        let delta = delta_from_inverse(&inv);
        let budget = ErrorBudget::new(inst.profile.j, delta, eps).unwrap();
        let cert = Certificate::construct(&h, &inst.support, &inst.signs).unwrap();
        let audit = audit_recovery(&g_true, &inst.support, &out, &budget, Some(&cert)).unwrap();

        assert!(
            audit.err_l1 <= budget.bound_l1 + 1e-6,
            "seed {seed}: ‖ĝ−g‖₁ = {} > 4(1+δ)√J·ε = {}",
            audit.err_l1,
            budget.bound_l1
        );
        assert!(audit.l2_le_l1, "seed {seed}: ‖·‖₂ > ‖·‖₁");
        assert!(
            audit.lemma_split_ok,
            "seed {seed}: support-split inequality fails"
        );
        assert_eq!(
            audit.lemma_offsupport_ok,
            Some(true),
            "seed {seed}: off-support inequality fails"
        );
        assert_eq!(
            audit.lemma_norm_ok,
            Some(true),
            "seed {seed}: norm inequality fails"
        );
        worst_ratio = worst_ratio.max(audit.err_l1 / budget.bound_l1.max(1e-300));
    }
    pass(
        9,
        format!(
            "100/100 noisy recoveries inside 4(1+δ)√J·ε, worst error/budget ratio {worst_ratio:.3}"
        ),
    );
}

#[test]
fn acceptance_10_experiment_csv_is_deterministic() {
    let config = ExperimentConfig {
        graph: GraphSource {
            generator: Some(GraphSpec::ErdosRenyi {
                n: 24,
                p: 0.18,
                seed: 12,
            }),
            file: None,
            weights: WeightSpec::Uniform {
                lo: 0.6,
                hi: 1.8,
                seed: 13,
            },
        },
        support: SupportSpec::Greedy { size: 3, seed: 14 },
        signal: SignalSpec {
            coefficients: None,
            magnitude_range: [0.5, 2.0],
            seed: 15,
        },
        time: TimeSpec {
            t_star_fractions: Some(vec![0.3, 0.6, 0.9]),
            ..TimeSpec::default()
        },
        noise: NoiseSpec {
            eps: vec![0.0, 0.01, 0.1],
            model: NoiseModel::Sphere,
            seed: 16,
        },
        certificate: true,
        solver: SolverConfig::default(),
        output: OutputSpec::default(),
    };
    let first = heatsparse::experiment::run_experiment(&config).unwrap();
    let second = heatsparse::experiment::run_experiment(&config).unwrap();
    assert_eq!(first.to_csv().as_bytes(), second.to_csv().as_bytes());
    assert_eq!(first.records.len(), 9);
    assert!(first.records.iter().all(|r| r.status == "ok"));
    // feasible sweep: the recovery error bound holds in every trial
    assert!(first.records.iter().all(|r| r.bound_held == Some(true)));
    pass(
        10,
        format!(
            "repeated runs emit byte-identical CSV ({} trials, {} bytes)",
            first.records.len(),
            first.to_csv().len()
        ),
    );
}
