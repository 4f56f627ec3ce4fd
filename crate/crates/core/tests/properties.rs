//! Property tests for the invariants that hold on every instance:
//! compatibility of the derived metric, metric axioms, Laplacian structure,
//! semigroup identities, kernel bounds, certificate norm chains and solver
//! feasibility.

mod common;

use common::{random_connected_graph, random_instance};
use heatsparse::bounds::{
    check_certificate_condition, check_invertibility, diagonal_bounds, folz_bound,
    inverse_norm_bound, GraphConstants,
};
use heatsparse::certificate::{self, Certificate};
use heatsparse::heat::HeatOperator;
use heatsparse::metric::CompatibleMetric;
use heatsparse::recovery::{self, Observation, SolverOptions};
use heatsparse::spectral::SpectralData;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn graph_strategy(min_n: usize, max_n: usize) -> impl Strategy<Value = heatsparse::WeightedGraph> {
    (min_n..=max_n, 0.0..0.3f64, any::<u64>())
        .prop_map(|(n, extra, seed)| random_connected_graph(n, extra, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derived_metric_satisfies_compatibility(g in graph_strategy(2, 30)) {
        let m = CompatibleMetric::for_graph(&g);
        for x in 0..g.n_vertices() {
            let sum: f64 = g
                .neighbors(x)
                .iter()
                .map(|&(y, b)| b * m.dist(x, y).powi(2))
                .sum();
            prop_assert!(sum <= 1.0 + 1e-12, "vertex {x} sum {sum}");
        }
    }

    #[test]
    fn derived_metric_satisfies_triangle_inequality(g in graph_strategy(2, 30)) {
        let m = CompatibleMetric::for_graph(&g);
        let n = g.n_vertices();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    prop_assert!(m.dist(x, y) <= m.dist(x, z) + m.dist(z, y) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn laplacian_is_symmetric_balanced_negative(g in graph_strategy(2, 25)) {
        let l = g.laplacian();
        let matrix = l.matrix();
        prop_assert!((matrix - matrix.transpose()).amax() == 0.0);
        for x in 0..g.n_vertices() {
            let row_sum: f64 = matrix.row(x).iter().sum();
            prop_assert!(row_sum.abs() < 1e-12);
        }
        let s = SpectralData::decompose(&l).unwrap();
        prop_assert!(s.eigenvalues().iter().all(|&ev| ev <= 1e-10));
        prop_assert_eq!(s.zero_multiplicity(), 1);
    }

    #[test]
    fn quadratic_form_matches_edge_sum(g in graph_strategy(2, 25), seed in any::<u64>()) {
        let l = g.laplacian();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let f = DVector::from_fn(g.n_vertices(), |_, _| rng.gen_range(-1.0..1.0));
        let by_matrix = l.quadratic_form(&f);
        let by_sum: f64 = g.edges().iter().map(|e| -e.weight * (f[e.u] - f[e.v]).powi(2)).sum();
        let scale = by_sum.abs().max(1e-12);
        prop_assert!((by_matrix - by_sum).abs() / scale < 1e-10);
    }

    #[test]
    fn heat_semigroup_composes(
        g in graph_strategy(2, 20),
        t1 in 0.0..1.0f64,
        t2 in 0.0..1.0f64,
    ) {
        let s = SpectralData::decompose(&g.laplacian()).unwrap();
        let k1 = HeatOperator::new(&s, t1).unwrap();
        let k2 = HeatOperator::new(&s, t2).unwrap();
        let k12 = HeatOperator::new(&s, t1 + t2).unwrap();
        let composed = k1.kernel() * k2.kernel();
        prop_assert!((composed - k12.kernel()).amax() < 1e-9);
    }

    #[test]
    fn diagonal_entries_respect_the_sandwich(g in graph_strategy(2, 30)) {
        let m = CompatibleMetric::for_graph(&g);
        let s = SpectralData::decompose(&g.laplacian()).unwrap();
        let c = GraphConstants::from_parts(&s, &m).unwrap();
        for t in [0.01, 0.1, 1.0] {
            let h = HeatOperator::new(&s, t).unwrap();
            let (lower, upper) = diagonal_bounds(&c, t).unwrap();
            for x in 0..g.n_vertices() {
                let k = h.entry(x, x);
                prop_assert!(k >= lower - 1e-10, "t={t} x={x}: {k} < {lower}");
                prop_assert!(k <= upper + 1e-10, "t={t} x={x}: {k} > {upper}");
            }
        }
    }

    #[test]
    fn kernel_entries_stay_positive_at_moderate_times(
        n in 5..=50usize,
        seed in any::<u64>(),
        t in 0.5..1.5f64,
    ) {
        let g = random_connected_graph(n, 0.15, seed);
        let s = SpectralData::decompose(&g.laplacian()).unwrap();
        let h = HeatOperator::new(&s, t).unwrap();
        for x in 0..n {
            for y in 0..n {
                prop_assert!(h.entry(x, y) > 0.0, "K({t},{x},{y}) = {}", h.entry(x, y));
                prop_assert!(h.entry(x, y) <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn folz_bound_dominates_off_diagonal_entries(g in graph_strategy(2, 30)) {
        let m = CompatibleMetric::for_graph(&g);
        let s = SpectralData::decompose(&g.laplacian()).unwrap();
        for t in [0.001, 0.01, 0.1] {
            let h = HeatOperator::new(&s, t).unwrap();
            for x in 0..g.n_vertices() {
                for y in 0..g.n_vertices() {
                    if x != y {
                        let bound = folz_bound(m.dist(x, y), t).unwrap();
                        prop_assert!(
                            h.entry(x, y) <= bound + 1e-12,
                            "t={t}: K({x},{y}) = {} > {bound}",
                            h.entry(x, y)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn restriction_is_an_l2_contraction_of_the_semigroup(seed in any::<u64>()) {
        let inst = random_instance(seed, 6, 30, 5);
        let t = 0.3;
        let h = HeatOperator::new(&inst.spectral, t).unwrap();
        let m = h.restrict(&inst.support).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
        let eta_s = DVector::from_fn(inst.profile.j, |_, _| rng.gen_range(-1.0..1.0));
        let mut eta = DVector::zeros(inst.graph.n_vertices());
        for (slot, &v) in inst.support.iter().enumerate() {
            eta[v] = eta_s[slot];
        }
        let restricted_norm = (m.matrix() * &eta_s).norm();
        let full_norm = (h.kernel() * &eta).norm();
        prop_assert!(restricted_norm <= full_norm + 1e-12);
    }

    #[test]
    fn cond2_implies_cond1_when_time_is_positive(seed in any::<u64>(), frac in 0.01..4.0f64) {
        let inst = random_instance(seed, 6, 30, 5);
        let t = frac * inst.t_star.max(1e-6);
        let r = check_certificate_condition(&inst.constants, &inst.profile, t).unwrap();
        if r.cond2_ok {
            prop_assert!(r.cond1_ok);
        }
        prop_assert_eq!(r.cond1_ok, r.inverse_norm_bound.is_some());
    }

    #[test]
    fn solver_returns_feasible_points(seed in any::<u64>(), eps in 0.0..0.3f64) {
        let inst = random_instance(seed, 6, 12, 2);
        let t = (0.5 * inst.t_star).max(1e-6);
        let h = HeatOperator::new(&inst.spectral, t).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xabcdef);
        let w = recovery::sphere_noise(inst.graph.n_vertices(), eps, &mut rng);
        let f = h.kernel() * inst.g_true() + w;
        let obs = Observation::new(f, t, eps).unwrap();
        let out = recovery::solve(&h, &obs, &SolverOptions::default()).unwrap();
        prop_assert!(out.residual <= eps + 1e-7, "residual {} eps {eps}", out.residual);
    }
}

// certificate chains need feasible instances, which the generic proptest
// strategies hit too rarely; run them over a seeded batch instead
#[test]
fn certificate_norm_chains_hold_on_feasible_instances() {
    for seed in 0..40u64 {
        let inst = random_instance(seed, 6, 40, 5);
        assert!(inst.t_star > 0.0, "seed {seed}: empty feasibility window");
        let t = 0.9 * inst.t_star;
        let report = check_certificate_condition(&inst.constants, &inst.profile, t).unwrap();
        assert!(
            report.cond1_ok && report.cond2_ok,
            "seed {seed} infeasible at 0.9 T*"
        );

        let h = HeatOperator::new(&inst.spectral, t).unwrap();
        let cert = Certificate::construct(&h, &inst.support, &inst.signs).unwrap();

        // construction exactness
        let m = h.restrict(&inst.support).unwrap();
        let residual =
            (m.matrix() * DVector::from_column_slice(&cert.coeffs) - inst.signs.as_vector()).amax();
        assert!(residual < 1e-10, "seed {seed}: solve residual {residual}");

        // coefficient norm against the closed-form inverse bound
        let bound = inverse_norm_bound(&inst.constants, &inst.profile, t).unwrap();
        assert!(
            cert.coeff_sup_norm() <= bound + 1e-10,
            "seed {seed}: ‖a‖∞ = {} > {bound}",
            cert.coeff_sup_norm()
        );

        // per-vertex off-support chain
        let zeta_term = folz_bound(inst.constants.zeta, t).unwrap();
        let quarter_term = if inst.profile.j > 1 {
            (0.25 * inst.profile.d_min * (4.0 * std::f64::consts::E * t / inst.profile.d_min).ln())
                .exp()
        } else {
            0.0
        };
        let chain =
            cert.coeff_sup_norm() * (zeta_term + (inst.profile.j as f64 - 1.0) * quarter_term);
        let on_support: std::collections::HashSet<usize> = inst.support.iter().copied().collect();
        for v in 0..inst.graph.n_vertices() {
            if !on_support.contains(&v) {
                assert!(
                    cert.values[v].abs() <= chain + 1e-12,
                    "seed {seed} vertex {v}: |h| = {} > {chain}",
                    cert.values[v].abs()
                );
            }
        }

        let verdict = certificate::verify(&cert, &inst.signs, certificate::DEFAULT_TOL);
        assert!(verdict.all_hold(), "seed {seed}: {verdict:?}");
    }
}

#[test]
fn gershgorin_and_varah_bounds_are_sound() {
    let mut checked = 0;
    for seed in 0..40u64 {
        let inst = random_instance(seed, 6, 40, 5);
        for frac in [0.3, 0.9] {
            let t = frac * inst.t_star;
            let (ok, _) = check_invertibility(&inst.constants, &inst.profile, t).unwrap();
            if !ok {
                continue;
            }
            checked += 1;
            let bound = inverse_norm_bound(&inst.constants, &inst.profile, t).unwrap();
            let h = HeatOperator::new(&inst.spectral, t).unwrap();
            let m = h.restrict(&inst.support).unwrap();
            let eig = nalgebra::SymmetricEigen::new(m.matrix().clone());
            let sigma_min = eig
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            assert!(
                sigma_min >= 1.0 / bound - 1e-10,
                "seed {seed} t {t}: σ_min {sigma_min} < 1/{bound}"
            );
            let inv = m.invert().unwrap();
            assert!(
                inv.norm_l2() <= bound,
                "seed {seed}: ‖inv‖₂ {} > {bound}",
                inv.norm_l2()
            );
            assert!(
                inv.norm_linf() <= bound + 1e-10,
                "seed {seed}: ‖inv‖∞ {} > {bound}",
                inv.norm_linf()
            );
            // tighter per-row Gershgorin diagnostic is indeed tighter
            assert!(m.gershgorin_lower_bound() >= 1.0 / bound - 1e-10);
        }
    }
    assert!(checked > 20, "only {checked} feasible instances exercised");
}

#[test]
fn optimal_l1_value_is_monotone_in_eps() {
    for seed in [3u64, 17, 99] {
        let inst = random_instance(seed, 6, 10, 2);
        let t = (0.5 * inst.t_star).max(1e-6);
        let h = HeatOperator::new(&inst.spectral, t).unwrap();
        let f = h.kernel() * inst.g_true();
        let mut prev = f64::INFINITY;
        for eps in [0.0, 0.01, 0.1, 0.5] {
            let obs = Observation::new(f.clone(), t, eps).unwrap();
            let out = recovery::solve(&h, &obs, &SolverOptions::default()).unwrap();
            assert!(out.l1_norm <= prev + 1e-7, "seed {seed} eps {eps}");
            prev = out.l1_norm;
        }
    }
}

#[test]
fn noiseless_optimum_pairs_with_the_certificate() {
    // on feasible noiseless instances the solver's optimum satisfies the
    // duality identity ‖ĝ‖₁ = ⟨ĝ, h⟩ against the constructed certificate
    for seed in [1u64, 8, 23, 31] {
        let inst = random_instance(seed, 6, 25, 4);
        let t = 0.9 * inst.t_star;
        let h_op = HeatOperator::new(&inst.spectral, t).unwrap();
        let cert = Certificate::construct(&h_op, &inst.support, &inst.signs).unwrap();
        let g_true = inst.g_true();
        let f = h_op.kernel() * &g_true;
        let obs = Observation::new(f, t, 0.0).unwrap();
        let out = recovery::solve(&h_op, &obs, &SolverOptions::default()).unwrap();
        let h_vec = DVector::from_column_slice(&cert.values);
        let pairing = out.g_hat_vector().dot(&h_vec);
        assert!(
            (out.l1_norm - pairing).abs() < 1e-6,
            "seed {seed}: ‖ĝ‖₁ = {} vs ⟨ĝ, h⟩ = {pairing}",
            out.l1_norm
        );
    }
}

#[test]
fn certified_uniqueness_agrees_with_the_oracle() {
    // N ≤ 10, noiseless: the brute-force oracle must find exactly the
    // certified signal as the unique minimizer
    for seed in [2u64, 12, 29] {
        let inst = random_instance(seed, 6, 10, 2);
        let t = 0.9 * inst.t_star;
        let h_op = HeatOperator::new(&inst.spectral, t).unwrap();
        let cert = Certificate::construct(&h_op, &inst.support, &inst.signs).unwrap();
        assert!(certificate::certify_uniqueness(
            &cert,
            &inst.support,
            &inst.signs,
            certificate::DEFAULT_TOL
        ));

        let g_true = inst.g_true();
        let f = h_op.kernel() * &g_true;
        let obs = Observation::new(f, t, 0.0).unwrap();
        let oracle = recovery::brute_force(&h_op, &obs, 3).unwrap();
        assert_eq!(oracle.status, heatsparse::SolveStatus::Optimal);
        let g_l1: f64 = g_true.iter().map(|v| v.abs()).sum();
        assert!((oracle.l1_norm - g_l1).abs() < 1e-8, "seed {seed}");
        assert!(
            (oracle.g_hat_vector() - &g_true).amax() < 1e-8,
            "seed {seed}"
        );
    }
}

#[test]
fn metric_override_round_trips_through_validation() {
    let g = random_connected_graph(12, 0.2, 5);
    let derived = CompatibleMetric::for_graph(&g);
    let again = CompatibleMetric::from_matrix(&g, derived.matrix().clone()).unwrap();
    let diff = (again.matrix() - derived.matrix()).amax();
    assert_eq!(diff, 0.0);
}

#[test]
fn scaled_up_metric_is_rejected() {
    let g = random_connected_graph(10, 0.2, 6);
    let derived = CompatibleMetric::for_graph(&g);
    let scaled = derived.matrix() * 10.0;
    assert!(CompatibleMetric::from_matrix(&g, scaled).is_err());
}

#[test]
fn noiseless_identity_recovery_uses_spectral_inverse() {
    // t = 0 keeps the kernel at the identity, so the equality-constrained
    // path must return f itself
    let g = random_connected_graph(8, 0.2, 9);
    let s = SpectralData::decompose(&g.laplacian()).unwrap();
    let h = HeatOperator::new(&s, 0.0).unwrap();
    let f = DVector::from_fn(8, |i, _| (i as f64 * 0.37).sin());
    let obs = Observation::new(f.clone(), 0.0, 0.0).unwrap();
    let out = recovery::solve(&h, &obs, &SolverOptions::default()).unwrap();
    assert!((out.g_hat_vector() - f).amax() < 1e-8);
}

#[test]
fn kernel_matches_dense_matrix_exponential_series() {
    // independent route: truncated power series of e^{tΔ}
    let g = random_connected_graph(9, 0.25, 21);
    let l = g.laplacian();
    let s = SpectralData::decompose(&l).unwrap();
    let t = 0.4;
    let h = HeatOperator::new(&s, t).unwrap();

    let n = 9;
    let mut series = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..60 {
        term = (&term * l.matrix()) * (t / k as f64);
        series += &term;
    }
    assert!((h.kernel() - series).amax() < 1e-11);
}
