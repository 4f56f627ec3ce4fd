//! Browser bindings for the interactive demo page.
//!
//! A [`Session`] holds one resolved instance (graph, metric, spectrum,
//! support) and exposes three operations over a JSON string API so the page
//! needs no framework: a feasibility sweep over time, certificate
//! construction at a chosen time, and a noisy recovery run. All state is
//! deterministic given the seeds in the session config.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use heatsparse::bounds::{
    check_certificate_condition, max_admissible_time, GraphConstants, SupportProfile,
};
use heatsparse::certificate::{self, Certificate, SignPattern};
use heatsparse::error::Error;
use heatsparse::generate::{generate_graph, place_support, GraphSpec, WeightSpec};
use heatsparse::heat::HeatOperator;
use heatsparse::metric::CompatibleMetric;
use heatsparse::recovery::{
    audit_recovery, delta_from_inverse, solve, sphere_noise, ErrorBudget, Observation,
    SolverOptions,
};
use heatsparse::spectral::SpectralData;
use heatsparse::WeightedGraph;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionConfig {
    graph: GraphSpec,
    #[serde(default)]
    weights: Option<WeightSpec>,
    support_size: usize,
    #[serde(default)]
    support_seed: u64,
    #[serde(default)]
    signal_seed: u64,
}

struct Instance {
    graph: WeightedGraph,
    spectral: SpectralData,
    constants: GraphConstants,
    support: Vec<usize>,
    profile: SupportProfile,
    coefficients: Vec<f64>,
    signs: SignPattern,
    t_star: f64,
}

fn build_instance(config: &SessionConfig) -> Result<Instance, Error> {
    let weights = config.weights.unwrap_or_default();
    let graph = generate_graph(&config.graph, &weights)?;
    let metric = CompatibleMetric::for_graph(&graph);
    let spectral = SpectralData::decompose(&graph.laplacian())?;
    let constants = GraphConstants::from_parts(&spectral, &metric)?;
    let support = place_support(&metric, config.support_size, config.support_seed)?;
    let profile = SupportProfile::from_support(&metric, &support)?;

    let mut rng = ChaCha20Rng::seed_from_u64(config.signal_seed);
    let coefficients: Vec<f64> = (0..support.len())
        .map(|_| {
            let m = rng.gen_range(0.5..=2.0);
            if rng.gen::<bool>() {
                m
            } else {
                -m
            }
        })
        .collect();
    let signs = SignPattern::of_nonzero(&coefficients)?;
    let t_star = max_admissible_time(&constants, &profile);

    Ok(Instance {
        graph,
        spectral,
        constants,
        support,
        profile,
        coefficients,
        signs,
        t_star,
    })
}

/// Vertex positions for drawing: grids on a lattice, paths on a line,
/// everything else on a circle.
fn layout(graph_spec: &GraphSpec, n: usize) -> Vec<[f64; 2]> {
    match *graph_spec {
        GraphSpec::Grid { rows, cols } => (0..n)
            .map(|v| {
                let r = v / cols;
                let c = v % cols;
                let dx = if cols > 1 {
                    c as f64 / (cols - 1) as f64
                } else {
                    0.5
                };
                let dy = if rows > 1 {
                    r as f64 / (rows - 1) as f64
                } else {
                    0.5
                };
                [0.08 + 0.84 * dx, 0.08 + 0.84 * dy]
            })
            .collect(),
        GraphSpec::Path { .. } => (0..n)
            .map(|v| {
                let dx = if n > 1 {
                    v as f64 / (n - 1) as f64
                } else {
                    0.5
                };
                [0.05 + 0.9 * dx, 0.5]
            })
            .collect(),
        _ => (0..n)
            .map(|v| {
                let angle = std::f64::consts::TAU * v as f64 / n as f64;
                [0.5 + 0.42 * angle.cos(), 0.5 + 0.42 * angle.sin()]
            })
            .collect(),
    }
}

#[derive(Serialize)]
struct LayoutPayload {
    n: usize,
    positions: Vec<[f64; 2]>,
    edges: Vec<[usize; 2]>,
    support: Vec<usize>,
    coefficients: Vec<f64>,
    t_star: f64,
    zeta: f64,
    d_min: f64,
    op_norm: f64,
    spectral_gap: f64,
}

#[derive(Serialize)]
struct SweepPoint {
    t: f64,
    cond1_lhs: f64,
    cond1_rhs: f64,
    cond2_lhs: f64,
    cond2_rhs: f64,
    feasible: bool,
}

#[derive(Serialize)]
struct CertificatePayload {
    t: f64,
    values: Vec<f64>,
    coeffs: Vec<f64>,
    support: Vec<usize>,
    signs: Vec<f64>,
    sup_norm: f64,
    off_support_max: f64,
    interior_margin: f64,
    interpolates: bool,
    strictly_interior: bool,
    unit_sup: bool,
}

#[derive(Serialize)]
struct RecoveryPayload {
    t: f64,
    eps: f64,
    g_true: Vec<f64>,
    g_hat: Vec<f64>,
    observed: Vec<f64>,
    err_l1: f64,
    err_l2: f64,
    bound_l1: f64,
    bound_held: bool,
    residual: f64,
    iterations: usize,
    status: String,
}

fn err_js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// One resolved demo instance exposed to the page.
#[wasm_bindgen]
pub struct Session {
    config_graph: GraphSpec,
    instance: Instance,
}

// plain-Rust surface; the bindgen wrappers below only translate errors
impl Session {
    /// Builds a session from a JSON config:
    /// `{"graph": {"kind": "grid", "rows": 4, "cols": 5}, "support_size": 3,
    ///   "support_seed": 1, "signal_seed": 2}`.
    pub fn from_config(config_json: &str) -> Result<Session, Error> {
        let config: SessionConfig = serde_json::from_str(config_json)?;
        let instance = build_instance(&config)?;
        Ok(Session {
            config_graph: config.graph,
            instance,
        })
    }

    /// Graph geometry, support and instance constants for drawing.
    pub fn layout(&self) -> Result<String, Error> {
        let inst = &self.instance;
        let payload = LayoutPayload {
            n: inst.graph.n_vertices(),
            positions: layout(&self.config_graph, inst.graph.n_vertices()),
            edges: inst.graph.edges().iter().map(|e| [e.u, e.v]).collect(),
            support: inst.support.clone(),
            coefficients: inst.coefficients.clone(),
            t_star: inst.t_star,
            zeta: inst.constants.zeta,
            d_min: inst.profile.d_min,
            op_norm: inst.constants.op_norm,
            spectral_gap: inst.constants.gap,
        };
        Ok(serde_json::to_string(&payload)?)
    }

    /// Both feasibility conditions on a log-spaced time grid reaching past T*.
    pub fn feasibility(&self, points: usize) -> Result<String, Error> {
        let inst = &self.instance;
        let points = points.clamp(2, 2000);
        let hi = if inst.t_star > 0.0 {
            2.0 * inst.t_star
        } else {
            inst.constants.zeta / (2.0 * std::f64::consts::E)
        };
        let lo = hi * 1e-4;
        let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
        let mut grid = Vec::with_capacity(points);
        let mut t = lo;
        for _ in 0..points {
            let report = check_certificate_condition(&inst.constants, &inst.profile, t)?;
            grid.push(SweepPoint {
                t,
                cond1_lhs: report.cond1_lhs,
                cond1_rhs: report.cond1_rhs,
                cond2_lhs: report.cond2_lhs,
                cond2_rhs: report.cond2_rhs,
                feasible: report.cond1_ok && report.cond2_ok,
            });
            t *= ratio;
        }
        Ok(serde_json::to_string(&serde_json::json!({
            "t_star": inst.t_star,
            "points": grid,
        }))?)
    }

    /// Constructs the dual certificate at `t_frac · T*` and reports the
    /// verification outcome together with h on every vertex.
    pub fn certificate(&self, t_frac: f64) -> Result<String, Error> {
        let inst = &self.instance;
        if inst.t_star <= 0.0 {
            return Err(Error::ConfigInvalid(
                "no admissible time for this instance".into(),
            ));
        }
        let t = (t_frac.max(1e-6)) * inst.t_star;
        let h_op = HeatOperator::new(&inst.spectral, t)?;
        let cert = Certificate::construct(&h_op, &inst.support, &inst.signs)?;
        let verdict = certificate::verify(&cert, &inst.signs, certificate::DEFAULT_TOL);
        let payload = CertificatePayload {
            t,
            values: cert.values.clone(),
            coeffs: cert.coeffs.clone(),
            support: cert.support.clone(),
            signs: inst.signs.signs().to_vec(),
            sup_norm: cert.sup_norm,
            off_support_max: cert.off_support_max,
            interior_margin: cert.interior_margin(),
            interpolates: verdict.interpolates,
            strictly_interior: verdict.strictly_interior,
            unit_sup: verdict.unit_sup,
        };
        Ok(serde_json::to_string(&payload)?)
    }

    /// Synthesizes a noisy observation at `t_frac · T*`, solves the ℓ¹
    /// program and audits the error against `4(1+δ)√J·ε`.
    pub fn recover(&self, t_frac: f64, eps: f64, noise_seed: u64) -> Result<String, Error> {
        let inst = &self.instance;
        if inst.t_star <= 0.0 {
            return Err(Error::ConfigInvalid(
                "no admissible time for this instance".into(),
            ));
        }
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::ConfigInvalid("eps must be ≥ 0".into()));
        }
        let t = (t_frac.max(1e-6)) * inst.t_star;
        let h_op = HeatOperator::new(&inst.spectral, t)?;

        let n = inst.graph.n_vertices();
        let mut g_true = DVector::zeros(n);
        for (slot, &v) in inst.support.iter().enumerate() {
            g_true[v] = inst.coefficients[slot];
        }
        let mut rng = ChaCha20Rng::seed_from_u64(noise_seed);
        let w = sphere_noise(n, eps, &mut rng);
        let f = h_op.apply(&g_true)? + w;
        let obs = Observation::new(f.clone(), t, eps)?;
        let result = solve(&h_op, &obs, &SolverOptions::default())?;

        let inv = h_op.restrict(&inst.support).and_then(|m| m.invert())?;
        let delta = delta_from_inverse(&inv);
        let budget = ErrorBudget::new(inst.profile.j, delta, eps)?;
        let cert = Certificate::construct(&h_op, &inst.support, &inst.signs).ok();
        let audit = audit_recovery(&g_true, &inst.support, &result, &budget, cert.as_ref())?;

        let payload = RecoveryPayload {
            t,
            eps,
            g_true: g_true.iter().copied().collect(),
            g_hat: result.g_hat.clone(),
            observed: f.iter().copied().collect(),
            err_l1: audit.err_l1,
            err_l2: audit.err_l2,
            bound_l1: budget.bound_l1,
            bound_held: audit.bound_held,
            residual: result.residual,
            iterations: result.iterations,
            status: result.status.to_string(),
        };
        Ok(serde_json::to_string(&payload)?)
    }
}

#[wasm_bindgen]
impl Session {
    #[wasm_bindgen(constructor)]
    pub fn new(config_json: &str) -> Result<Session, JsError> {
        Self::from_config(config_json).map_err(err_js)
    }

    pub fn layout_json(&self) -> Result<String, JsError> {
        self.layout().map_err(err_js)
    }

    pub fn feasibility_json(&self, points: usize) -> Result<String, JsError> {
        self.feasibility(points).map_err(err_js)
    }

    pub fn certificate_json(&self, t_frac: f64) -> Result<String, JsError> {
        self.certificate(t_frac).map_err(err_js)
    }

    pub fn recover_json(&self, t_frac: f64, eps: f64, noise_seed: u64) -> Result<String, JsError> {
        self.recover(t_frac, eps, noise_seed).map_err(err_js)
    }
}
