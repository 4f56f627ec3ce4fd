//! Experiment configuration, trial execution and record emission.
//!
//! One experiment fixes a graph, a support and a sparse signal, then runs
//! the full pipeline (feasibility report → certificate → synthesize
//! observation → solve → audit) over a grid of time and noise values.
//! Everything is seeded, trials execute in grid order, and the CSV output
//! is byte-identical across repeated runs with the same config.

use std::path::PathBuf;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, GraphConstants, SupportProfile};
use crate::certificate::{self, Certificate, SignPattern};
use crate::error::{Error, Result};
use crate::generate::{generate_graph, place_support, GraphSpec, WeightSpec};
use crate::graph::WeightedGraph;
use crate::graph_file;
use crate::heat::HeatOperator;
use crate::metric::CompatibleMetric;
use crate::recovery::{
    self, audit_recovery, delta_from_inverse, gaussian_noise_capped, sphere_noise, ErrorBudget,
    Observation, SolverOptions,
};
use crate::spectral::SpectralData;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GraphSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default)]
    pub weights: WeightSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SupportSpec {
    Explicit {
        vertices: Vec<usize>,
    },
    Greedy {
        size: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_magnitude_range() -> [f64; 2] {
    [0.5, 2.0]
}

/// Coefficients on the support: explicit values, or random magnitudes in a
/// range with random signs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default = "default_magnitude_range")]
    pub magnitude_range: [f64; 2],
    #[serde(default)]
    pub seed: u64,
}

impl Default for SignalSpec {
    fn default() -> Self {
        Self {
            coefficients: None,
            magnitude_range: default_magnitude_range(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// Time grid: explicit values, fractions of the admissible time T*, or a
/// linear sweep. Exactly one variant must be set.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_star_fractions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    Sphere,
    Gaussian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default = "default_eps_grid")]
    pub eps: Vec<f64>,
    #[serde(default = "default_noise_model")]
    pub model: NoiseModel,
    #[serde(default)]
    pub seed: u64,
}

fn default_eps_grid() -> Vec<f64> {
    vec![0.0]
}

fn default_noise_model() -> NoiseModel {
    NoiseModel::Sphere
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            eps: default_eps_grid(),
            model: default_noise_model(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_gap_tol() -> f64 {
    SolverOptions::default().gap_tol
}

fn default_max_iter() -> usize {
    SolverOptions::default().max_iter
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gap_tol: default_gap_tol(),
            max_iter: default_max_iter(),
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            gap_tol: self.gap_tol,
            max_iter: self.max_iter,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub support: SupportSpec,
    #[serde(default)]
    pub signal: SignalSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// Build and verify a dual certificate per trial.
    #[serde(default = "default_true")]
    pub certificate: bool,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.graph.generator, &self.graph.file) {
            (Some(_), Some(_)) => {
                return Err(Error::ConfigInvalid(
                    "graph has both generator and file".into(),
                ))
            }
            (None, None) => {
                return Err(Error::ConfigInvalid(
                    "graph needs a generator or a file".into(),
                ))
            }
            _ => {}
        }
        let grids = [&self.time.fixed, &self.time.t_star_fractions];
        let set =
            grids.iter().filter(|g| g.is_some()).count() + usize::from(self.time.sweep.is_some());
        if set != 1 {
            return Err(Error::ConfigInvalid(
                "time needs exactly one of fixed, t_star_fractions, sweep".into(),
            ));
        }
        for grid in grids.into_iter().flatten() {
            if grid.is_empty() {
                return Err(Error::ConfigInvalid("time grid is empty".into()));
            }
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::ConfigInvalid(
                    "time grid must be strictly increasing".into(),
                ));
            }
        }
        if let Some(sweep) = &self.time.sweep {
            let increasing = sweep.stop > sweep.start && sweep.start >= 0.0;
            if sweep.count == 0 || !increasing {
                return Err(Error::ConfigInvalid("bad time sweep".into()));
            }
        }
        if self.noise.eps.is_empty() {
            return Err(Error::ConfigInvalid("noise eps grid is empty".into()));
        }
        if self.noise.eps.iter().any(|&e| e < 0.0) {
            return Err(Error::ConfigInvalid("noise eps must be ≥ 0".into()));
        }
        if let Some(coeffs) = &self.signal.coefficients {
            if coeffs.iter().any(|c| *c == 0.0 || !c.is_finite()) {
                return Err(Error::ConfigInvalid(
                    "signal coefficients must be nonzero".into(),
                ));
            }
        }
        let [lo, hi] = self.signal.magnitude_range;
        let ordered = lo > 0.0 && hi >= lo;
        if !ordered {
            return Err(Error::ConfigInvalid("bad magnitude range".into()));
        }
        Ok(())
    }
}

/// One grid point of an experiment, flattened for emission.
///
/// `wall_time_ms` appears only in JSON output; the CSV columns are the
/// deterministic fields, so repeated runs are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub t_frac: Option<f64>,
    pub t: f64,
    pub eps: f64,
    pub n: usize,
    pub op_norm: f64,
    pub gap: f64,
    pub zeta: f64,
    pub j: usize,
    pub d_min: f64,
    pub cond1_lhs: f64,
    pub cond1_rhs: f64,
    pub cond2_lhs: f64,
    pub cond2_rhs: f64,
    pub cond1_ok: bool,
    pub cond2_ok: bool,
    pub inverse_norm_bound: Option<f64>,
    pub cert_built: bool,
    pub cert_interpolates: Option<bool>,
    pub cert_strictly_interior: Option<bool>,
    pub cert_unit_sup: Option<bool>,
    pub cert_off_support_max: Option<f64>,
    pub delta: Option<f64>,
    pub err_l1: Option<f64>,
    pub err_l2: Option<f64>,
    pub residual: Option<f64>,
    pub l1_norm: Option<f64>,
    pub bound_l1: Option<f64>,
    pub bound_held: Option<bool>,
    pub lemma_split_ok: Option<bool>,
    pub lemma_offsupport_ok: Option<bool>,
    pub solver_status: Option<String>,
    pub solver_iterations: Option<usize>,
    pub status: String,
    pub wall_time_ms: f64,
}

impl TrialRecord {
    pub const CSV_HEADER: &'static str = "trial,t_frac,t,eps,n,op_norm,gap,zeta,j,d_min,\
cond1_lhs,cond1_rhs,cond2_lhs,cond2_rhs,cond1_ok,cond2_ok,inverse_norm_bound,\
cert_built,cert_interpolates,cert_strictly_interior,cert_unit_sup,cert_off_support_max,\
delta,err_l1,err_l2,residual,l1_norm,bound_l1,bound_held,lemma_split_ok,lemma_offsupport_ok,\
solver_status,solver_iterations,status";

    pub fn csv_row(&self) -> String {
        fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        [
            self.trial.to_string(),
            opt(&self.t_frac),
            self.t.to_string(),
            self.eps.to_string(),
            self.n.to_string(),
            self.op_norm.to_string(),
            self.gap.to_string(),
            self.zeta.to_string(),
            self.j.to_string(),
            self.d_min.to_string(),
            self.cond1_lhs.to_string(),
            self.cond1_rhs.to_string(),
            self.cond2_lhs.to_string(),
            self.cond2_rhs.to_string(),
            self.cond1_ok.to_string(),
            self.cond2_ok.to_string(),
            opt(&self.inverse_norm_bound),
            self.cert_built.to_string(),
            opt(&self.cert_interpolates),
            opt(&self.cert_strictly_interior),
            opt(&self.cert_unit_sup),
            opt(&self.cert_off_support_max),
            opt(&self.delta),
            opt(&self.err_l1),
            opt(&self.err_l2),
            opt(&self.residual),
            opt(&self.l1_norm),
            opt(&self.bound_l1),
            opt(&self.bound_held),
            opt(&self.lemma_split_ok),
            opt(&self.lemma_offsupport_ok),
            opt(&self.solver_status),
            opt(&self.solver_iterations),
            self.status.clone(),
        ]
        .join(",")
    }
}

/// A resolved experiment instance plus everything shared across trials.
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub t_star: Option<f64>,
    pub records: Vec<TrialRecord>,
}

impl ExperimentRun {
    pub fn any_trial_failed(&self) -> bool {
        self.records.iter().any(|r| r.status != "ok")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TrialRecord::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Envelope<'a> {
            config: &'a ExperimentConfig,
            support: &'a [usize],
            coefficients: &'a [f64],
            t_star: Option<f64>,
            trials: &'a [TrialRecord],
        }
        Ok(serde_json::to_string_pretty(&Envelope {
            config: &self.config,
            support: &self.support,
            coefficients: &self.coefficients,
            t_star: self.t_star,
            trials: &self.records,
        })?)
    }
}

fn resolve_graph(source: &GraphSource) -> Result<(WeightedGraph, CompatibleMetric)> {
    match (&source.generator, &source.file) {
        (Some(spec), None) => {
            let g = generate_graph(spec, &source.weights)?;
            let m = CompatibleMetric::for_graph(&g);
            Ok((g, m))
        }
        (None, Some(path)) => {
            let parsed = graph_file::read_graph_path(path)?;
            let m = parsed.metric_or_default();
            Ok((parsed.graph, m))
        }
        _ => Err(Error::ConfigInvalid(
            "graph needs exactly one source".into(),
        )),
    }
}

fn resolve_support(spec: &SupportSpec, metric: &CompatibleMetric) -> Result<Vec<usize>> {
    match spec {
        SupportSpec::Explicit { vertices } => {
            if vertices.is_empty() {
                return Err(Error::EmptySupport);
            }
            let mut seen = std::collections::HashSet::new();
            for &v in vertices {
                if v >= metric.n() {
                    return Err(Error::IndexOutOfRange {
                        index: v,
                        n: metric.n(),
                    });
                }
                if !seen.insert(v) {
                    return Err(Error::DuplicateSupportVertex(v));
                }
            }
            Ok(vertices.clone())
        }
        SupportSpec::Greedy { size, seed } => place_support(metric, *size, *seed),
    }
}

fn resolve_signal(spec: &SignalSpec, j: usize) -> Result<Vec<f64>> {
    if let Some(coeffs) = &spec.coefficients {
        if coeffs.len() != j {
            return Err(Error::DimensionMismatch {
                expected: j,
                got: coeffs.len(),
            });
        }
        return Ok(coeffs.clone());
    }
    let [lo, hi] = spec.magnitude_range;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    Ok((0..j)
        .map(|_| {
            let magnitude = rng.gen_range(lo..=hi);
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            sign * magnitude
        })
        .collect())
}

/// Runs the full grid. Per-trial failures are recorded, never propagated.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    config.validate()?;
    let (graph, metric) = resolve_graph(&config.graph)?;
    let spectral = SpectralData::decompose(&graph.laplacian())?;
    let constants = GraphConstants::from_parts(&spectral, &metric)?;
    let support = resolve_support(&config.support, &metric)?;
    let profile = SupportProfile::from_support(&metric, &support)?;
    let coefficients = resolve_signal(&config.signal, support.len())?;
    let signs = SignPattern::of_nonzero(&coefficients)?;

    let mut g_true = DVector::zeros(graph.n_vertices());
    for (slot, &v) in support.iter().enumerate() {
        g_true[v] = coefficients[slot];
    }

    // resolve the time grid
    let mut t_star = None;
    let (times, fractions): (Vec<f64>, Option<Vec<f64>>) = if let Some(fixed) = &config.time.fixed {
        (fixed.clone(), None)
    } else if let Some(fractions) = &config.time.t_star_fractions {
        let admissible = bounds::max_admissible_time(&constants, &profile);
        if admissible <= 0.0 {
            return Err(Error::ConfigInvalid(
                "no admissible time exists for this instance; use a fixed time grid".into(),
            ));
        }
        t_star = Some(admissible);
        (
            fractions.iter().map(|f| f * admissible).collect(),
            Some(fractions.clone()),
        )
    } else {
        let sweep = config.time.sweep.as_ref().expect("validated");
        let step = if sweep.count > 1 {
            (sweep.stop - sweep.start) / (sweep.count - 1) as f64
        } else {
            0.0
        };
        (
            (0..sweep.count)
                .map(|i| sweep.start + step * i as f64)
                .collect(),
            None,
        )
    };

    let options = config.solver.options();
    let mut records = Vec::with_capacity(times.len() * config.noise.eps.len());
    let mut trial = 0usize;

    for (ti, &t) in times.iter().enumerate() {
        for &eps in &config.noise.eps {
            let started = Instant::now();
            let record = run_trial(RunTrialArgs {
                trial,
                t_frac: fractions.as_ref().map(|f| f[ti]),
                t,
                eps,
                constants: &constants,
                profile: &profile,
                spectral: &spectral,
                support: &support,
                signs: &signs,
                g_true: &g_true,
                noise: &config.noise,
                build_certificate: config.certificate,
                options: &options,
            });
            let mut record = match record {
                Ok(r) => r,
                Err(e) => error_record(trial, t, eps, &constants, &profile, e),
            };
            record.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
            records.push(record);
            trial += 1;
        }
    }

    Ok(ExperimentRun {
        config: config.clone(),
        support,
        coefficients,
        t_star,
        records,
    })
}

struct RunTrialArgs<'a> {
    trial: usize,
    t_frac: Option<f64>,
    t: f64,
    eps: f64,
    constants: &'a GraphConstants,
    profile: &'a SupportProfile,
    spectral: &'a SpectralData,
    support: &'a [usize],
    signs: &'a SignPattern,
    g_true: &'a DVector<f64>,
    noise: &'a NoiseSpec,
    build_certificate: bool,
    options: &'a SolverOptions,
}

fn run_trial(args: RunTrialArgs<'_>) -> Result<TrialRecord> {
    let report = bounds::check_certificate_condition(args.constants, args.profile, args.t)?;
    let h_op = HeatOperator::new(args.spectral, args.t)?;

    let mut record = TrialRecord {
        trial: args.trial,
        t_frac: args.t_frac,
        t: args.t,
        eps: args.eps,
        n: args.constants.n,
        op_norm: args.constants.op_norm,
        gap: args.constants.gap,
        zeta: args.constants.zeta,
        j: args.profile.j,
        d_min: args.profile.d_min,
        cond1_lhs: report.cond1_lhs,
        cond1_rhs: report.cond1_rhs,
        cond2_lhs: report.cond2_lhs,
        cond2_rhs: report.cond2_rhs,
        cond1_ok: report.cond1_ok,
        cond2_ok: report.cond2_ok,
        inverse_norm_bound: report.inverse_norm_bound,
        cert_built: false,
        cert_interpolates: None,
        cert_strictly_interior: None,
        cert_unit_sup: None,
        cert_off_support_max: None,
        delta: None,
        err_l1: None,
        err_l2: None,
        residual: None,
        l1_norm: None,
        bound_l1: None,
        bound_held: None,
        lemma_split_ok: None,
        lemma_offsupport_ok: None,
        solver_status: None,
        solver_iterations: None,
        status: "ok".into(),
        wall_time_ms: 0.0,
    };

    let mut failures = Vec::new();

    let cert: Option<Certificate> = if args.build_certificate {
        match Certificate::construct(&h_op, args.support, args.signs) {
            Ok(c) => {
                let verdict = certificate::verify(&c, args.signs, certificate::DEFAULT_TOL);
                record.cert_built = true;
                record.cert_interpolates = Some(verdict.interpolates);
                record.cert_strictly_interior = Some(verdict.strictly_interior);
                record.cert_unit_sup = Some(verdict.unit_sup);
                record.cert_off_support_max = Some(c.off_support_max);
                Some(c)
            }
            Err(e) => {
                failures.push(format!("certificate: {e}"));
                None
            }
        }
    } else {
        None
    };

    let delta = match h_op.restrict(args.support).and_then(|m| m.invert()) {
        Ok(inv) => {
            let d = delta_from_inverse(&inv);
            record.delta = Some(d);
            Some(d)
        }
        Err(e) => {
            failures.push(format!("inverse: {e}"));
            None
        }
    };

    // synthesize the observation and solve
    let n = args.g_true.len();
    let mut rng = ChaCha20Rng::seed_from_u64(args.noise.seed);
    rng.set_stream(args.trial as u64);
    let w = match args.noise.model {
        NoiseModel::Sphere => sphere_noise(n, args.eps, &mut rng),
        NoiseModel::Gaussian => gaussian_noise_capped(n, args.eps, &mut rng),
    };
    let f = h_op.apply(args.g_true)? + w;
    let obs = Observation::new(f, args.t, args.eps)?;

    match recovery::solve(&h_op, &obs, args.options) {
        Ok(result) => {
            record.solver_status = Some(result.status.to_string());
            record.solver_iterations = Some(result.iterations);
            record.residual = Some(result.residual);
            record.l1_norm = Some(result.l1_norm);
            if !result.converged {
                failures.push("solver: max_iter".into());
            }
            if let Some(delta) = delta {
                let budget = ErrorBudget::new(args.profile.j, delta, args.eps)?;
                let audit =
                    audit_recovery(args.g_true, args.support, &result, &budget, cert.as_ref())?;
                record.err_l1 = Some(audit.err_l1);
                record.err_l2 = Some(audit.err_l2);
                record.bound_l1 = Some(audit.bound_l1);
                record.bound_held = Some(audit.bound_held);
                record.lemma_split_ok = Some(audit.lemma_split_ok);
                record.lemma_offsupport_ok = audit.lemma_offsupport_ok;
            }
        }
        Err(e) => failures.push(format!("solver: {e}")),
    }

    if !failures.is_empty() {
        record.status = failures.join("; ");
    }
    Ok(record)
}

fn error_record(
    trial: usize,
    t: f64,
    eps: f64,
    constants: &GraphConstants,
    profile: &SupportProfile,
    e: Error,
) -> TrialRecord {
    TrialRecord {
        trial,
        t_frac: None,
        t,
        eps,
        n: constants.n,
        op_norm: constants.op_norm,
        gap: constants.gap,
        zeta: constants.zeta,
        j: profile.j,
        d_min: profile.d_min,
        cond1_lhs: f64::NAN,
        cond1_rhs: f64::NAN,
        cond2_lhs: f64::NAN,
        cond2_rhs: f64::NAN,
        cond1_ok: false,
        cond2_ok: false,
        inverse_norm_bound: None,
        cert_built: false,
        cert_interpolates: None,
        cert_strictly_interior: None,
        cert_unit_sup: None,
        cert_off_support_max: None,
        delta: None,
        err_l1: None,
        err_l2: None,
        residual: None,
        l1_norm: None,
        bound_l1: None,
        bound_held: None,
        lemma_split_ok: None,
        lemma_offsupport_ok: None,
        solver_status: None,
        solver_iterations: None,
        status: format!("error: {e}"),
        wall_time_ms: 0.0,
    }
}
