//! The constrained ℓ¹ program and its error analysis.
//!
//! `solve` minimizes `‖g̃‖₁` over `{g̃ : ‖K(t)g̃ - f‖₂ ≤ ε}` by
//! Douglas–Rachford splitting: alternating soft-thresholding of the ℓ¹ term
//! with exact projection onto the constraint set. The projection is
//! closed-form in the Laplacian eigenbasis up to a scalar Newton solve for
//! the multiplier, and for ε = 0 it degenerates to the spectral solve of
//! the equality constraint. A feasible primal point and a scaled dual
//! candidate give a duality gap at every iterate, which is the stopping
//! criterion and the optimality certificate.
//!
//! `brute_force` is an independent oracle for small instances: it
//! enumerates every candidate support and solves each slice through a
//! penalized coordinate-descent path, never touching the splitting code.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat::{HeatOperator, RestrictedInverse};

/// Slack used by audit inequalities; covers solver tolerance.
pub const AUDIT_TOL: f64 = 1e-6;

/// Observed data: a smoothed, possibly noisy vertex function.
#[derive(Debug, Clone)]
pub struct Observation {
    pub f: DVector<f64>,
    pub t: f64,
    /// Noise tolerance ε; zero means the equality constraint.
    pub eps: f64,
}

impl Observation {
    pub fn new(f: DVector<f64>, t: f64, eps: f64) -> Result<Self> {
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::ConfigInvalid(format!(
                "noise tolerance {eps} must be ≥ 0"
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::ConfigInvalid(
                "observation contains non-finite entries".into(),
            ));
        }
        Ok(Self { f, t, eps })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Absolute duality-gap tolerance declaring optimality.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Proximal step γ; the kernel has unit spectral norm, so 1 is a safe
    /// default scale.
    pub step: f64,
    pub over_relaxation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            max_iter: 50_000,
            step: 1.0,
            over_relaxation: 1.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveStatus::Optimal => write!(f, "optimal"),
            SolveStatus::MaxIter => write!(f, "max_iter"),
            SolveStatus::Infeasible => write!(f, "infeasible"),
        }
    }
}

/// Solver output; `g_hat` is always feasible when the status is `Optimal`.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryResult {
    pub g_hat: Vec<f64>,
    pub l1_norm: f64,
    /// `‖K(t)·ĝ - f‖₂`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub status: SolveStatus,
    /// Final duality gap (for `solve`) or 0 (oracle).
    pub gap: f64,
}

impl RecoveryResult {
    pub fn g_hat_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.g_hat)
    }
}

fn soft_threshold(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// Projection of `w_hat` (eigen coordinates) onto
/// `{u : Σ (d_i u_i - φ_i)² ≤ ε²}`. Returns the projected point and the
/// KKT multiplier μ ≥ 0 (zero when `w_hat` is already inside).
///
/// The multiplier solves `ψ(μ) = Σ ρ_i/(1+μ d_i²)² = ε²` with
/// `ρ_i = (d_i ŵ_i - φ_i)²`; ψ is convex and decreasing, so Newton from
/// below converges monotonically.
fn project_ball(
    w_hat: &DVector<f64>,
    d: &DVector<f64>,
    phi: &DVector<f64>,
    eps: f64,
    warm_mu: f64,
) -> (DVector<f64>, f64) {
    let n = w_hat.len();
    let rho = DVector::from_fn(n, |i, _| (d[i] * w_hat[i] - phi[i]).powi(2));
    let eps2 = eps * eps;
    let psi = |mu: f64| -> f64 {
        (0..n)
            .map(|i| rho[i] / (1.0 + mu * d[i] * d[i]).powi(2))
            .sum()
    };
    if psi(0.0) <= eps2 {
        return (w_hat.clone(), 0.0);
    }
    let mut mu = warm_mu.max(0.0);
    for _ in 0..200 {
        let denom: Vec<f64> = (0..n).map(|i| 1.0 + mu * d[i] * d[i]).collect();
        let value: f64 = (0..n).map(|i| rho[i] / denom[i].powi(2)).sum();
        if (value - eps2).abs() <= 1e-12 * eps2 {
            break;
        }
        let slope: f64 = (0..n)
            .map(|i| -2.0 * rho[i] * d[i] * d[i] / denom[i].powi(3))
            .sum();
        if slope == 0.0 {
            break;
        }
        mu = (mu + (value - eps2) / (-slope)).max(0.0);
    }
    let u = DVector::from_fn(n, |i, _| {
        (w_hat[i] + mu * d[i] * phi[i]) / (1.0 + mu * d[i] * d[i])
    });
    (u, mu)
}

/// Solves the ℓ¹ program `min ‖g̃‖₁ s.t. ‖K(t)g̃ - f‖₂ ≤ ε`.
///
/// For ε = 0 the feasible set is the single point `K(t)^{-1} f`, reached
/// through the same splitting path with an exact spectral projection; the
/// iteration still runs until the duality gap certifies optimality.
pub fn solve(
    h_op: &HeatOperator,
    obs: &Observation,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    let n = h_op.n();
    if obs.f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: obs.f.len(),
        });
    }
    if obs.t != h_op.t() {
        return Err(Error::TimeMismatch {
            observation: obs.t,
            operator: h_op.t(),
        });
    }

    let basis = h_op.basis();
    let d = h_op.kernel_eigenvalues();
    let phi = basis.transpose() * &obs.f;
    let gamma = opts.step;
    let rho = opts.over_relaxation;

    // ε = 0: the projection target is constant
    let equality_point = if obs.eps == 0.0 {
        Some(DVector::from_fn(n, |i, _| phi[i] / d[i]))
    } else {
        None
    };

    let mut z = DVector::zeros(n);
    let mut warm_mu = 0.0;
    let mut best = None;
    let mut iterations = 0;

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        let g = z.map(|v| soft_threshold(v, gamma));
        let w = 2.0 * &g - &z;
        let w_hat = basis.transpose() * &w;

        let (u, y_hat) = match &equality_point {
            Some(u0) => {
                // dual candidate ŷ with K·ŷ = (w - r)/γ, solved spectrally
                let y = DVector::from_fn(n, |i, _| (w_hat[i] - u0[i]) / (gamma * d[i]));
                (u0.clone(), y)
            }
            None => {
                let (u, mu) = project_ball(&w_hat, &d, &phi, obs.eps, warm_mu);
                warm_mu = mu;
                let y = DVector::from_fn(n, |i, _| mu * (d[i] * u[i] - phi[i]) / gamma);
                (u, y)
            }
        };
        let r = basis * &u;

        // duality gap at the feasible point r
        let primal = r.iter().map(|v| v.abs()).sum::<f64>();
        let k_y = basis * DVector::from_fn(n, |i, _| d[i] * y_hat[i]);
        let scale = k_y.amax().max(1.0);
        let dual = (-y_hat.dot(&phi) - obs.eps * y_hat.norm()) / scale;
        let gap = primal - dual;

        if gap.abs() <= opts.gap_tol {
            let residual = DVector::from_fn(n, |i, _| d[i] * u[i] - phi[i]).norm();
            return Ok(RecoveryResult {
                g_hat: r.iter().copied().collect(),
                l1_norm: primal,
                residual,
                iterations,
                converged: true,
                status: SolveStatus::Optimal,
                gap,
            });
        }
        z += rho * (&r - &g);
        best = Some((r, u, primal, gap));
    }

    // max_iter reached: return the last feasible iterate
    let (r, u, primal, gap) = best.expect("max_iter is positive");
    let residual = DVector::from_fn(n, |i, _| d[i] * u[i] - phi[i]).norm();
    Ok(RecoveryResult {
        g_hat: r.iter().copied().collect(),
        l1_norm: primal,
        residual,
        iterations,
        converged: false,
        status: SolveStatus::MaxIter,
        gap,
    })
}

const BRUTE_MAX_N: usize = 14;
const BRUTE_MAX_SUPPORT: usize = 3;

/// Independent oracle: scans every support of size ≤ `max_support` and
/// minimizes the slice-restricted program along a penalized
/// coordinate-descent path. Equals the global optimum whenever the true
/// minimizer is at most `max_support`-sparse.
pub fn brute_force(
    h_op: &HeatOperator,
    obs: &Observation,
    max_support: usize,
) -> Result<RecoveryResult> {
    let n = h_op.n();
    if obs.f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: obs.f.len(),
        });
    }
    if n > BRUTE_MAX_N || max_support > BRUTE_MAX_SUPPORT {
        return Err(Error::TooLarge {
            n,
            max_n: BRUTE_MAX_N,
            support: max_support,
            max_support: BRUTE_MAX_SUPPORT,
        });
    }

    let f_norm = obs.f.norm();
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut scanned = 0usize;

    // empty support: feasible iff the origin already explains f
    if f_norm <= obs.eps + 1e-12 {
        best = Some((0.0, DVector::zeros(n)));
    }

    let mut supports: Vec<Vec<usize>> = Vec::new();
    let mut stack = Vec::new();
    enumerate_supports(n, max_support, 0, &mut stack, &mut supports);

    for support in &supports {
        scanned += 1;
        if let Some((value, coeffs)) = minimize_on_support(h_op, obs, support) {
            let better = match &best {
                Some((bv, _)) => value < *bv,
                None => true,
            };
            if better {
                let mut g = DVector::zeros(n);
                for (slot, &v) in support.iter().enumerate() {
                    g[v] = coeffs[slot];
                }
                best = Some((value, g));
            }
        }
    }

    match best {
        Some((value, g)) => {
            let residual = (h_op.kernel() * &g - &obs.f).norm();
            Ok(RecoveryResult {
                g_hat: g.iter().copied().collect(),
                l1_norm: value,
                residual,
                iterations: scanned,
                converged: true,
                status: SolveStatus::Optimal,
                gap: 0.0,
            })
        }
        None => Ok(RecoveryResult {
            g_hat: vec![0.0; n],
            l1_norm: 0.0,
            residual: f_norm,
            iterations: scanned,
            converged: false,
            status: SolveStatus::Infeasible,
            gap: 0.0,
        }),
    }
}

fn enumerate_supports(
    n: usize,
    max_k: usize,
    start: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if !stack.is_empty() {
        out.push(stack.clone());
    }
    if stack.len() == max_k {
        return;
    }
    for v in start..n {
        stack.push(v);
        enumerate_supports(n, max_k, v + 1, stack, out);
        stack.pop();
    }
}

/// Minimum ℓ¹ norm over `{c : ‖A c - f‖ ≤ ε}` for the kernel columns of one
/// support, or `None` when the slice is infeasible.
fn minimize_on_support(
    h_op: &HeatOperator,
    obs: &Observation,
    support: &[usize],
) -> Option<(f64, DVector<f64>)> {
    let n = h_op.n();
    let k = support.len();
    let a = DMatrix::from_fn(n, k, |r, c| h_op.entry(r, support[c]));
    let gram = a.transpose() * &a;
    let atf = a.transpose() * &obs.f;

    // least-squares point of the slice
    let c_ls = gram.clone().cholesky()?.solve(&atf);
    let ls_residual = (&a * &c_ls - &obs.f).norm();

    if obs.eps == 0.0 {
        let tol = 1e-8 * obs.f.norm().max(1.0);
        if ls_residual <= tol {
            let value = c_ls.iter().map(|v| v.abs()).sum();
            return Some((value, c_ls));
        }
        return None;
    }

    if ls_residual > obs.eps {
        // slice never reaches the ball (tangency within roundoff counts)
        if ls_residual <= obs.eps + 1e-12 {
            let value = c_ls.iter().map(|v| v.abs()).sum();
            return Some((value, c_ls));
        }
        return None;
    }

    // the origin is handled by the empty support; here the constraint is
    // active, so follow the penalized path ‖c‖₁ + μ/2 ‖Ac - f‖² and find μ
    // with residual exactly ε
    let residual_at = |mu: f64, warm: &DVector<f64>| -> (f64, DVector<f64>) {
        let c = lasso_cd(&gram, &atf, mu, warm);
        let res = (&a * &c - &obs.f).norm();
        (res, c)
    };

    let mut warm = DVector::zeros(k);
    let mut mu_hi = 1.0;
    let (mut res_hi, mut c_hi) = residual_at(mu_hi, &warm);
    let mut doubles = 0;
    while res_hi > obs.eps {
        mu_hi *= 2.0;
        doubles += 1;
        if doubles > 120 {
            return Some((c_hi.iter().map(|v| v.abs()).sum(), c_hi));
        }
        let out = residual_at(mu_hi, &c_hi);
        res_hi = out.0;
        c_hi = out.1;
    }
    let mut mu_lo = 0.0;
    let mut c_best = c_hi;
    for _ in 0..200 {
        let mid = if mu_lo == 0.0 {
            mu_hi * 0.5
        } else {
            0.5 * (mu_lo + mu_hi)
        };
        let (res, c) = residual_at(mid, &warm);
        warm = c.clone();
        if res > obs.eps {
            mu_lo = mid;
        } else {
            mu_hi = mid;
            c_best = c;
        }
        if (mu_hi - mu_lo) <= 1e-14 * mu_hi {
            break;
        }
    }
    let value = c_best.iter().map(|v| v.abs()).sum();
    Some((value, c_best))
}

/// Coordinate descent for `min ‖c‖₁ + μ/2 ‖Ac - f‖²` given the Gram matrix.
fn lasso_cd(gram: &DMatrix<f64>, atf: &DVector<f64>, mu: f64, warm: &DVector<f64>) -> DVector<f64> {
    let k = atf.len();
    let mut c = warm.clone();
    for _ in 0..100_000 {
        let mut max_delta = 0.0_f64;
        for i in 0..k {
            let qii = gram[(i, i)];
            let mut cross = 0.0;
            for j in 0..k {
                if j != i {
                    cross += gram[(i, j)] * c[j];
                }
            }
            let lin = atf[i] - cross;
            let new = soft_threshold(lin, 1.0 / mu) / qii;
            max_delta = max_delta.max((new - c[i]).abs());
            c[i] = new;
        }
        if max_delta <= 1e-15 * c.amax().max(1.0) {
            break;
        }
    }
    c
}

/// `δ` with `‖M^{-t}‖ = 1 + δ`, taking the larger of the ℓ² and ℓ∞ norms
/// so every step of the noisy analysis is covered. Can be negative when
/// both norms are below one.
pub fn delta_from_inverse(inv: &RestrictedInverse) -> f64 {
    inv.norm_l2().max(inv.norm_linf()) - 1.0
}

/// The recovery error budget `4(1+δ)√J·ε`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub j: usize,
    pub delta: f64,
    pub eps: f64,
    pub bound_l1: f64,
}

impl ErrorBudget {
    pub fn new(j: usize, delta: f64, eps: f64) -> Result<Self> {
        if j == 0 {
            return Err(Error::EmptySupport);
        }
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::ConfigInvalid(format!(
                "noise tolerance {eps} must be ≥ 0"
            )));
        }
        let bound_l1 = 4.0 * (1.0 + delta) * (j as f64).sqrt() * eps;
        Ok(Self {
            j,
            delta,
            eps,
            bound_l1,
        })
    }
}

/// The inequality chain of the noisy-recovery analysis, checked on one
/// solved instance.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryAudit {
    pub err_l1: f64,
    pub err_l2: f64,
    /// `‖ĝ_{S^c}‖₁`: recovered mass off the true support.
    pub off_support_l1: f64,
    /// `⟨η_S, h_S⟩` with η = g - ĝ, when a certificate is supplied.
    pub inner_eta_h: Option<f64>,
    /// `‖ĝ-g‖₁ ≤ 2√J(1+δ)ε + ‖ĝ_{S^c}‖₁`.
    pub lemma_split_ok: bool,
    /// `‖ĝ‖₁ ≥ ‖g‖₁ - ⟨η_S, h_S⟩ + ‖ĝ_{S^c}‖₁`.
    pub lemma_norm_ok: Option<bool>,
    /// `‖ĝ_{S^c}‖₁ ≤ |⟨η_S, h_S⟩|`.
    pub lemma_offsupport_ok: Option<bool>,
    pub bound_l1: f64,
    /// `‖ĝ-g‖₁ ≤ 4(1+δ)√J·ε`.
    pub bound_held: bool,
    /// `‖ĝ-g‖₂ ≤ ‖ĝ-g‖₁`.
    pub l2_le_l1: bool,
}

/// Evaluates every inequality of the noisy chain for a recovered signal.
pub fn audit_recovery(
    g_true: &DVector<f64>,
    support: &[usize],
    result: &RecoveryResult,
    budget: &ErrorBudget,
    cert: Option<&crate::certificate::Certificate>,
) -> Result<RecoveryAudit> {
    let n = g_true.len();
    if result.g_hat.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: result.g_hat.len(),
        });
    }
    let g_hat = result.g_hat_vector();
    let eta = g_true - &g_hat;
    let err_l1 = eta.iter().map(|v| v.abs()).sum::<f64>();
    let err_l2 = eta.norm();

    let mut on_support = vec![false; n];
    for &v in support {
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, n });
        }
        on_support[v] = true;
    }
    let off_support_l1: f64 = (0..n)
        .filter(|&x| !on_support[x])
        .map(|x| g_hat[x].abs())
        .sum();

    let j_term = 2.0 * (budget.j as f64).sqrt() * (1.0 + budget.delta) * budget.eps;
    let lemma_split_ok = err_l1 <= j_term + off_support_l1 + AUDIT_TOL;

    let (inner_eta_h, lemma_norm_ok, lemma_offsupport_ok) = match cert {
        Some(c) => {
            let inner: f64 = support.iter().map(|&v| eta[v] * c.values[v]).sum();
            let g_hat_l1: f64 = g_hat.iter().map(|v| v.abs()).sum();
            let g_l1: f64 = g_true.iter().map(|v| v.abs()).sum();
            let norm_ok = g_hat_l1 >= g_l1 - inner + off_support_l1 - AUDIT_TOL;
            let off_ok = off_support_l1 <= inner.abs() + AUDIT_TOL;
            (Some(inner), Some(norm_ok), Some(off_ok))
        }
        None => (None, None, None),
    };

    Ok(RecoveryAudit {
        err_l1,
        err_l2,
        off_support_l1,
        inner_eta_h,
        lemma_split_ok,
        lemma_norm_ok,
        lemma_offsupport_ok,
        bound_l1: budget.bound_l1,
        bound_held: err_l1 <= budget.bound_l1 + AUDIT_TOL,
        l2_le_l1: err_l2 <= err_l1 + AUDIT_TOL,
    })
}

/// Noise drawn uniformly on the sphere of radius ε (saturating `‖w‖ = ε`).
pub fn sphere_noise<R: Rng>(n: usize, eps: f64, rng: &mut R) -> DVector<f64> {
    if eps == 0.0 || n == 0 {
        return DVector::zeros(n);
    }
    loop {
        let w = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = w.norm();
        if norm > 1e-12 {
            return w * (eps / norm);
        }
    }
}

/// Gaussian noise with per-coordinate variance ε²/n, rescaled onto the
/// sphere if it lands outside the ball.
pub fn gaussian_noise_capped<R: Rng>(n: usize, eps: f64, rng: &mut R) -> DVector<f64> {
    if eps == 0.0 || n == 0 {
        return DVector::zeros(n);
    }
    let sigma = eps / (n as f64).sqrt();
    let w = DVector::from_fn(n, |_, _| sigma * rng.sample::<f64, _>(StandardNormal));
    let norm = w.norm();
    if norm > eps {
        w * (eps / norm)
    } else {
        w
    }
}
