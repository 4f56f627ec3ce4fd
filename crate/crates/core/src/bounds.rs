//! Closed-form heat-kernel bounds and the feasibility checks built on them.
//!
//! Diagonal entries of the kernel are sandwiched by
//! `1/N + e^{-t‖Δ‖}(N-1)/N ≤ K(t,x,x) ≤ 1/N + e^{-tλ}(N-1)/N`, and
//! off-diagonal entries obey the decay bound
//! `K(t,x,y) ≤ (2et/d(x,y))^{d(x,y)/2}`. Combining the two through a
//! Gershgorin argument yields a sufficient condition for `M^t` to be
//! invertible with a computable bound on `‖M^{-t}‖`, and a second, stronger
//! condition under which the dual certificate of the recovery problem
//! exists. Everything here is a pure function of a handful of scalars.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::CompatibleMetric;
use crate::spectral::SpectralData;

const E: f64 = std::f64::consts::E;

/// The scalars of a graph instance that every bound depends on.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GraphConstants {
    /// Vertex count N.
    pub n: usize,
    /// Operator norm ‖Δ‖.
    pub op_norm: f64,
    /// Smallest nonzero eigenvalue λ of −Δ.
    pub gap: f64,
    /// Smallest pairwise vertex distance ζ.
    pub zeta: f64,
}

impl GraphConstants {
    pub fn new(n: usize, op_norm: f64, gap: f64, zeta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::SingletonGraph);
        }
        let all_positive = op_norm > 0.0 && gap > 0.0 && zeta > 0.0;
        if !all_positive || gap > op_norm * (1.0 + 1e-12) {
            return Err(Error::ConfigInvalid(format!(
                "invalid graph constants: op_norm {op_norm}, gap {gap}, zeta {zeta}"
            )));
        }
        Ok(Self {
            n,
            op_norm,
            gap,
            zeta,
        })
    }

    pub fn from_parts(spectral: &SpectralData, metric: &CompatibleMetric) -> Result<Self> {
        Self::new(
            spectral.n(),
            spectral.operator_norm(),
            spectral.spectral_gap(),
            metric.min_vertex_distance()?,
        )
    }
}

/// Size and minimum separation of a support set.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SupportProfile {
    /// Support size J.
    pub j: usize,
    /// Minimum pairwise separation D within the support; `+∞` for J = 1,
    /// which defines every D-dependent term as zero.
    pub d_min: f64,
}

impl SupportProfile {
    pub fn new(j: usize, d_min: f64) -> Result<Self> {
        if j == 0 {
            return Err(Error::EmptySupport);
        }
        if d_min.is_nan() || d_min <= 0.0 {
            return Err(Error::NonPositiveDistance(d_min));
        }
        Ok(Self { j, d_min })
    }

    pub fn from_support(metric: &CompatibleMetric, support: &[usize]) -> Result<Self> {
        for &v in support {
            if v >= metric.n() {
                return Err(Error::IndexOutOfRange {
                    index: v,
                    n: metric.n(),
                });
            }
        }
        Self::new(support.len(), metric.min_separation(support))
    }
}

/// Both sufficient conditions evaluated at one time value.
///
/// Serializes to a flat record with exactly these field names, as JSON or
/// as a CSV row via [`FeasibilityReport::csv_row`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub t: f64,
    pub cond1_lhs: f64,
    pub cond1_rhs: f64,
    pub cond2_lhs: f64,
    pub cond2_rhs: f64,
    pub cond1_ok: bool,
    pub cond2_ok: bool,
    pub inverse_norm_bound: Option<f64>,
}

impl FeasibilityReport {
    pub const CSV_HEADER: &'static str =
        "t,cond1_lhs,cond1_rhs,cond2_lhs,cond2_rhs,cond1_ok,cond2_ok,inverse_norm_bound";

    pub fn csv_row(&self) -> String {
        let inb = match self.inverse_norm_bound {
            Some(v) => format!("{v}"),
            None => String::new(),
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.t,
            self.cond1_lhs,
            self.cond1_rhs,
            self.cond2_lhs,
            self.cond2_rhs,
            self.cond1_ok,
            self.cond2_ok,
            inb
        )
    }
}

/// `(d/2)`-power decay term `(2et/d)^{d/2}`, extended by its limits to
/// `t = 0` (zero) and `d = +∞` (zero).
fn decay_half(d: f64, t: f64) -> f64 {
    (0.5 * d * (2.0 * E * t / d).ln()).exp()
}

/// `(d/4)`-power variant `(4et/d)^{d/4}` used for vertices at distance
/// at least D/2 from the support.
fn decay_quarter(d: f64, t: f64) -> f64 {
    (0.25 * d * (4.0 * E * t / d).ln()).exp()
}

/// Lower and upper closed-form bounds on the diagonal `K(t,x,x)`.
pub fn diagonal_bounds(c: &GraphConstants, t: f64) -> Result<(f64, f64)> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let n = c.n as f64;
    let lower = 1.0 / n + (-t * c.op_norm).exp() * (n - 1.0) / n;
    let upper = 1.0 / n + (-t * c.gap).exp() * (n - 1.0) / n;
    Ok((lower, upper))
}

/// Off-diagonal decay bound `exp[-½ d log(d/(2et))] = (2et/d)^{d/2}`.
///
/// Values ≥ 1 are legal output: the bound has gone vacuous (`d ≤ 2et`), and
/// downstream feasibility checks simply fail.
pub fn folz_bound(dist: f64, t: f64) -> Result<f64> {
    if dist.is_nan() || dist <= 0.0 {
        return Err(Error::NonPositiveDistance(dist));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(decay_half(dist, t))
}

/// Sufficient condition for `M^t` to be invertible:
/// `(J-1)(2et/D)^{D/2} < 1/N + e^{-t‖Δ‖}(N-1)/N`.
///
/// Returns the strict verdict and the margin `rhs - lhs`.
pub fn check_invertibility(c: &GraphConstants, p: &SupportProfile, t: f64) -> Result<(bool, f64)> {
    let (lower, _) = diagonal_bounds(c, t)?;
    let lhs = if p.j <= 1 {
        0.0
    } else {
        (p.j - 1) as f64 * decay_half(p.d_min, t)
    };
    Ok((lhs < lower, lower - lhs))
}

/// Bound on both `‖M^{-t}‖₂` and `‖M^{-t}‖∞`:
/// the reciprocal of the invertibility margin.
pub fn inverse_norm_bound(c: &GraphConstants, p: &SupportProfile, t: f64) -> Result<f64> {
    let (ok, margin) = check_invertibility(c, p, t)?;
    if !ok {
        return Err(Error::ConditionViolated);
    }
    Ok(1.0 / margin)
}

/// Evaluates both feasibility conditions at time `t`.
///
/// Condition 1 is the invertibility check above; condition 2 is
/// `(2et/ζ)^{ζ/2} + (J-1)(4et/D)^{D/4} < rhs₁ - lhs₁`, whose success
/// guarantees the dual certificate construction.
pub fn check_certificate_condition(
    c: &GraphConstants,
    p: &SupportProfile,
    t: f64,
) -> Result<FeasibilityReport> {
    let (lower, _) = diagonal_bounds(c, t)?;
    let j1 = if p.j <= 1 { 0.0 } else { (p.j - 1) as f64 };
    let cond1_lhs = j1 * decay_half(p.d_min, t);
    let cond1_rhs = lower;
    let cond2_lhs = decay_half(c.zeta, t) + j1 * decay_quarter(p.d_min, t);
    let cond2_rhs = cond1_rhs - cond1_lhs;
    let cond1_ok = cond1_lhs < cond1_rhs;
    let cond2_ok = cond2_lhs < cond2_rhs;
    Ok(FeasibilityReport {
        t,
        cond1_lhs,
        cond1_rhs,
        cond2_lhs,
        cond2_rhs,
        cond1_ok,
        cond2_ok,
        inverse_norm_bound: cond1_ok.then(|| 1.0 / (cond1_rhs - cond1_lhs)),
    })
}

fn both_conditions_hold(c: &GraphConstants, p: &SupportProfile, t: f64) -> bool {
    match check_certificate_condition(c, p, t) {
        Ok(r) => r.cond1_ok && r.cond2_ok,
        Err(_) => false,
    }
}

/// Largest time `T*` at which both conditions still hold, by bisection to
/// relative tolerance 1e-9.
///
/// Every left-hand term is increasing and every right-hand term decreasing
/// in `t`, so the feasible set is an interval `(0, T*)`. Beyond
/// `min(D, ζ)/(2e)` one of the decay terms reaches 1 while the right-hand
/// sides stay below 1, so the search is capped there. Returns 0 when no
/// time above 1e-15 is feasible.
pub fn max_admissible_time(c: &GraphConstants, p: &SupportProfile) -> f64 {
    let cap = p.d_min.min(c.zeta) / (2.0 * E);
    if !cap.is_finite() || cap <= 0.0 {
        return 0.0;
    }
    if both_conditions_hold(c, p, cap) {
        return cap;
    }
    let mut lo = cap * 0.5;
    while !both_conditions_hold(c, p, lo) {
        lo *= 0.5;
        if lo <= 1e-15 {
            return 0.0;
        }
    }
    let mut hi = lo * 2.0;
    while hi - lo > 1e-9 * lo {
        let mid = 0.5 * (lo + hi);
        if both_conditions_hold(c, p, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
