//! Dual certificates: `h = e^{tΔ} a` with `a = M^{-t} ε` supported on S.
//!
//! A certificate interpolating a sign pattern on S while staying strictly
//! below 1 in magnitude off S witnesses that the sparse signal with those
//! signs is the unique ℓ¹ minimizer consistent with the noiseless data.
//! Certificates are constructed for any `t > 0` the restricted operator can
//! be inverted at; whether the result actually satisfies the three
//! properties is a separate verification step, so the slack beyond the
//! sufficient conditions can be explored.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat::HeatOperator;

/// Default verification tolerance: strict inequalities are asserted with
/// this much slack, interpolation equalities within it.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A choice of `ε_j ∈ {±1}` per support vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct SignPattern {
    signs: Vec<f64>,
}

impl SignPattern {
    pub fn new(signs: Vec<f64>) -> Result<Self> {
        for (index, &value) in signs.iter().enumerate() {
            if value != 1.0 && value != -1.0 {
                return Err(Error::InvalidSign { index, value });
            }
        }
        Ok(Self { signs })
    }

    /// Signs of the nonzero entries of a coefficient vector.
    pub fn of_nonzero(values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|v| if *v >= 0.0 { 1.0 } else { -1.0 })
                .collect(),
        )
    }

    pub fn all_plus(len: usize) -> Self {
        Self {
            signs: vec![1.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.signs)
    }
}

/// The certificate function on all of V, with its construction data.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub support: Vec<usize>,
    pub t: f64,
    /// Coefficients `a_j` solving `M^t a = ε`.
    pub coeffs: Vec<f64>,
    /// `h(x) = Σ_j a_j K(t, x, v_j)` on every vertex.
    pub values: Vec<f64>,
    pub sup_norm: f64,
    /// `max_{x ∉ S} |h(x)|`; zero when S = V.
    pub off_support_max: f64,
}

impl Certificate {
    /// Solves `M^t a = ε` through the SPD factorization and extends
    /// `h = e^{tΔ} a` to the whole graph.
    pub fn construct(h_op: &HeatOperator, support: &[usize], eps: &SignPattern) -> Result<Self> {
        let restricted = h_op.restrict(support)?;
        if eps.len() != support.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                got: eps.len(),
            });
        }
        let rhs = eps.as_vector();
        let coeffs = restricted.solve(&rhs)?;
        let solve_residual = (restricted.matrix() * &coeffs - &rhs).amax();
        if solve_residual.is_nan() || solve_residual >= 1e-10 {
            return Err(Error::NumericallySingular);
        }

        let n = h_op.n();
        let mut extended = DVector::zeros(n);
        for (slot, &v) in support.iter().enumerate() {
            extended[v] = coeffs[slot];
        }
        let values = h_op.apply(&extended)?;

        let on_support: Vec<bool> = {
            let mut mask = vec![false; n];
            for &v in support {
                mask[v] = true;
            }
            mask
        };
        let sup_norm = values.amax();
        let off_support_max = values
            .iter()
            .zip(&on_support)
            .filter(|(_, &on)| !on)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max);

        Ok(Self {
            support: support.to_vec(),
            t: h_op.t(),
            coeffs: coeffs.iter().copied().collect(),
            values: values.iter().copied().collect(),
            sup_norm,
            off_support_max,
        })
    }

    pub fn value_at(&self, vertex: usize) -> f64 {
        self.values[vertex]
    }

    /// `‖a‖∞`.
    pub fn coeff_sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }

    /// Margin `1 - max_{x ∉ S} |h(x)|` of the strict-interior property.
    pub fn interior_margin(&self) -> f64 {
        1.0 - self.off_support_max
    }

    /// `h` as plot-ready CSV, one `vertex,value` row per vertex.
    pub fn values_csv(&self) -> String {
        let mut out = String::from("vertex,value\n");
        for (v, h) in self.values.iter().enumerate() {
            out.push_str(&format!("{v},{h}\n"));
        }
        out
    }
}

/// Outcome of checking the three certificate properties.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CertificateVerdict {
    /// Property (ii): `h(v_j) = ε_j` within tolerance.
    pub interpolates: bool,
    /// Property (iii): `|h(x)| < 1 - tol` off the support.
    pub strictly_interior: bool,
    /// Property (i): `‖h‖∞ = 1` within tolerance.
    pub unit_sup: bool,
    /// Largest violation across the three properties; at most zero when all
    /// hold with margin.
    pub worst_violation: f64,
}

impl CertificateVerdict {
    pub fn all_hold(&self) -> bool {
        self.interpolates && self.strictly_interior && self.unit_sup
    }
}

/// Checks interpolation, strict interiority and unit sup norm at `tol`.
pub fn verify(cert: &Certificate, eps: &SignPattern, tol: f64) -> CertificateVerdict {
    let interp_err = cert
        .support
        .iter()
        .zip(eps.signs())
        .map(|(&v, &s)| (cert.values[v] - s).abs())
        .fold(0.0, f64::max);
    let sup_err = (cert.sup_norm - 1.0).abs();
    let interior_excess = cert.off_support_max - (1.0 - tol);
    CertificateVerdict {
        interpolates: interp_err <= tol,
        strictly_interior: interior_excess < 0.0,
        unit_sup: sup_err <= tol,
        worst_violation: interp_err.max(sup_err).max(interior_excess),
    }
}

/// Uniqueness check: the certificate interpolates the signs of `g`
/// on exactly its support and is strictly interior elsewhere, so `g` is the
/// unique solution of the ℓ¹ program for `f = e^{tΔ} g`.
pub fn certify_uniqueness(
    cert: &Certificate,
    g_support: &[usize],
    g_signs: &SignPattern,
    tol: f64,
) -> bool {
    if g_support.len() != cert.support.len() || g_signs.len() != g_support.len() {
        return false;
    }
    let mut cert_sign = std::collections::HashMap::new();
    for &v in &cert.support {
        cert_sign.insert(v, cert.values[v]);
    }
    for (&v, &s) in g_support.iter().zip(g_signs.signs()) {
        match cert_sign.get(&v) {
            Some(&h) if (h - s).abs() <= tol => {}
            _ => return false,
        }
    }
    cert.off_support_max < 1.0 - tol
}

/// JSON shape of a certificate plus its verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub support: Vec<usize>,
    pub t: f64,
    pub coeffs: Vec<f64>,
    pub sup_norm: f64,
    pub off_support_max: f64,
    pub verdict: CertificateVerdict,
}

impl CertificateRecord {
    pub fn new(cert: &Certificate, verdict: CertificateVerdict) -> Self {
        Self {
            support: cert.support.clone(),
            t: cert.t,
            coeffs: cert.coeffs.clone(),
            sup_norm: cert.sup_norm,
            off_support_max: cert.off_support_max,
            verdict,
        }
    }
}
