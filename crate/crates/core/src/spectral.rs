//! Symmetric eigendecomposition of the Laplacian.
//!
//! The decomposition is computed once per graph and reused for every time
//! value: the heat operator, its operator norm `‖Δ‖` and the spectral gap λ
//! all come from the same factorization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::LaplacianMatrix;

/// Relative threshold for treating an eigenvalue as the zero mode.
const ZERO_MODE_REL_TOL: f64 = 1e-10;

/// Eigenvalues (ascending, all ≤ 0) and orthonormal eigenvectors of Δ.
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralData {
    /// Full symmetric eigendecomposition of the Laplacian.
    ///
    /// Eigenvalues in `(0, 1e-10·max(1, ‖Δ‖)]` are clamped to zero; they are
    /// the numerical image of the constant eigenvector. A positive eigenvalue
    /// beyond that threshold means the input was not a Laplacian and is
    /// reported as a solver failure.
    pub fn decompose(l: &LaplacianMatrix) -> Result<Self> {
        let se = SymmetricEigen::try_new(l.matrix().clone(), f64::EPSILON, 100_000)
            .ok_or(Error::EigensolverFailure)?;

        let n = l.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));

        let mut eigenvalues = DVector::zeros(n);
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            eigenvalues[dst] = se.eigenvalues[src];
            eigenvectors.set_column(dst, &se.eigenvectors.column(src));
        }

        let scale = eigenvalues.amax().max(1.0);
        let clamp = ZERO_MODE_REL_TOL * scale;
        for ev in eigenvalues.iter_mut() {
            if *ev > 0.0 {
                if *ev > clamp {
                    return Err(Error::EigensolverFailure);
                }
                *ev = 0.0;
            }
        }

        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues of Δ sorted ascending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as matrix columns, aligned with the
    /// eigenvalue order.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `‖Δ‖ = max |λ_i|`, attained at the most negative eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        -self.eigenvalues[0]
    }

    /// Smallest nonzero eigenvalue of −Δ.
    pub fn spectral_gap(&self) -> f64 {
        let zero_tol = ZERO_MODE_REL_TOL * self.operator_norm().max(1.0);
        self.eigenvalues
            .iter()
            .map(|&ev| -ev)
            .filter(|&v| v > zero_tol)
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of eigenvalues identified as the zero mode.
    pub fn zero_multiplicity(&self) -> usize {
        let zero_tol = ZERO_MODE_REL_TOL * self.operator_norm().max(1.0);
        self.eigenvalues
            .iter()
            .filter(|&&ev| ev.abs() <= zero_tol)
            .count()
    }
}
