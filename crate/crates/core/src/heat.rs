//! The heat semigroup `e^{tΔ}`, its kernel, and the restriction `M^t` to a
//! support set.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::spectral::SpectralData;

/// Dense heat kernel `K(t, x, y) = (e^{tΔ} δ_y)(x)` at a fixed time,
/// together with the eigenpairs it was built from. Keeping the basis around
/// lets the recovery solver project onto the constraint set exactly.
#[derive(Debug, Clone)]
pub struct HeatOperator {
    t: f64,
    kernel: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    basis: DMatrix<f64>,
}

impl HeatOperator {
    /// Builds `K(t) = V · diag(e^{tλ}) · Vᵀ`.
    pub fn new(spectral: &SpectralData, t: f64) -> Result<Self> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let n = spectral.n();
        let v = spectral.eigenvectors();
        let exp = DVector::from_fn(n, |i, _| (t * spectral.eigenvalues()[i]).exp());
        let mut kernel = v * DMatrix::from_diagonal(&exp) * v.transpose();
        // enforce exact symmetry lost to roundoff
        for x in 0..n {
            for y in (x + 1)..n {
                let s = 0.5 * (kernel[(x, y)] + kernel[(y, x)]);
                kernel[(x, y)] = s;
                kernel[(y, x)] = s;
            }
        }
        Ok(Self {
            t,
            kernel,
            eigenvalues: spectral.eigenvalues().clone(),
            basis: v.clone(),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.kernel.nrows()
    }

    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.kernel[(x, y)]
    }

    /// Eigenvalues of Δ (not of the kernel), ascending.
    pub fn laplacian_eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenbasis shared with the Laplacian.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Kernel eigenvalues `e^{tλ_i}` in the basis order.
    pub fn kernel_eigenvalues(&self) -> DVector<f64> {
        DVector::from_fn(self.n(), |i, _| (self.t * self.eigenvalues[i]).exp())
    }

    /// `K(t) · f`.
    pub fn apply(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        if f.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: f.len(),
            });
        }
        Ok(&self.kernel * f)
    }

    /// The `J×J` principal submatrix on a support set, in the given order.
    pub fn restrict(&self, support: &[usize]) -> Result<RestrictedOperator> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        let n = self.n();
        let mut seen = std::collections::HashSet::new();
        for &v in support {
            if v >= n {
                return Err(Error::IndexOutOfRange { index: v, n });
            }
            if !seen.insert(v) {
                return Err(Error::DuplicateSupportVertex(v));
            }
        }
        let j = support.len();
        let matrix = DMatrix::from_fn(j, j, |a, b| self.kernel[(support[a], support[b])]);
        Ok(RestrictedOperator {
            support: support.to_vec(),
            matrix,
        })
    }
}

/// `M^t`: the heat operator restricted to `ℓ²(S)`. Symmetric positive
/// definite with diagonal entries in `(0, 1]`.
#[derive(Debug, Clone)]
pub struct RestrictedOperator {
    support: Vec<usize>,
    matrix: DMatrix<f64>,
}

impl RestrictedOperator {
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn j(&self) -> usize {
        self.support.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Per-row Gershgorin lower bound on the smallest eigenvalue,
    /// `min_k (m_kk - Σ_{j≠k} |m_kj|)`. Diagnostic only; the feasibility
    /// checks use the closed-form worst case instead.
    pub fn gershgorin_lower_bound(&self) -> f64 {
        let j = self.j();
        (0..j)
            .map(|k| {
                let off: f64 = (0..j)
                    .filter(|&c| c != k)
                    .map(|c| self.matrix[(k, c)].abs())
                    .sum();
                self.matrix[(k, k)] - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Inverts through a symmetric positive-definite factorization. A failed
    /// factorization or a residual above 1e-8 reports the operator as
    /// numerically singular.
    pub fn invert(&self) -> Result<RestrictedInverse> {
        let chol = self
            .matrix
            .clone()
            .cholesky()
            .ok_or(Error::NumericallySingular)?;
        let mut inverse = chol.inverse();
        let j = self.j();
        for a in 0..j {
            for b in (a + 1)..j {
                let s = 0.5 * (inverse[(a, b)] + inverse[(b, a)]);
                inverse[(a, b)] = s;
                inverse[(b, a)] = s;
            }
        }
        let residual = (&self.matrix * &inverse - DMatrix::identity(j, j)).amax();
        if residual.is_nan() || residual >= 1e-8 {
            return Err(Error::NumericallySingular);
        }
        let norm_linf = inverse
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let norm_l2 = SymmetricEigen::try_new(inverse.clone(), f64::EPSILON, 100_000)
            .map(|se| se.eigenvalues.amax())
            .ok_or(Error::EigensolverFailure)?;
        Ok(RestrictedInverse {
            matrix: inverse,
            residual,
            norm_l2,
            norm_linf,
        })
    }

    /// Solves `M^t · a = rhs` through the SPD factorization.
    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        if rhs.len() != self.j() {
            return Err(Error::DimensionMismatch {
                expected: self.j(),
                got: rhs.len(),
            });
        }
        let chol = self
            .matrix
            .clone()
            .cholesky()
            .ok_or(Error::NumericallySingular)?;
        Ok(chol.solve(rhs))
    }
}

/// `M^{-t}` with its residual and the two operator norms used by the
/// recovery analysis.
#[derive(Debug, Clone)]
pub struct RestrictedInverse {
    matrix: DMatrix<f64>,
    residual: f64,
    norm_l2: f64,
    norm_linf: f64,
}

impl RestrictedInverse {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `‖M·M^{-1} - I‖_max` from the inversion.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// ℓ²→ℓ² operator norm.
    pub fn norm_l2(&self) -> f64 {
        self.norm_l2
    }

    /// ℓ∞→ℓ∞ operator norm (max absolute row sum).
    pub fn norm_linf(&self) -> f64 {
        self.norm_linf
    }
}
