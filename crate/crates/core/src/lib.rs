//! Sparse recovery of point masses on finite weighted graphs from
//! heat-smoothed, noisy observations.
//!
//! The pipeline: build a connected edge-weighted graph and a distance
//! compatible with its weights, decompose the graph Laplacian, evaluate the
//! heat kernel `K(t, x, y)`, check the geometric/time conditions under which
//! the restriction `M^t` to a support set is invertible and a dual
//! certificate exists, construct and verify that certificate, and solve the
//! constrained ℓ¹ program to recover the sparse signal together with its
//! error bound `4(1+δ)√J·ε`.
//!
//! ```
//! use heatsparse::bounds::{max_admissible_time, GraphConstants, SupportProfile};
//! use heatsparse::certificate::{verify, Certificate, SignPattern, DEFAULT_TOL};
//! use heatsparse::{CompatibleMetric, HeatOperator, SpectralData, WeightedGraph};
//!
//! let graph = WeightedGraph::new(3, &[(0, 1, 1.0), (1, 2, 1.0)])?;
//! let metric = CompatibleMetric::for_graph(&graph);
//! let spectral = SpectralData::decompose(&graph.laplacian())?;
//! let constants = GraphConstants::from_parts(&spectral, &metric)?;
//!
//! let support = [0, 2];
//! let profile = SupportProfile::from_support(&metric, &support)?;
//! let t_star = max_admissible_time(&constants, &profile);
//! assert!(t_star > 0.0);
//!
//! let heat = HeatOperator::new(&spectral, 0.9 * t_star)?;
//! let signs = SignPattern::new(vec![1.0, -1.0])?;
//! let cert = Certificate::construct(&heat, &support, &signs)?;
//! assert!(verify(&cert, &signs, DEFAULT_TOL).all_hold());
//! # Ok::<(), heatsparse::Error>(())
//! ```

pub mod bounds;
pub mod certificate;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod graph;
pub mod graph_file;
pub mod heat;
pub mod metric;
pub mod recovery;
pub mod spectral;

pub use bounds::{FeasibilityReport, GraphConstants, SupportProfile};
pub use certificate::{Certificate, CertificateVerdict, SignPattern};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, ExperimentRun, TrialRecord};
pub use generate::{GraphSpec, WeightSpec};
pub use graph::{LaplacianMatrix, WeightedGraph};
pub use heat::{HeatOperator, RestrictedInverse, RestrictedOperator};
pub use metric::CompatibleMetric;
pub use recovery::{ErrorBudget, Observation, RecoveryResult, SolveStatus, SolverOptions};
pub use spectral::SpectralData;
