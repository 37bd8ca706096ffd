//! Persistent homology of delay-embedded time series with representatives
//! optimized to stay compact in time.
//!
//! The pipeline: embed a series by sliding windows, build a Vietoris–Rips
//! filtration, reduce it over F2, and replace each significant class's
//! representative by the solution of a weighted l1 linear program.

// `!(x > 0.0)` also rejects NaN, which is the point of those checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod embedding;
pub mod error;
pub mod filtration;
pub mod lp;
pub mod optimizer;
pub mod reduction;
pub mod rips;
pub mod simplex;
pub mod weights;

pub use chain::{Chain, F2Chain, RealChain, F2};
pub use embedding::{EmbeddingParams, LabeledPointCloud, TimeSeries};
pub use error::{Error, Result};
pub use filtration::{BoundaryMatrix, FieldMode, Filtration};
pub use lp::{CycleLp, CycleSolution, LpBackend, RevisedSimplex};
pub use optimizer::{OptimizedRepresentative, Optimizer, RelaxationPolicy, Significance};
pub use reduction::{reduce, PersistencePair, ReducedDecomposition};
pub use rips::{build_rips, MaxRadius, RipsConfig};
pub use simplex::Simplex;
pub use weights::{WeightKind, WeightMatrix};
