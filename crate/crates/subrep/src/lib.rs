//! Constructive machinery for systems of subspaces in finite-dimensional
//! normed spaces: decomposition algorithms (greedy, alternating projections,
//! replication), dual-norm margins characterizing when every vector admits a
//! series representation along the system, prefix-sum functionals with the
//! resulting perturbation budgets, and sign-convexity constants — each
//! estimator paired with an independent brute-force oracle at desk scale.

pub mod error;
pub mod space;
pub mod solver;
pub mod subspace;
pub mod system;
pub mod functional;
pub mod decompose;
pub mod replicate;
pub mod criteria;
pub mod theta;
pub mod cconvexity;
pub mod scenario;
pub mod suite;

pub use error::{Error, Result};
pub use space::{AmbientSpace, Field, NormP, Tol};
pub use subspace::{direct_sum_constant, gap_rho0, Subspace};
pub use system::SubspaceSystem;
pub use functional::Functional;

/// Configure the global worker pool. Call once, before any estimator runs;
/// later calls are ignored. Results are identical for any thread count.
pub fn configure_threads(n: usize) {
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
