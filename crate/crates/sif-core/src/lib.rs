//! Spherical Iterative Filtering (SIF).
//!
//! Decomposes signals sampled on an equiangular latitude-longitude sphere
//! grid into intrinsic mode functions by iterating a discrete sifting map.
//! The moving average is an isotropic convolution against a truncated-cone
//! filter, discretized either exactly (cell-pair quadrature, operator `B`)
//! or to first order (center evaluation, operator `Op`). Both operators are
//! longitude-translation invariant and are stored in banded form.
//!
//! The crate also ships the spectral machinery used to study these
//! operators: dense and block-circulant eigensolvers, the GLT symbol
//! `kappa(x, theta)` with its quantile-based eigenvalue approximation,
//! and the stabilized sifting map `I - B^T B`, whose real spectrum of
//! magnitude at most 1 restores a-priori convergence.
//!
//! With the default `parallel` feature, assembly, matvecs and spectral
//! sweeps run data-parallel on rayon; disabling the feature yields a fully
//! sequential build with identical results.

pub mod decompose;
mod eig;
pub mod error;
pub mod filter;
pub mod grid;
pub mod line_if;
pub mod operator;
mod par;
pub mod signal;
pub mod spectrum;
pub mod symbol;
pub mod synth;

pub use ndarray;
pub use num_complex;

pub use error::{Result, SifError};
pub use filter::FilterSpec;
pub use grid::{arc_distance, Cell, GridPoint, GridSpec};
pub use operator::{build_approx_op, build_exact_b, OperatorKind, SiftOperator};
pub use signal::SphericalSignal;

/// Configures the global rayon thread pool used by the `parallel` feature.
///
/// Returns an error string if the pool was already initialized. A no-op in
/// sequential builds.
pub fn configure_threads(threads: usize) -> std::result::Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}

/// True when this build runs data-parallel loops on rayon.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
