//! Poisson-Voronoi percolation on the hyperbolic plane, simulated in the
//! Poincaré disk model, together with the Euclidean reference model.
//!
//! The crate provides:
//!
//! - exact and numeric primitives of the Poincaré disk ([`geometry`]),
//! - sampling of homogeneous hyperbolic and Euclidean Poisson point
//!   processes with independent black/white marking ([`pointprocess`]),
//! - Delaunay triangulation with exact predicates, Voronoi cell geometry
//!   and the hyperbolic empty-disk adjacency test ([`voronoi`]),
//! - crossing events, the local-control event and cluster analysis
//!   ([`percolation`]),
//! - the explicit coupling between the hyperbolic marked process and a
//!   homogeneous Euclidean one ([`coupling`]),
//! - the (7,7,7)-triangulation, the six-rectangle closed-event
//!   construction and k-independent percolation bounds ([`tiling`]),
//! - a reproducible Monte Carlo harness ([`experiments`]),
//! - deterministic SVG rendering ([`render`]).
//!
//! Replicate-level concurrency is provided by rayon when the default
//! `parallel` feature is enabled; disabling it yields a purely sequential
//! build with identical results.

pub mod coupling;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod percolation;
pub mod pointprocess;
pub mod render;
pub mod rng;
pub mod tiling;
pub mod voronoi;

pub use error::{Error, Result};

/// Maps replicate indices `0..n` through `f`, in parallel when the
/// `parallel` feature is on. Results are returned in replicate order, so
/// downstream reductions are deterministic regardless of scheduling.
#[cfg(feature = "parallel")]
pub fn replicate_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn replicate_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    replicate_map_sequential(n, f)
}

/// Sequential fallback, always available (used by the benches to compare
/// against the rayon path).
pub fn replicate_map_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
