//! Graph linear canonical transforms.
//!
//! Graphs, spectral decompositions of their adjacency matrices, and the
//! chirp · scaling · fractional-Fourier operators built on top of them.

pub mod cache;
pub mod error;
pub mod export;
pub mod graph;
pub mod io;
pub mod params;
pub mod signal_ops;
pub mod spectral;
pub mod transforms;

pub use cache::OperatorCache;
pub use error::{Error, Result};
pub use graph::{Graph, GraphSignal};
pub use num_complex::Complex64;
pub use params::{compose_params, decompose_params, inverse_params, DecomposedParams, LctParams};
pub use signal_ops::{delta, glct_convolve, translate};
pub use spectral::{
    canonicalize_eigenpairs, eig_normal, frac_unitary_power, unitarity_defect, CMat, EigenBasis,
};
pub use transforms::{
    chirp_diag, dlct_reference, gfrft_matrix, gft, gft_matrix, glct, glct_operator, igft, iglct,
    scaling_basis, ChirpMode, GlctOperator, GlctOptions, ScalingMode, SpectralContext,
};
