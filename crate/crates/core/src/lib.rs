//! Numerical simulator for GRW-type spontaneous-collapse dynamics.
//!
//! The crate covers nonrelativistic GRW in one dimension, the relativistic
//! single-particle flash process in 1+1 dimensions, distinguishable
//! multiparticle dynamics on tensor-product grids, and a fermionic
//! occupation-basis model of two macroscopic superposed objects. Each
//! consistency condition (covariance, microcausality, factorization,
//! macroscopic classicality) is exposed as a computable defect.

// `!(x > tol)` is used on purpose so that NaN takes the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collapse;
pub mod dynamics;
pub mod error;
pub mod flash;
pub mod fock;
pub mod geometry;
pub mod hilbert;
pub mod multiparticle;
pub mod random;
pub mod spectral;
pub mod stats;

pub use collapse::{
    apply_collapse, microcausality_defect, transported_collapse, CollapseKernel,
};
pub use dynamics::{covariance_defect, evolve, Propagator};
pub use error::{Error, Result};
pub use flash::{
    dilation_statistic, flash_location_pdf, next_flash, sample_interval, simulate_chain,
    FlashChain, FlashEvent, FlashParams, Hyperboloid,
};
pub use fock::{
    collapse_j, creation_apply, initial_superposition, macro_failure_report, BlobSpec, FockBasis,
    FockReport, FockVector, NumberOp,
};
pub use geometry::{HyperplaneLabel, MomentumGrid, SpacetimePoint, SpatialGrid};
pub use hilbert::{
    boost_state, lift, normalize, restrict, CovariantAmplitude, Dispersion, Normalize,
    SurfaceWaveFunction,
};
pub use multiparticle::{
    amplification_rate, bell_state, factorization_defect, frame_comparison_defect,
    interaction_factorization_defect, product_state, BranchState, InteractionSpec, ProductState,
    Region,
};
pub use num_complex::Complex64;
