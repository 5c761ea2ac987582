//! Littlewood-Paley square functions, Fourier multipliers, Muckenhoupt weights
//! and Sobolev-characterizing operators on periodic sampled fields.

pub mod conditions;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod multiplier;
mod quad;
pub mod sobolev;
pub mod special;
pub mod squarefn;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{
    forward_transform, inverse_transform, quadrature_sum, DyadicRange, Geometry, LogTimeGrid,
    SampledField, SpectralField, SpectralPlan,
};
