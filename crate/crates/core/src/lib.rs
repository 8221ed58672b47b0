//! Analysis of open mushroom billiards: marginally unstable periodic orbits
//! (MUPOs), continued-fraction certification of MUPO-free parameters, closed
//! form survival-probability coefficients, and exact billiard-flow kernels
//! for Monte Carlo verification.
//!
//! The crate is `no_std`-compatible (with `alloc`); everything that touches
//! the filesystem, threads or a terminal lives in the companion `mupolab`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod contfrac;
pub mod dd;
pub mod fmath;
pub mod geometry;
pub mod hat;
pub mod montecarlo;
pub mod mupo;
pub mod stem;

pub use contfrac::{ContinuedFraction, QuadraticSurd};
pub use geometry::{BirkhoffCoord, BoundaryModel, HoleSpec, MushroomSpec, ParticleState, StemKind};
pub use hat::SurvivalPrediction;
pub use mupo::{Mupo, StickinessClass};
