//! Simulation and spectral analysis of a dissipative two-level system under a
//! periodic delay-plus-pulse drive.
//!
//! During each delay the spin relaxes under a Lindblad generator with
//! `T1 ≫ T2`; a near-π pulse about `y` then flips the longitudinal
//! magnetization. The stroboscopic series `Mz(nT)` shows a robust period-2
//! response whose spectrum is quantified by the crystalline fraction and the
//! width of the `ν = 1/2` line.

pub mod affine;
pub mod analysis;
pub mod cli;
pub mod error;
pub mod params;
pub mod propagators;
pub mod sequence;
pub mod state;

pub use affine::{compose_n, AffineMap};
pub use error::{Error, Result};
pub use params::{validate_params, Dephasing, RawParams, SystemParams};
pub use state::{bloch_to_liouville, liouville_to_bloch, LiouvilleState, Magnetization};
