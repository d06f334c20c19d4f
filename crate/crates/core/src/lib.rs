//! Numerical core for one- and two-channel quantum teleportation of `n`-level systems.
//!
//! The crate simulates Bell- and GHZ-measurement teleportation channels for arbitrary mixed
//! resources and maximizes the (two-channel) fully entangled fraction over unitary groups with
//! a Riemannian conjugate-gradient method. It is `no_std` with `alloc`; the `parallel`
//! feature (default) enables multi-threaded restarts and sampling through rayon.
//!
//! Particle layout used throughout: `0` carries the input, `(1, 2)` is the first resource
//! pair and `(3, 4)` the second; Alice holds `0, 1, 3` and Bob holds `2, 4`.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bases;
pub mod channels;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod optimizer;
mod par;
pub mod random;
pub mod state;
pub mod tensor;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, C64};
pub use random::QtlRng;
pub use state::{DensityMatrix, PureState};
