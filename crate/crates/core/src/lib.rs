//! Data-driven pole placement in LMI regions with mixed H2/H-infinity
//! performance, after the behavioral (fundamental-lemma) route: excite the
//! unknown plant, collect input/state/derivative data, solve a data-only
//! semidefinite program, and certify the resulting state feedback against
//! independently computed norms and eigenvalues.

pub mod analysis;
pub mod data;
pub mod matrix;
pub mod numerics;
pub mod region;
pub mod rng;
pub mod sdp;
pub mod synthesis;
pub mod trajectory_io;

pub use matrix::{Complex, Matrix};
pub use region::{LmiRegion, Membership};
