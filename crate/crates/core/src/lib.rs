//! Numerical verification engine for natural Norden structures `(G, J)` on
//! tangent bundles of constant-curvature manifolds.
//!
//! The pipeline runs bottom-up: [`scalarfn`] evaluates coefficient functions
//! of the energy density as jets, [`spaceform`] supplies the base metric and
//! its connection, [`lift`] assembles `J` and `G` in the adapted frame,
//! [`connection`] computes the Levi-Civita connection of `G` together with
//! `F = G((∇J)·,·)`, `Φ` and the Nijenhuis tensor, and [`classify`] tests the
//! class identities. [`families`] builds coefficient families with prescribed
//! structure and [`cli`] drives batch runs from a JSON config.

pub mod classify;
pub mod cli;
pub mod connection;
pub mod error;
pub mod families;
pub mod lift;
pub mod sampling;
pub mod scalarfn;
pub mod spaceform;

pub use error::{Error, Result};
