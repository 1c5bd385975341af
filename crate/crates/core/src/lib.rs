//! Kinematics of a spin-rolling sphere on a plane.
//!
//! Two formulations of the same rolling contact are implemented side by side:
//! the classical time-domain contact equations driven by a body angular
//! velocity ([`montana`]), and an arc-length-domain model driven by the
//! curvature inputs of a virtual surface sandwiched between the sphere and
//! the plane ([`darboux`]). Each serves as a numerical oracle for the other.
//!
//! Supporting pieces:
//! * [`diffgeo`] — parametric-surface differential geometry (fundamental
//!   forms, induced curvatures along coordinate curves and arbitrary
//!   directions), with the sphere and plane as closed-form fixtures.
//! * [`controllability`] — Lie brackets of the arc-length model's vector
//!   fields, span ranks, the closed-form determinant, singularity loci and
//!   the rank collapse when the torsion input is removed.
//! * [`sim`] — fixed-step trajectory integration, model cross-checks and
//!   the scripted heading/drift studies.
//! * [`verify`] — the self-check suite run by the CLI `selftest` command.

pub mod controllability;
pub mod darboux;
pub mod diffgeo;
pub mod montana;
pub mod sim;
pub mod verify;

mod error;

pub use error::KinError;

/// RNG seed for randomized check suites, from `DARBOUX_ROLL_SEED` (default 42).
pub fn seed_from_env() -> u64 {
    std::env::var("DARBOUX_ROLL_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(42)
}
