//! Certified lower bounds for the convergence radius of the Mayer series of
//! the Lennard-Jones gas.
//!
//! All lengths and energies are in reduced units: the Lennard-Jones well has
//! depth 1 and sits at distance 1, so `V(r) = r^-12 - 2 r^-6`.
//!
//! The crate is organised bottom-up:
//!
//! * [`potentials`] evaluates the pair potentials, the Mayer f-function and
//!   configuration energies and gradients.
//! * [`exact`] holds the arbitrary-precision rational checks used to turn
//!   floating-point inequalities into certificates.
//! * [`lsbound`] is the minimum-distance certificate for the cut-off
//!   potential (cube covering, the two case bounds, `F(ell)` and `r_min`).
//! * [`quad`] integrates the radial integrals `C(beta)` and `C~(beta)`.
//! * [`radius`] assembles coefficient and radius bounds.
//! * [`oracle`] provides brute-force consistency checks: cluster
//!   minimisation, connected-graph enumeration and low-order Mayer
//!   coefficients.
//! * [`verify`] runs the full check suite and builds a serialisable report.

pub mod error;
pub mod exact;
pub mod lsbound;
pub mod oracle;
pub mod potentials;
pub mod quad;
pub mod radius;
pub mod verify;

pub use error::{Error, Result};
pub use potentials::{LjTypeParams, MayerInput, PotentialSpec};
