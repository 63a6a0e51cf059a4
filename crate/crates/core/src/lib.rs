//! Følner combinatorics, equivariant marker sets and the inductive array
//! block codes for free actions of `Z^d` on subshifts.
//!
//! The crate is organised bottom-up:
//!
//! * [`group`] and [`gsets`]: the lattice `Z^d`, its canonical order, Følner
//!   boxes and explicit finite subsets.
//! * [`density`]: lower Banach density and syndeticity.
//! * [`lemmas`]: the invariance-core lemma and the window lemma, in
//!   constructive and brute-force form.
//! * [`arrays`]: cells, columns, array windows, blocks, metrics, occurrence
//!   search and ε-dense families.
//! * [`markers`]: locally computed, equivariant marker sets.
//! * [`construction`]: the stage codes, their composition and base-point
//!   recovery.
//! * [`verify`]: quantitative checks of every finitely checkable claim.
//! * [`pipeline`]: run configuration, orchestration and reports.
//!
//! Numeric quantities (distances, densities, tolerances) are generic over
//! [`Scalar`]; [`Real`] and [`Exact`] are the two instantiations used in
//! practice.

pub mod arrays;
pub mod construction;
pub mod density;
pub mod error;
pub mod grid;
pub mod group;
pub mod gsets;
pub mod lemmas;
pub mod markers;
pub mod pipeline;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use group::{GroupElement, Group};
pub use gsets::FiniteSubset;
pub use scalar::Scalar;

/// Floating point scalar used by the CLI and reports.
pub type Real = f64;

/// Exact rational scalar, used where densities and distances are compared
/// against closed-form fractions.
pub type Exact = num_rational::Ratio<i64>;

/// Run parameters over [`Real`].
pub type Params = construction::StageParams<Real>;

/// Run parameters over [`Exact`].
pub type ExactParams = construction::StageParams<Exact>;

/// Verification report over [`Real`].
pub type Report = verify::VerificationReport;
