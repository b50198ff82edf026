//! Semiclassical logarithmic perturbation theory for one-dimensional
//! anharmonic oscillators.
//!
//! The ħ-expansion of the Riccati equation `ħC' + C² = 2m(V − E)` is solved
//! as a triangular table of Laurent coefficients with exact rational
//! arithmetic. Node counting enters through the residue condition on each
//! `C_k`, so the same recursion covers ground and excited states, and the
//! quantum number `n` stays a formal symbol in every coefficient.
//!
//! - [`exact`]: rationals and the bivariate polynomial ring ℚ[n, λ].
//! - [`engine`]: potential specs, the Laurent table and energy series.
//! - [`harmonic`]: the exactly solvable harmonic limit and node polynomials.
//! - [`oracle`]: floating-point diagonalization used as an independent check.
//! - [`format`]: pretty, CSV and machine (JSON) renderings.

pub mod engine;
pub mod error;
pub mod exact;
pub mod format;
pub mod harmonic;
pub mod oracle;

pub use engine::{expand, CTable, EnergySeries, ExpandOptions, PotentialSpec};
pub use error::{Error, Result};
pub use exact::{BiPoly, BigRational};
