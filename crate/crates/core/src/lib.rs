//! Orthogonal basis functions over the unit circle with the minimax property.
//!
//! Each basis function is a product `M_m(phi) * Q_{n,m}(r)` of an azimuthal
//! sinusoid and a radial function `Q_{n,m}(r) = N sin(theta(r))` (cosine for
//! `m = 0`), where `theta` is a polynomial phase driven monotonically from
//! zero to an odd multiple of `pi/2` at the rim. Because the phase is
//! monotone, successive radial extrema all have amplitude `|N|`.
//!
//! The crate is organised bottom-up:
//!
//! - [`quadrature`]: Romberg integration on a fixed dyadic grid over `[0, 1]`.
//! - [`bernstein`]: Bernstein basis evaluation and monomial conversions.
//! - [`radial_basis`]: indices, phase polynomials, radial and azimuthal factors.
//! - [`closed_form`]: the analytically known members of the basis.
//! - [`synthesis`]: damped Newton construction of the remaining members.
//! - [`table`], [`table_io`]: coefficient tables and their text format.
//! - [`verification`]: orthogonality, monotonicity and extremum audits.
//! - [`cli`]: the `qbasis` command-line front end.

pub mod bernstein;
pub mod cli;
pub mod closed_form;
mod compensated;
pub mod error;
pub mod quadrature;
pub mod radial_basis;
pub mod synthesis;
pub mod table;
pub mod table_io;
pub mod verification;

pub use error::{Error, Result};
pub use quadrature::QuadratureConfig;
pub use radial_basis::{BasisIndex, Kind, PhasePolynomial, RadialFunction, ReducedPhase};
pub use synthesis::{SynthesisConfig, SynthesisReport};
pub use table::{CoefficientTable, Provenance, TableEntry};
