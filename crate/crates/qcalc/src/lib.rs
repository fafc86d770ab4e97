//! q-calculus toolkit.
//!
//! The crate is organized around one family of objects: for a deformation
//! 0 <= q < 1 and a shape k > 0, the q-Pochhammer k-symbol
//! [t]_{n,k} = prod_j [t + jk]_q admits three equivalent readings, and each
//! module realizes one of them:
//!
//! * [`qcore`] — scalar q-primitives: brackets, shifted products and powers,
//!   the E-type q-exponential, the q-derivative and the Jackson q-integral;
//! * [`qpoly`] / [`qtrees`] — the combinatorial reading: [t]_{n,k} is the
//!   exact weighted cardinality (a polynomial in N[q]) of a family of planar
//!   rooted trees coded by grafting sequences;
//! * [`qspecial`] — the analytic reading: Gamma_{q,k} and B_{q,k} in several
//!   mutually validating representations;
//! * [`qdist`] — the probabilistic reading: the k-gamma and k-beta
//!   q-densities whose Jackson moments recover [t]_{n,k};
//! * [`verify`] — the identity suites tying all readings together, with a
//!   machine-readable report.

pub mod error;
pub mod qcore;
pub mod qdist;
pub mod qpoly;
pub mod qspecial;
pub mod qtrees;
pub mod verify;

mod dd;

pub use error::{Error, Result};
pub use qcore::{QParams, SeriesControl};
pub use qpoly::QPolynomial;

// Exact counts and coefficients in the public API use this crate's types.
pub use num_bigint;
