//! Desk-scale verification of Carleson-measure characterizations for Hardy
//! and weighted Bergman spaces on the disc and on simply connected domains.
//!
//! The crate is organised by layer:
//!
//! * [`disc`]: arcs, Carleson boxes, tops, cones and Whitney balls of the disc.
//! * [`maps`] and [`analysis`]: closed-form conformal maps and the estimators
//!   built on them (Bloch oscillation, BMO of `log|φ'|`, Poisson extension,
//!   nontangential maxima, Koebe bounds).
//! * [`domain`] and [`whitney`]: polygonal boundary curves, Ahlfors and
//!   chord-arc constants, Whitney covers and quasi-hyperbolic distance.
//! * [`measure`]: positive measures with region queries and pullbacks.
//! * [`checkers`]: square, Whitney-ball and boundary-ball constants.
//! * [`embedding`]: Hardy/Bergman norms, `L^q(μ)` norms and embedding constants.
//! * [`stopping`]: the generational stopping-time decomposition.
//! * [`qns`]: quasi-nearly subharmonic checks and the weighted inequality chain.
//! * [`suite`] and [`io`]: seeded random suites and CSV interchange.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod checkers;
pub mod disc;
pub mod domain;
pub mod embedding;
mod error;
pub mod io;
pub mod maps;
pub mod measure;
pub mod qns;
pub mod quadrature;
pub mod stopping;
pub mod suite;
pub mod whitney;

pub use num_complex::Complex64;

pub use disc::{carleson_box, BoxTop, CarlesonBox, CircleArc, Cone, DiscWhitneyBall, DyadicIndex};
pub use domain::{BoundaryCurve, Domain};
pub use embedding::TestFunction;
pub use error::{Error, Result};
pub use maps::{ConformalMap, MapCatalogEntry};
pub use measure::{EmbeddingParams, PlanarMeasure};
pub use stopping::{GenerationTree, StoppingConfig};
