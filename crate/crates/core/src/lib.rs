//! Exact symbolic engine for complex supermanifolds presented by chart atlases.
//!
//! Functions live in [`grassmann`], atlases in [`atlas`], vector fields in
//! [`svector`]. The higher modules compute Čech data ([`cech`]), the Euler
//! differential and Koszul splitting ([`koszul`]), primary obstructions
//! ([`obstruction`]) and Atiyah classes ([`atiyah`]).

pub mod atiyah;
pub mod atlas;
pub mod builders;
pub mod cech;
pub mod coeffring;
pub mod connection;
pub mod error;
pub mod grassmann;
pub mod koszul;
pub mod linalg;
pub mod obstruction;
pub mod sma;
pub mod svector;

pub use atlas::{Atlas, TransitionMap, ValidationReport};
pub use coeffring::{LaurentPoly, PolyCtx, Rational};
pub use error::{Error, Result};
pub use grassmann::{ChartSignature, Parity, SuperElement};
pub use svector::{canonical_field, pushforward, FieldKind, VectorField};
