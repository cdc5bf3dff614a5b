//! Exact-arithmetic kernel for p-typical Witt vectors, delta-rings and
//! Cartier rings: universal Witt polynomial generation with independent
//! integrality certification, truncated Witt-vector arithmetic over generic
//! coefficient rings, delta-structures, and the discrete Cartier-ring
//! constructions (A[V], the pullback tower, box products, perfection).

pub mod boxprod;
pub mod cartier;
pub mod delta;
pub mod error;
pub mod family;
pub mod poly;
pub mod prng;
pub mod report;
pub mod ring;
pub mod squarezero;
pub mod suites;
pub mod tower;
pub mod witt;
pub mod wittpoly;

pub use error::{Error, Result};
pub use ring::{exact_div_int, make_ring, poly_eval, Element, PhiMap, RingDescriptor, RingHandle};
pub use wittpoly::{dwork_check, gen_witt_poly, ghost, unghost, GhostVector, PolyKind, WittPolynomial};
