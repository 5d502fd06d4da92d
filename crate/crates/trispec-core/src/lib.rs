//! Length spectra of hyperbolic triangle groups Γ(r,p,q).
//!
//! The modules go bottom up: plane geometry, closed forms in
//! X = cos π/r, Y = cos π/p, Z = cos π/q, the group itself, the star graph
//! on contact points, spectrum heads, and interval certification.

pub mod certifier;
pub mod combinatorics;
pub mod error;
pub mod forms;
pub mod group;
pub mod hyperbolic;
pub mod spectrum;

pub use certifier::{Box3, CertReport, Interval, Poly3, TypeTuple, Verdict, VertexMode};
pub use combinatorics::{EdgeType, LambdaStar, RhoStar, StarBall};
pub use error::{Error, Result};
pub use forms::{CosTriple, Order, Signature};
pub use group::{Letter, TriangleGroup, Word};
pub use hyperbolic::{Geodesic, Motion, MotionClass, Orientation, UhpPoint};
pub use spectrum::{Exactness, SpectrumEntry, SpectrumHead, ValidationReport};
