pub mod arith;
pub mod density;
pub mod empirics;
pub mod error;
pub mod expansions;
pub mod linalg;
pub mod maps;
pub mod measures;
pub mod orbits;

pub use arith::{FieldElem, QuadraticIrrational, Rational};
pub use error::{Error, Result};
