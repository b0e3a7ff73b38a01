//! Computational convex algebra with exact rational arithmetic.

pub mod category;
pub mod distribution;
pub mod error;
pub mod finprob;
pub mod join;
pub mod lp;
pub mod omon;
pub mod presented;
pub mod prop;
pub mod semiring;
pub mod simplicial;
pub mod tensor;

pub use distribution::{convex_combine, Distribution};
pub use error::{Error, Result};
pub use presented::{
    eq, hom_combine, induce_map, quotient_mix, ConvexMap, EqualityStatus, EqualityVerdict, Presentation,
    PresentedElement, DEFAULT_STEP_BOUND,
};
pub use semiring::{Rational, Semiring};
