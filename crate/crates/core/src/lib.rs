//! Exact computations for tilings attached to Pisot beta-numeration.

pub mod boundary;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod gamma;
pub mod lattice;
pub mod natext;
pub mod periodicity;
pub mod poly;
pub mod rat;
pub mod report;
pub mod roots;
pub mod tiles;

pub use error::{Error, Result};
pub use field::{compare, finite_address, floor_mul_beta, make_beta, BetaField, FieldElement};
