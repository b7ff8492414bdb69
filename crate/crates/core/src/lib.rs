//! Elimination machinery for `C1 x^2 + q^a = y^n`.

pub mod arith;
pub mod curvedb;
pub mod ellcurve;
pub mod error;
pub mod frey;
pub mod lfl;
pub mod quadfield;
pub mod search;
pub mod sieves;
pub mod tm;

pub use error::{Error, Result};
