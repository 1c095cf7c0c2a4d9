//! Exact construction and certification of free divisors.

pub mod polyring;
pub mod polylinalg;
pub mod parse;
pub mod format;
pub mod normalform;
pub mod derivations;
pub mod report;
pub mod stablemap;
pub mod discriminant;
pub mod compose;
pub mod cli;
