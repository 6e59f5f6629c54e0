//! Error-correcting output codes for multiclass learning.

pub mod codes;
pub mod data;
pub mod design;
pub mod ecoc;
pub mod error;
pub mod eval;
pub mod galois;
pub mod learners;
pub mod par;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
