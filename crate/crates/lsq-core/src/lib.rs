//! Arithmetic behind square-class checks for L-values of elliptic curves over
//! Q and over real quadratic fields.
//!
//! Works without `std` (needs `alloc`); the `std` feature only adds
//! `std::error::Error` impls.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod arith;
pub mod brandt;
pub mod characters;
pub mod ellcurve;
mod error;
pub mod lfun;
pub mod linalg;
pub mod modsym;
pub mod quadfield;
pub mod squareclass;
pub mod verify;

pub use error::{Error, Result};
