//! Brute-force oracles shared by the property tests and the acceptance
//! target.

#![allow(dead_code)]

pub mod ground;
pub mod store;
