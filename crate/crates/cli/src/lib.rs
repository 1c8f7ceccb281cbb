//! Command-line front end and benchmark harness for the ACLP engine.

pub mod bench;
pub mod blocks;
pub mod jobshop;
pub mod render;
pub mod run;
