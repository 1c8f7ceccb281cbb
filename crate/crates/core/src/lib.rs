//! Abductive constraint logic programming.
//!
//! An abductive theory is a triple of a logic program, a set of abducible
//! predicates and a list of integrity constraints. Goals are answered by
//! interleaving goal reduction, integrity checking and finite-domain
//! propagation; an answer is a set of abduced hypotheses together with the
//! residual constraints on their variables.

pub mod engine;
pub mod fd;
pub mod literal;
pub mod optimize;
pub mod parser;
pub mod subst;
pub mod term;
pub mod theory;
