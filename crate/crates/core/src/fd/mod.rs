//! Finite-domain constraint store: integer and atomic domains, the
//! constraint catalogue, propagation, negation, entailment and labelling.

mod constraint;
mod domain;
mod label;
mod store;

pub use constraint::{Constraint, DomainBox, FdTerm, LinExpr, Operand};
pub use domain::{AtomSet, Domain, IntSet, Value};
pub use label::{LabelStrategy, Labeling, Valuation};
pub use store::{Mark, Store, StoreError, StoreResult, Truth, DEFAULT_RANGE};

pub(crate) use label::fix;
