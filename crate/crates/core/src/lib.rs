//! Computable quasidiagonality moduli for group representations.
//!
//! The crate covers commutator norms of the left regular representation
//! compressed to Cayley balls, paradoxical-decomposition certificates and the
//! lower bounds they imply, induced representations of finite groups from
//! central subgroups, and finite-quotient witness pipelines for residually
//! finite groups.

pub mod cayley;
pub mod finrep;
pub mod groups;
pub mod mflef;
pub mod qdnum;
pub mod regrep;
