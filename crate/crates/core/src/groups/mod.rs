//! Element arithmetic for the group instances used throughout the crate.
//!
//! Every instance implements [`Group`], which is all the Cayley-ball and
//! representation code needs: an identity, a product and an inverse on a
//! hashable element type.

use std::fmt::Debug;
use std::hash::Hash;

mod abels;
mod finite;
mod free;
mod heisenberg;
mod modmat;
mod padic;
pub mod serial;

pub use abels::{AbelsElement, AbelsGroup};
pub use finite::{enumerate_closure, AxiomViolation, FiniteGroup};
pub use free::{FreeGroup, FreeWord, Letter};
pub use heisenberg::{HeisenbergElement, HeisenbergGroup};
pub use modmat::{CongruenceQuotient, ModMat, ModMatGroup};
pub use padic::PAdicLaurent;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("multiplication table is not square: row {row} has {len} entries, expected {expected}")]
    DimensionMismatch { row: usize, len: usize, expected: usize },
    #[error("table entry {value} at ({row}, {col}) is out of range for order {order}")]
    EntryOutOfRange { row: usize, col: usize, value: usize, order: usize },
    #[error("modulus {modulus} is not coprime to p = {prime}")]
    ModulusNotCoprime { modulus: u64, prime: u64 },
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),
    #[error("closure exceeded the cap of {0} elements")]
    ClosureCap(usize),
    #[error("mixed primes {0} and {1} in Z[1/p] arithmetic")]
    PrimeMismatch(u64, u64),
    #[error("not an element of the group: {0}")]
    NotAnElement(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A group given by its element arithmetic.
pub trait Group {
    type Elem: Clone + Eq + Hash + Debug;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn commutes(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }
}

/// Center membership of an element of a group with a distinguished central
/// subgroup `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Membership {
    pub in_center: bool,
    pub in_n: bool,
}
