//! Automaton groups as platforms for the Anshel–Anshel–Goldfeld key
//! agreement.
//!
//! The crate is layered bottom-up:
//!
//! - [`automaton`], [`group`], [`nucleus`], [`portrait`]: exact computation
//!   with tree automorphisms given by invertible Mealy automata, including the
//!   word problem and canonical portraits.
//! - [`platforms`], [`element`]: the concrete groups and one element interface
//!   over all of them.
//! - [`aag`]: key generation, transmissions and shared-key derivation.
//! - [`attack`]: brute-force search for simultaneous conjugators.
//! - [`wire`]: the framed two-party exchange protocol.

pub mod aag;
pub mod attack;
pub mod automaton;
pub mod element;
pub mod error;
pub mod group;
pub mod nucleus;
pub mod perm;
pub mod platforms;
pub mod portrait;
pub mod rng;
pub mod transcript;
pub mod wire;

pub use automaton::{Letter, MealyAutomaton, Rewriting, StateId};
pub use element::{Element, Platform, PlatformSpec};
pub use error::{BudgetKind, DecodeError, GroupError};
pub use group::{AutomatonGroup, ContractionBudget, DepthPortrait, GeneratorWord};
pub use nucleus::Nucleus;
pub use perm::Perm;
pub use portrait::{Node, Portrait};

/// A generator reference by position in some generator list, possibly
/// inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedIndex {
    pub index: u16,
    pub inverse: bool,
}

impl SignedIndex {
    pub fn new(index: u16, inverse: bool) -> Self {
        SignedIndex { index, inverse }
    }

    pub fn inverse(self) -> Self {
        SignedIndex { index: self.index, inverse: !self.inverse }
    }
}
