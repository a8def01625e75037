//! Classification of Moufang p-loops by central extensions.
//!
//! A nonassociative Moufang loop of order `p^k` is a central extension of a
//! Moufang loop of order `p^{k-1}` by GF(p). Extensions are parametrized by
//! normalized cocycles; equivalence classes come from linear algebra over
//! GF(p) modulo coboundaries and the action of the automorphism group of the
//! base.

pub mod autiso;
pub mod cocycles;
pub mod codeloops;
pub mod extend;
pub mod gfla;
pub mod loopcore;
pub mod pipeline;

pub use loopcore::{Elem, LoopError, LoopTable};
