//! Weight-allocation games on the Cantor space.
//!
//! The crate provides exact dyadic arithmetic, interval-set bookkeeping, a
//! referee for the pairwise and set allocation games, the allocator (Bob)
//! and adversary (Alice) strategies, and the combinatorial designs those
//! strategies are built on.

pub mod alice;
pub mod bob;
pub mod designs;
pub mod dyadic;
pub mod game;
pub mod interval;

pub use dyadic::Dyadic;
pub use interval::{find_free_interval, max_free_interval_size, CantorAddress, IntervalSet};
