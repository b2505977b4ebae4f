//! Monte Carlo laboratory for truncated long-range oriented percolation.
//!
//! The crate is organised by model:
//!
//! * [`sequences`]: bond probability laws and their range-`k` truncations.
//! * [`bondfield`]: a lazily evaluated, counter-mode random configuration.
//! * [`oriented`]: cluster growth on the oriented lattice `Z^d x Z+`.
//! * [`renorm`]: bifurcation events, the red-vertex renormalized cluster and
//!   the oriented site percolation comparison.
//! * [`contact`]: the truncated long-range contact process via its graphical
//!   construction.
//! * [`starlat`]: the mixed lattice with oriented vertical and unoriented
//!   long-range horizontal bonds, with its staircase block construction.
//! * [`harness`]: configuration, replica scheduling, statistics and CSV output.

pub mod bondfield;
pub mod contact;
pub mod harness;
pub mod oriented;
pub mod renorm;
pub mod sequences;
pub mod starlat;

mod error;

pub use error::{Error, Result};
pub use harness::stats;

/// Largest spatial dimension supported by the lattice models.
pub const MAX_DIM: usize = 4;

/// A point of `Z^d`, stored with unused trailing coordinates set to zero.
pub type Site = [i64; MAX_DIM];
