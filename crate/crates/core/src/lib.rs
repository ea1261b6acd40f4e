//! Similarity search for time sequences.
//!
//! Sequences are brought to normal form, transformed with the unitary DFT,
//! and indexed by the real/imaginary parts of their first few non-zero
//! coefficients in an MBR tree. Range, k-nearest-neighbor, and all-pair
//! queries run filter-and-refine: the index returns a candidate superset,
//! the exact normalized distance removes false positives.
//!
//! Conjugate symmetry of real-sequence spectra makes each stored
//! coefficient stand in for its unstored partner, so coefficient distances
//! carry weight 2 and the query rectangle shrinks from side `2 * epsilon`
//! to side `sqrt(2) * epsilon`. Both the tightened policy and the plain
//! baseline are implemented so the filtering cost can be compared; the
//! answer sets are always identical.

pub mod datagen;
pub mod engine;
mod error;
pub mod index;
pub mod metrics;
pub mod selectivity;
pub mod signal;

pub use error::{Error, Result};
