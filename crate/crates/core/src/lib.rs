//! Privacy-preserving conformance checking.
//!
//! A server owning a Petri net unfolds it into its complete runs, linearizes
//! and concatenates them into a text, and indexes that text with an FM-index
//! whose rank queries are answered by a wavelet matrix. A client owning a
//! trace then walks the index backwards, one bit row at a time, sending its
//! interval endpoints as encrypted one-hot vectors. The server answers with
//! homomorphic dot products shifted by a random offset, so neither side sees
//! the other's data. Mismatches are handled as log moves by restoring the
//! previous interval.
//!
//! Module map:
//!
//! * [`model`]: Petri nets, prefix unfolding, runs and the runs text.
//! * [`index`]: suffix array, BWT, wavelet matrix, backward search and the
//!   plaintext log-move aligner.
//! * [`crypto`]: additively homomorphic encryption backends.
//! * [`protocol`]: client and server session state machines.
//! * [`net`]: framed TCP transport.

pub mod crypto;
pub mod index;
pub mod model;
pub mod net;
pub mod protocol;

pub use index::{Alignment, FmIndex, Interval, Move};
pub use model::{Alphabet, PetriNet, RunsText};
