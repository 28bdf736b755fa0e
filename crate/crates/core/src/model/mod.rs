//! Process models: Petri nets, their causally complete prefix unfolding,
//! complete runs and the integer-coded runs text handed to the index.

mod alphabet;
#[cfg(test)]
pub(crate) mod fixtures;
mod net;
mod runs;
pub mod synth;
mod unfold;

pub use alphabet::{concatenate, relabel, Alphabet, RunsText};
pub use net::{parse_model, ActivityLabel, ModelFormat, PetriNet, Transition};
pub use runs::{complete_runs, linear_extensions, RunPO, DEFAULT_EXTENSION_CAP};
pub use unfold::{unfold, BranchingPrefix, Condition, Event, DEFAULT_MAX_EVENTS};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed model document: {0}")]
    Malformed(String),
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("arc references unknown node `{0}`")]
    UnknownNode(String),
    #[error("arc `{src}` -> `{dst}` is not bipartite")]
    NonBipartite { src: String, dst: String },
    #[error("marking references `{0}`, which is not a place")]
    NotAPlace(String),
    #[error("initial marking is empty")]
    EmptyInitialMarking,
    #[error("final marking is empty")]
    EmptyFinalMarking,
    #[error("transition `{0}` has no arcs")]
    DisconnectedTransition(String),
    #[error("transition `{0}` has an empty preset")]
    SourceTransition(String),
    #[error("net is not safe: place `{0}` can hold two tokens")]
    Unsafe(String),
    #[error("unfolding exceeded {0} events")]
    MaxEventsExceeded(usize),
    #[error("run has more than {0} linear extensions")]
    CapExceeded(usize),
    #[error("label `{0}` is not in the alphabet")]
    UnknownLabel(String),
    #[error("model and log labels differ: {}", .0.join(", "))]
    LabelMismatch(Vec<String>),
}

/// Full pipeline from a parsed net to the deduplicated linearizations of its
/// complete runs.
pub fn linearized_runs(
    net: &PetriNet,
    max_events: usize,
    cap: usize,
) -> Result<Vec<Vec<String>>, ModelError> {
    let prefix = unfold(net, max_events)?;
    let mut out: Vec<Vec<String>> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for run in complete_runs(&prefix) {
        for seq in linear_extensions(&run, cap)? {
            if seen.insert(seq.clone()) {
                out.push(seq);
                if out.len() > cap {
                    return Err(ModelError::CapExceeded(cap));
                }
            }
        }
    }
    Ok(out)
}
