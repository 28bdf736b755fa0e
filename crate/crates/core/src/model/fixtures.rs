//! Nets shared by unit tests.

use super::{parse_model, ModelFormat, PetriNet};

/// Net N of the running example: a, then the loop b (c b)*, then d.
pub(crate) const LOOP_NET_JSON: &str = r#"{
    "places": ["p1", "p2", "p3", "p4"],
    "transitions": [
        {"id": "a", "label": "a"}, {"id": "b", "label": "b"},
        {"id": "c", "label": "c"}, {"id": "d", "label": "d"}
    ],
    "arcs": [["p1","a"],["a","p2"],["p2","b"],["b","p3"],
             ["p3","c"],["c","p2"],["p3","d"],["d","p4"]],
    "initial": ["p1"],
    "final": ["p4"]
}"#;

pub(crate) fn loop_net() -> PetriNet {
    parse_model(LOOP_NET_JSON.as_bytes(), ModelFormat::Json).unwrap()
}
