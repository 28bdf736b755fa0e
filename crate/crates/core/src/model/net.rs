use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Activity carried by a transition. Silent (τ) transitions take part in the
/// token game but never show up in runs text or alignments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActivityLabel {
    pub name: String,
    pub silent: bool,
}

impl ActivityLabel {
    pub fn visible(name: impl Into<String>) -> Self {
        ActivityLabel {
            name: name.into(),
            silent: false,
        }
    }

    pub fn silent(name: impl Into<String>) -> Self {
        ActivityLabel {
            name: name.into(),
            silent: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    pub label: ActivityLabel,
    /// Place indices consumed when firing.
    pub preset: Vec<usize>,
    /// Place indices produced when firing.
    pub postset: Vec<usize>,
}

/// A validated safe Petri net with initial and final markings.
///
/// Places and transitions are addressed by their index in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<Transition>,
    initial: BTreeSet<usize>,
    final_marking: BTreeSet<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    Pnml,
    Json,
}

impl ModelFormat {
    /// Guess the format from a file name extension.
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "pnml" | "xml" => Some(ModelFormat::Pnml),
            "json" => Some(ModelFormat::Json),
            _ => None,
        }
    }
}

impl PetriNet {
    /// Build and validate a net from string ids.
    ///
    /// When `final_marking` is `None` it is inferred as the places without
    /// outgoing arcs.
    pub fn new(
        places: Vec<String>,
        transitions: Vec<(String, ActivityLabel)>,
        arcs: Vec<(String, String)>,
        initial: Vec<String>,
        final_marking: Option<Vec<String>>,
    ) -> Result<Self, ModelError> {
        let mut place_idx = HashMap::new();
        for (i, p) in places.iter().enumerate() {
            if place_idx.insert(p.clone(), i).is_some() {
                return Err(ModelError::DuplicateId(p.clone()));
            }
        }
        let mut trans_idx = HashMap::new();
        for (i, (t, _)) in transitions.iter().enumerate() {
            if place_idx.contains_key(t) || trans_idx.insert(t.clone(), i).is_some() {
                return Err(ModelError::DuplicateId(t.clone()));
            }
        }

        let mut built: Vec<Transition> = transitions
            .into_iter()
            .map(|(id, label)| Transition {
                id,
                label,
                preset: Vec::new(),
                postset: Vec::new(),
            })
            .collect();
        let mut has_outgoing = vec![false; places.len()];

        for (src, dst) in arcs {
            match (
                place_idx.get(&src),
                trans_idx.get(&src),
                place_idx.get(&dst),
                trans_idx.get(&dst),
            ) {
                (Some(&p), _, _, Some(&t)) => {
                    if !built[t].preset.contains(&p) {
                        built[t].preset.push(p);
                    }
                    has_outgoing[p] = true;
                }
                (_, Some(&t), Some(&p), _) => {
                    if !built[t].postset.contains(&p) {
                        built[t].postset.push(p);
                    }
                }
                (None, None, _, _) => return Err(ModelError::UnknownNode(src)),
                (_, _, None, None) => return Err(ModelError::UnknownNode(dst)),
                _ => return Err(ModelError::NonBipartite { src, dst }),
            }
        }
        for t in &mut built {
            t.preset.sort_unstable();
            t.postset.sort_unstable();
            if t.preset.is_empty() && t.postset.is_empty() {
                return Err(ModelError::DisconnectedTransition(t.id.clone()));
            }
            if t.preset.is_empty() {
                return Err(ModelError::SourceTransition(t.id.clone()));
            }
        }

        let resolve = |ids: Vec<String>| -> Result<BTreeSet<usize>, ModelError> {
            ids.into_iter()
                .map(|id| place_idx.get(&id).copied().ok_or(ModelError::NotAPlace(id)))
                .collect()
        };
        let initial = resolve(initial)?;
        if initial.is_empty() {
            return Err(ModelError::EmptyInitialMarking);
        }
        let final_marking = match final_marking {
            Some(ids) => resolve(ids)?,
            None => (0..places.len()).filter(|&p| !has_outgoing[p]).collect(),
        };
        if final_marking.is_empty() {
            return Err(ModelError::EmptyFinalMarking);
        }

        Ok(PetriNet {
            places,
            transitions: built,
            initial,
            final_marking,
        })
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial_marking(&self) -> &BTreeSet<usize> {
        &self.initial
    }

    pub fn final_marking(&self) -> &BTreeSet<usize> {
        &self.final_marking
    }

    pub fn place_index(&self, id: &str) -> Option<usize> {
        self.places.iter().position(|p| p == id)
    }

    /// Non-silent labels, sorted and deduplicated.
    pub fn visible_labels(&self) -> BTreeSet<String> {
        self.transitions
            .iter()
            .filter(|t| !t.label.silent)
            .map(|t| t.label.name.clone())
            .collect()
    }

    pub fn is_enabled(&self, marking: &BTreeSet<usize>, t: usize) -> bool {
        self.transitions[t].preset.iter().all(|p| marking.contains(p))
    }

    /// Fire `t` on a safe marking. Returns `None` when `t` is not enabled and
    /// an `Unsafe` error when a produced place is already marked.
    pub fn fire(
        &self,
        marking: &BTreeSet<usize>,
        t: usize,
    ) -> Option<Result<BTreeSet<usize>, ModelError>> {
        if !self.is_enabled(marking, t) {
            return None;
        }
        let tr = &self.transitions[t];
        let mut next = marking.clone();
        for p in &tr.preset {
            next.remove(p);
        }
        for &p in &tr.postset {
            if !next.insert(p) {
                return Some(Err(ModelError::Unsafe(self.places[p].clone())));
            }
        }
        Some(Ok(next))
    }

    /// Serialize into the native JSON model format.
    pub fn to_json(&self) -> String {
        let mut arcs = Vec::new();
        for t in &self.transitions {
            for &p in &t.preset {
                arcs.push([self.places[p].clone(), t.id.clone()]);
            }
            for &p in &t.postset {
                arcs.push([t.id.clone(), self.places[p].clone()]);
            }
        }
        let doc = NativeModel {
            places: self.places.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|t| NativeTransition {
                    id: t.id.clone(),
                    label: t.label.name.clone(),
                    silent: t.label.silent,
                })
                .collect(),
            arcs,
            initial: self.initial.iter().map(|&p| self.places[p].clone()).collect(),
            final_marking: Some(
                self.final_marking
                    .iter()
                    .map(|&p| self.places[p].clone())
                    .collect(),
            ),
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct NativeTransition {
    id: String,
    label: String,
    #[serde(default)]
    silent: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NativeModel {
    places: Vec<String>,
    transitions: Vec<NativeTransition>,
    arcs: Vec<[String; 2]>,
    initial: Vec<String>,
    #[serde(rename = "final", default, skip_serializing_if = "Option::is_none")]
    final_marking: Option<Vec<String>>,
}

/// Parse a model document, either PNML (places, transitions, arcs, markings
/// and names) or the native JSON format.
pub fn parse_model(bytes: &[u8], format: ModelFormat) -> Result<PetriNet, ModelError> {
    match format {
        ModelFormat::Json => parse_json(bytes),
        ModelFormat::Pnml => parse_pnml(bytes),
    }
}

fn parse_json(bytes: &[u8]) -> Result<PetriNet, ModelError> {
    let doc: NativeModel =
        serde_json::from_slice(bytes).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let transitions = doc
        .transitions
        .into_iter()
        .map(|t| {
            if t.label.is_empty() {
                return Err(ModelError::Malformed(format!(
                    "transition `{}` has an empty label",
                    t.id
                )));
            }
            Ok((
                t.id,
                ActivityLabel {
                    name: t.label,
                    silent: t.silent,
                },
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let arcs = doc.arcs.into_iter().map(|[s, d]| (s, d)).collect();
    PetriNet::new(doc.places, transitions, arcs, doc.initial, doc.final_marking)
}

fn text_child<'a>(node: roxmltree::Node<'a, 'a>, tag: &str) -> Option<&'a str> {
    node.children()
        .find(|c| c.has_tag_name(tag))?
        .children()
        .find(|c| c.has_tag_name("text"))?
        .text()
        .map(str::trim)
}

fn parse_pnml(bytes: &[u8]) -> Result<PetriNet, ModelError> {
    let src = std::str::from_utf8(bytes).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let doc = roxmltree::Document::parse(src).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let net = doc
        .descendants()
        .find(|n| n.has_tag_name("net"))
        .ok_or_else(|| ModelError::Malformed("no <net> element".into()))?;

    let id_of = |n: roxmltree::Node| -> Result<String, ModelError> {
        n.attribute("id")
            .map(str::to_owned)
            .ok_or_else(|| ModelError::Malformed(format!("<{}> without id", n.tag_name().name())))
    };

    let mut places = Vec::new();
    let mut initial = Vec::new();
    let mut transitions = Vec::new();
    let mut arcs = Vec::new();
    let mut final_marking: Option<Vec<String>> = None;

    let in_final = |n: roxmltree::Node| n.ancestors().any(|a| a.has_tag_name("finalmarkings"));
    for n in net.descendants().filter(|n| n.is_element()) {
        match n.tag_name().name() {
            "place" if !in_final(n) => {
                let id = id_of(n)?;
                if let Some(tokens) = text_child(n, "initialMarking") {
                    let count: u32 = tokens.parse().map_err(|_| {
                        ModelError::Malformed(format!("bad initial marking for `{id}`"))
                    })?;
                    if count > 1 {
                        return Err(ModelError::Unsafe(id));
                    }
                    if count == 1 {
                        initial.push(id.clone());
                    }
                }
                places.push(id);
            }
            "transition" => {
                let id = id_of(n)?;
                let invisible = n.children().any(|c| {
                    c.has_tag_name("toolspecific") && c.attribute("activity") == Some("$invisible$")
                });
                let label = match text_child(n, "name") {
                    Some(name) if !name.is_empty() && !invisible => {
                        if name == "tau" || name == "τ" {
                            ActivityLabel::silent(name)
                        } else {
                            ActivityLabel::visible(name)
                        }
                    }
                    Some(name) if !name.is_empty() => ActivityLabel::silent(name),
                    _ => ActivityLabel::silent(id.clone()),
                };
                transitions.push((id, label));
            }
            "arc" => {
                let s = n.attribute("source");
                let t = n.attribute("target");
                match (s, t) {
                    (Some(s), Some(t)) => arcs.push((s.to_owned(), t.to_owned())),
                    _ => return Err(ModelError::Malformed("arc without source/target".into())),
                }
            }
            "finalmarkings" => {
                let marking = n
                    .descendants()
                    .find(|m| m.has_tag_name("marking"))
                    .ok_or_else(|| ModelError::Malformed("empty <finalmarkings>".into()))?;
                let mut ids = Vec::new();
                for p in marking.children().filter(|c| c.has_tag_name("place")) {
                    let idref = p
                        .attribute("idref")
                        .ok_or_else(|| ModelError::Malformed("final place without idref".into()))?;
                    let tokens = p
                        .children()
                        .find(|c| c.has_tag_name("text"))
                        .and_then(|c| c.text())
                        .map(str::trim)
                        .unwrap_or("1");
                    if tokens != "0" {
                        ids.push(idref.to_owned());
                    }
                }
                final_marking = Some(ids);
            }
            _ => {}
        }
    }

    PetriNet::new(places, transitions, arcs, initial, final_marking)
}
