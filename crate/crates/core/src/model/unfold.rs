use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{ModelError, PetriNet};

pub const DEFAULT_MAX_EVENTS: usize = 10_000;

/// An instance of a place in the prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub place: usize,
    /// Event producing this condition; `None` for the initial conditions.
    pub producer: Option<usize>,
}

/// An instance of a transition in the prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub transition: usize,
    pub preset: Vec<usize>,
    pub postset: Vec<usize>,
    /// Local configuration, including the event itself.
    pub history: BTreeSet<usize>,
    /// Marking reached by the local configuration.
    pub marking: BTreeSet<usize>,
    /// Non-silent labels executed by the local configuration.
    pub labels: BTreeSet<String>,
}

/// Causally complete prefix of the unfolding of a safe net.
#[derive(Debug, Clone)]
pub struct BranchingPrefix {
    net: PetriNet,
    pub conditions: Vec<Condition>,
    pub events: Vec<Event>,
    pub cutoff_events: BTreeSet<usize>,
    /// Corresponding event of every cutoff; `None` stands for the empty
    /// configuration (the initial marking).
    pub corr: BTreeMap<usize, Option<usize>>,
}

impl BranchingPrefix {
    pub fn net(&self) -> &PetriNet {
        &self.net
    }

    pub fn initial_conditions(&self) -> impl Iterator<Item = usize> + '_ {
        self.conditions
            .iter()
            .enumerate()
            .filter(|(_, c)| c.producer.is_none())
            .map(|(i, _)| i)
    }

    pub fn is_cutoff(&self, e: usize) -> bool {
        self.cutoff_events.contains(&e)
    }

    /// Label of an event, or `None` when silent.
    pub fn event_label(&self, e: usize) -> Option<&str> {
        let label = &self.net.transitions()[self.events[e].transition].label;
        (!label.silent).then_some(label.name.as_str())
    }

    /// Whether `conds` could be marked together in some configuration.
    fn is_coset(&self, conds: &[usize]) -> bool {
        let mut history = BTreeSet::new();
        for &c in conds {
            if let Some(e) = self.conditions[c].producer {
                history.extend(self.events[e].history.iter().copied());
            }
        }
        let mut consumed = HashSet::new();
        for &e in &history {
            for &c in &self.events[e].preset {
                if !consumed.insert(c) {
                    return false;
                }
            }
        }
        conds.iter().all(|c| !consumed.contains(c))
    }
}

/// Ordering key used to pick the next possible extension: local
/// configuration size, then its sorted label vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct AdequateKey {
    size: usize,
    labels: Vec<String>,
}

/// (marking, labels), the smallest key reaching them and the event with that
/// key (`None` for the initial configuration).
type Seen = (BTreeSet<usize>, BTreeSet<String>, AdequateKey, Option<usize>);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Extension {
    key: AdequateKey,
    transition: usize,
    preset: Vec<usize>,
}

/// Compute the causally complete prefix unfolding of `net`.
///
/// Extensions are added smallest local configuration first. An event is a
/// cutoff when an earlier, strictly smaller configuration (or the initial
/// one) reaches the same marking with the same set of visible labels.
pub fn unfold(net: &PetriNet, max_events: usize) -> Result<BranchingPrefix, ModelError> {
    let mut prefix = BranchingPrefix {
        net: net.clone(),
        conditions: net
            .initial_marking()
            .iter()
            .map(|&place| Condition {
                place,
                producer: None,
            })
            .collect(),
        events: Vec::new(),
        cutoff_events: BTreeSet::new(),
        corr: BTreeMap::new(),
    };

    let initial_key = AdequateKey {
        size: 0,
        labels: Vec::new(),
    };
    let mut seen: Vec<Seen> = vec![(
        net.initial_marking().clone(),
        BTreeSet::new(),
        initial_key,
        None,
    )];

    let mut pending: BTreeSet<Extension> = BTreeSet::new();
    let mut known: HashSet<(usize, Vec<usize>)> = HashSet::new();
    let initial: Vec<usize> = (0..prefix.conditions.len()).collect();
    collect_extensions(&prefix, &initial, &mut pending, &mut known);

    while let Some(ext) = pending.pop_first() {
        if prefix.events.len() >= max_events {
            return Err(ModelError::MaxEventsExceeded(max_events));
        }
        let e = prefix.events.len();
        let transition = &net.transitions()[ext.transition];

        let mut history: BTreeSet<usize> = BTreeSet::new();
        for &c in &ext.preset {
            if let Some(p) = prefix.conditions[c].producer {
                history.extend(prefix.events[p].history.iter().copied());
            }
        }
        history.insert(e);

        let postset: Vec<usize> = transition
            .postset
            .iter()
            .map(|&place| {
                prefix.conditions.push(Condition {
                    place,
                    producer: Some(e),
                });
                prefix.conditions.len() - 1
            })
            .collect();

        let mut labels = BTreeSet::new();
        for &h in history.iter().filter(|&&h| h != e) {
            let t = &net.transitions()[prefix.events[h].transition];
            if !t.label.silent {
                labels.insert(t.label.name.clone());
            }
        }
        if !transition.label.silent {
            labels.insert(transition.label.name.clone());
        }

        prefix.events.push(Event {
            transition: ext.transition,
            preset: ext.preset.clone(),
            postset: postset.clone(),
            history,
            marking: BTreeSet::new(),
            labels,
        });
        let marking = local_marking(&prefix, e);
        prefix.events[e].marking = marking;

        // Two concurrent conditions on one place means the net is not safe.
        for &b in &postset {
            let place = prefix.conditions[b].place;
            for other in 0..prefix.conditions.len() {
                if other != b
                    && prefix.conditions[other].place == place
                    && prefix.is_coset(&[b, other])
                {
                    return Err(ModelError::Unsafe(net.places()[place].clone()));
                }
            }
        }

        let event = &prefix.events[e];
        let corr = seen
            .iter()
            .find(|(m, l, key, _)| *m == event.marking && *l == event.labels && *key < ext.key)
            .map(|(_, _, _, c)| *c);
        match corr {
            Some(c) => {
                prefix.cutoff_events.insert(e);
                prefix.corr.insert(e, c);
            }
            None => {
                seen.push((
                    event.marking.clone(),
                    event.labels.clone(),
                    ext.key.clone(),
                    Some(e),
                ));
                collect_extensions(&prefix, &postset, &mut pending, &mut known);
            }
        }
    }

    Ok(prefix)
}

fn local_marking(prefix: &BranchingPrefix, e: usize) -> BTreeSet<usize> {
    let history = &prefix.events[e].history;
    let mut cut: BTreeSet<usize> = prefix.initial_conditions().collect();
    for &h in history {
        cut.extend(prefix.events[h].postset.iter().copied());
    }
    for &h in history {
        for c in &prefix.events[h].preset {
            cut.remove(c);
        }
    }
    cut.iter().map(|&c| prefix.conditions[c].place).collect()
}

/// Queue every extension whose preset uses at least one condition of `fresh`.
fn collect_extensions(
    prefix: &BranchingPrefix,
    fresh: &[usize],
    pending: &mut BTreeSet<Extension>,
    known: &mut HashSet<(usize, Vec<usize>)>,
) {
    let net = prefix.net();
    let fresh_places: BTreeSet<usize> = fresh.iter().map(|&c| prefix.conditions[c].place).collect();
    let open: Vec<usize> = (0..prefix.conditions.len())
        .filter(|&c| match prefix.conditions[c].producer {
            Some(e) => !prefix.is_cutoff(e),
            None => true,
        })
        .collect();

    for (t, tr) in net.transitions().iter().enumerate() {
        if !tr.preset.iter().any(|p| fresh_places.contains(p)) {
            continue;
        }
        let choices: Vec<Vec<usize>> = tr
            .preset
            .iter()
            .map(|&p| {
                open.iter()
                    .copied()
                    .filter(|&c| prefix.conditions[c].place == p)
                    .collect()
            })
            .collect();
        let mut combo = Vec::with_capacity(choices.len());
        product(&choices, &mut combo, &mut |conds| {
            if !conds.iter().any(|c| fresh.contains(c)) {
                return;
            }
            let mut preset = conds.to_vec();
            preset.sort_unstable();
            if known.contains(&(t, preset.clone())) || !prefix.is_coset(&preset) {
                return;
            }
            let mut history = BTreeSet::new();
            for &c in &preset {
                if let Some(e) = prefix.conditions[c].producer {
                    history.extend(prefix.events[e].history.iter().copied());
                }
            }
            let mut labels: Vec<String> = history
                .iter()
                .map(|&h| net.transitions()[prefix.events[h].transition].label.name.clone())
                .collect();
            labels.push(tr.label.name.clone());
            labels.sort();
            known.insert((t, preset.clone()));
            pending.insert(Extension {
                key: AdequateKey {
                    size: history.len() + 1,
                    labels,
                },
                transition: t,
                preset,
            });
        });
    }
}

fn product(choices: &[Vec<usize>], acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if acc.len() == choices.len() {
        f(acc);
        return;
    }
    for &c in &choices[acc.len()] {
        acc.push(c);
        product(choices, acc, f);
        acc.pop();
    }
}
