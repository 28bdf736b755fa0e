use std::collections::{BTreeSet, HashSet};

use super::{ActivityLabel, BranchingPrefix, ModelError};

pub const DEFAULT_EXTENSION_CAP: usize = 10_000;

/// A run of the prefix as a partial order over its events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPO {
    /// Prefix event ids, ascending.
    pub events: Vec<usize>,
    /// Label of each entry of `events`; silent labels are kept but flagged.
    pub labels: Vec<ActivityLabel>,
    /// Immediate causal predecessors, as indices into `events`.
    pub predecessors: Vec<Vec<usize>>,
    pub complete: bool,
}

impl RunPO {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Whether `a` causally precedes `b` (indices into `events`).
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        let mut stack = vec![b];
        let mut seen = HashSet::new();
        while let Some(x) = stack.pop() {
            for &p in &self.predecessors[x] {
                if p == a {
                    return true;
                }
                if seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        false
    }
}

/// All configurations of the prefix whose cut corresponds to the final
/// marking, as partial orders.
pub fn complete_runs(prefix: &BranchingPrefix) -> Vec<RunPO> {
    let net = prefix.net();
    let initial_cut: BTreeSet<usize> = prefix.initial_conditions().collect();
    let mut consumers: Vec<Vec<usize>> = vec![Vec::new(); prefix.conditions.len()];
    for (e, ev) in prefix.events.iter().enumerate() {
        for &c in &ev.preset {
            consumers[c].push(e);
        }
    }

    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut stack: Vec<(Vec<usize>, BTreeSet<usize>)> = vec![(Vec::new(), initial_cut)];
    visited.insert(Vec::new());

    while let Some((config, cut)) = stack.pop() {
        let places: BTreeSet<usize> = cut.iter().map(|&c| prefix.conditions[c].place).collect();
        if places == *net.final_marking() && places.len() == cut.len() {
            found.insert(config.clone());
        }
        let enabled: BTreeSet<usize> = cut
            .iter()
            .flat_map(|&c| consumers[c].iter().copied())
            .filter(|&e| prefix.events[e].preset.iter().all(|c| cut.contains(c)))
            .collect();
        for e in enabled {
            let mut next_config = config.clone();
            let pos = next_config.binary_search(&e).unwrap_err();
            next_config.insert(pos, e);
            if !visited.insert(next_config.clone()) {
                continue;
            }
            let mut next_cut = cut.clone();
            for c in &prefix.events[e].preset {
                next_cut.remove(c);
            }
            next_cut.extend(prefix.events[e].postset.iter().copied());
            stack.push((next_config, next_cut));
        }
    }

    found
        .into_iter()
        .map(|events| {
            let index_of = |e: usize| events.binary_search(&e).expect("event in run");
            let predecessors = events
                .iter()
                .map(|&e| {
                    let mut preds: Vec<usize> = prefix.events[e]
                        .preset
                        .iter()
                        .filter_map(|&c| prefix.conditions[c].producer)
                        .map(index_of)
                        .collect();
                    preds.sort_unstable();
                    preds.dedup();
                    preds
                })
                .collect();
            let labels = events
                .iter()
                .map(|&e| net.transitions()[prefix.events[e].transition].label.clone())
                .collect();
            RunPO {
                events,
                labels,
                predecessors,
                complete: true,
            }
        })
        .collect()
}

/// Distinct label sequences of all linear extensions of `run`, silent
/// events erased, lexicographically smallest first.
///
/// Fails with [`ModelError::CapExceeded`] rather than truncating.
pub fn linear_extensions(run: &RunPO, cap: usize) -> Result<Vec<Vec<String>>, ModelError> {
    let n = run.len();
    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (i, preds) in run.predecessors.iter().enumerate() {
        indegree[i] = preds.len();
        for &p in preds {
            successors[p].push(i);
        }
    }

    struct Walk<'a> {
        run: &'a RunPO,
        successors: Vec<Vec<usize>>,
        cap: usize,
        out: BTreeSet<Vec<String>>,
        // (remaining-set, emitted prefix) states already expanded
        expanded: HashSet<(Vec<bool>, Vec<String>)>,
    }

    impl Walk<'_> {
        fn go(
            &mut self,
            done: &mut Vec<bool>,
            indegree: &mut Vec<usize>,
            seq: &mut Vec<String>,
            left: usize,
        ) -> Result<(), ModelError> {
            if left == 0 {
                self.out.insert(seq.clone());
                if self.out.len() > self.cap {
                    return Err(ModelError::CapExceeded(self.cap));
                }
                return Ok(());
            }
            if !self.expanded.insert((done.clone(), seq.clone())) {
                return Ok(());
            }
            let mut ready: Vec<usize> = (0..done.len())
                .filter(|&i| !done[i] && indegree[i] == 0)
                .collect();
            ready.sort_by(|&a, &b| self.run.labels[a].name.cmp(&self.run.labels[b].name));
            for i in ready {
                done[i] = true;
                for k in 0..self.successors[i].len() {
                    indegree[self.successors[i][k]] -= 1;
                }
                let label = &self.run.labels[i];
                if !label.silent {
                    seq.push(label.name.clone());
                }
                let res = self.go(done, indegree, seq, left - 1);
                if !label.silent {
                    seq.pop();
                }
                for k in 0..self.successors[i].len() {
                    indegree[self.successors[i][k]] += 1;
                }
                done[i] = false;
                res?;
            }
            Ok(())
        }
    }

    let mut walk = Walk {
        run,
        successors,
        cap,
        out: BTreeSet::new(),
        expanded: HashSet::new(),
    };
    walk.go(&mut vec![false; n], &mut indegree, &mut Vec::new(), n)?;
    Ok(walk.out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::loop_net;
    use crate::model::{unfold, PetriNet};

    fn seqs(v: &[&str]) -> Vec<Vec<String>> {
        v.iter()
            .map(|s| s.chars().map(|c| c.to_string()).collect())
            .collect()
    }

    fn linear(n: usize, chain: bool) -> RunPO {
        RunPO {
            events: (0..n).collect(),
            labels: (0..n)
                .map(|i| ActivityLabel::visible(((b'a' + i as u8) as char).to_string()))
                .collect(),
            predecessors: (0..n)
                .map(|i| if chain && i > 0 { vec![i - 1] } else { vec![] })
                .collect(),
            complete: true,
        }
    }

    #[test]
    fn running_example_runs() {
        let prefix = unfold(&loop_net(), 100).unwrap();
        let runs = complete_runs(&prefix);
        assert_eq!(runs.len(), 2);
        let mut all: Vec<Vec<String>> = runs
            .iter()
            .flat_map(|r| linear_extensions(r, 10).unwrap())
            .collect();
        all.sort();
        assert_eq!(all, seqs(&["abcbd", "abd"]));
        assert!(runs.iter().all(|r| r.complete));
    }

    #[test]
    fn single_transition_run() {
        let net = PetriNet::new(
            vec!["p1".into(), "p2".into()],
            vec![("a".into(), ActivityLabel::visible("a"))],
            vec![("p1".into(), "a".into()), ("a".into(), "p2".into())],
            vec!["p1".into()],
            None,
        )
        .unwrap();
        let runs = complete_runs(&unfold(&net, 10).unwrap());
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].len(), 1);
    }

    #[test]
    fn parallel_branches_are_unordered() {
        // fork -> {x | y} -> join
        let doc = r#"{"places":["i","p1","p2","q1","q2","o"],
          "transitions":[{"id":"f","label":"f"},{"id":"x","label":"x"},{"id":"y","label":"y"},
                         {"id":"j","label":"j"}],
          "arcs":[["i","f"],["f","p1"],["f","p2"],["p1","x"],["x","q1"],["p2","y"],["y","q2"],
                  ["q1","j"],["q2","j"],["j","o"]],
          "initial":["i"],"final":["o"]}"#;
        let net = crate::model::parse_model(doc.as_bytes(), crate::model::ModelFormat::Json)
            .unwrap();
        let runs = complete_runs(&unfold(&net, 100).unwrap());
        assert_eq!(runs.len(), 1);
        let run = &runs[0];
        let pos = |l: &str| run.labels.iter().position(|x| x.name == l).unwrap();
        assert!(!run.precedes(pos("x"), pos("y")));
        assert!(!run.precedes(pos("y"), pos("x")));
        assert!(run.precedes(pos("f"), pos("j")));
        assert_eq!(
            linear_extensions(run, 10).unwrap(),
            seqs(&["fxyj", "fyxj"])
        );
    }

    #[test]
    fn total_order_has_one_extension() {
        assert_eq!(linear_extensions(&linear(3, true), 10).unwrap(), seqs(&["abc"]));
    }

    #[test]
    fn two_concurrent_events() {
        // a < {x, y} < b
        let run = RunPO {
            events: vec![0, 1, 2, 3],
            labels: ["a", "x", "y", "b"]
                .iter()
                .map(|s| ActivityLabel::visible(*s))
                .collect(),
            predecessors: vec![vec![], vec![0], vec![0], vec![1, 2]],
            complete: true,
        };
        assert_eq!(linear_extensions(&run, 10).unwrap(), seqs(&["axyb", "ayxb"]));
    }

    #[test]
    fn cap_is_an_error_not_truncation() {
        // 4 unordered events: 24 extensions
        let run = linear(4, false);
        assert_eq!(linear_extensions(&run, 24).unwrap().len(), 24);
        assert_eq!(
            linear_extensions(&run, 23),
            Err(ModelError::CapExceeded(23))
        );
    }

    #[test]
    fn silent_events_are_erased() {
        let mut run = linear(3, true);
        run.labels[1] = ActivityLabel::silent("t");
        assert_eq!(linear_extensions(&run, 10).unwrap(), seqs(&["ac"]));
        // concurrent silent event does not multiply sequences
        let mut run = linear(3, false);
        run.labels[2] = ActivityLabel::silent("t");
        assert_eq!(linear_extensions(&run, 2).unwrap(), seqs(&["ab", "ba"]));
    }
}
