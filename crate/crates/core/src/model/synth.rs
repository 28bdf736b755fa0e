//! Synthetic block-structured workflow nets, used by the benchmark harness
//! and by randomized tests.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{ActivityLabel, PetriNet};

/// Block-structured process description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Activity(String),
    Seq(Vec<Block>),
    Xor(Vec<Block>),
    And(Vec<Block>),
    /// `Loop(body, redo)`: body, then optionally redo and body again.
    Loop(Box<Block>, Box<Block>),
}

impl Block {
    pub fn act(label: &str) -> Block {
        Block::Activity(label.to_owned())
    }

    /// Workflow net with one source place `i` and one sink place `o`.
    pub fn to_net(&self) -> PetriNet {
        let mut b = NetBuilder::default();
        let i = b.place();
        let o = b.place();
        b.build(self, &i, &o);
        PetriNet::new(b.places, b.transitions, b.arcs, vec![i], Some(vec![o]))
            .expect("block nets are well formed")
    }
}

#[derive(Default)]
struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<(String, ActivityLabel)>,
    arcs: Vec<(String, String)>,
}

impl NetBuilder {
    fn place(&mut self) -> String {
        let id = format!("p{}", self.places.len());
        self.places.push(id.clone());
        id
    }

    fn transition(&mut self, label: ActivityLabel, pre: &[&str], post: &[&str]) {
        let id = format!("t{}", self.transitions.len());
        for p in pre {
            self.arcs.push((p.to_string(), id.clone()));
        }
        for p in post {
            self.arcs.push((id.clone(), p.to_string()));
        }
        self.transitions.push((id, label));
    }

    fn tau(&mut self, pre: &[&str], post: &[&str]) {
        let name = format!("tau{}", self.transitions.len());
        self.transition(ActivityLabel::silent(name), pre, post);
    }

    fn build(&mut self, block: &Block, entry: &str, exit: &str) {
        match block {
            Block::Activity(l) => self.transition(ActivityLabel::visible(l.clone()), &[entry], &[exit]),
            Block::Seq(items) => {
                let mut from = entry.to_owned();
                for (k, item) in items.iter().enumerate() {
                    let to = if k + 1 == items.len() {
                        exit.to_owned()
                    } else {
                        self.place()
                    };
                    self.build(item, &from, &to);
                    from = to;
                }
                if items.is_empty() {
                    self.tau(&[entry], &[exit]);
                }
            }
            Block::Xor(branches) => {
                for br in branches {
                    // Private entry so a looping branch cannot re-enable its siblings.
                    let p = self.place();
                    self.tau(&[entry], &[&p]);
                    self.build(br, &p, exit);
                }
            }
            Block::And(branches) => {
                let starts: Vec<String> = branches.iter().map(|_| self.place()).collect();
                let ends: Vec<String> = branches.iter().map(|_| self.place()).collect();
                let s: Vec<&str> = starts.iter().map(String::as_str).collect();
                let e: Vec<&str> = ends.iter().map(String::as_str).collect();
                self.tau(&[entry], &s);
                for (k, br) in branches.iter().enumerate() {
                    self.build(br, &starts[k], &ends[k]);
                }
                self.tau(&e, &[exit]);
            }
            Block::Loop(body, redo) => {
                let start = self.place();
                let mid = self.place();
                self.tau(&[entry], &[&start]);
                self.build(body, &start, &mid);
                self.build(redo, &mid, &start);
                self.tau(&[&mid], &[exit]);
            }
        }
    }
}

/// The 9-activity model with two consecutive blocks of parallelism:
/// `a`, then `b c d e` concurrently, `f`, then `g h i` concurrently.
/// Forks and joins are the visible `a` and `f`, so there are no silent
/// transitions; the model has 4! * 3! = 144 linearizations.
pub fn two_parallel_blocks() -> PetriNet {
    let p = |s: &str| s.to_owned();
    let mut places = vec![p("start")];
    let mut transitions = Vec::new();
    let mut arcs = Vec::new();
    let mut t = |id: &str, pre: Vec<String>, post: Vec<String>| {
        transitions.push((id.to_owned(), ActivityLabel::visible(id)));
        for x in pre {
            arcs.push((x, id.to_owned()));
        }
        for x in post {
            arcs.push((id.to_owned(), x));
        }
    };
    let xs: Vec<String> = (1..=4).map(|k| format!("x{k}")).collect();
    let ys: Vec<String> = (1..=4).map(|k| format!("y{k}")).collect();
    let zs: Vec<String> = (1..=3).map(|k| format!("z{k}")).collect();
    let ws: Vec<String> = (1..=3).map(|k| format!("w{k}")).collect();
    t("a", vec![p("start")], xs.clone());
    for (k, l) in ["b", "c", "d", "e"].iter().enumerate() {
        t(l, vec![xs[k].clone()], vec![ys[k].clone()]);
    }
    t("f", ys.clone(), zs.clone());
    for (k, l) in ["g", "h", "i"].iter().enumerate() {
        t(l, vec![zs[k].clone()], vec![ws[k].clone()]);
    }
    places.extend(xs);
    places.extend(ys);
    places.extend(zs);
    places.extend(ws.clone());
    PetriNet::new(places, transitions, arcs, vec![p("start")], Some(ws))
        .expect("valid net")
}

/// Running-example style model with one loop: `a (b c)* b d`, i.e. the
/// loop `b c` is entered from `a` and left through `d`.
pub fn single_loop(prefix: &[&str], body: &str, redo: &str, suffix: &[&str]) -> Block {
    let mut items: Vec<Block> = prefix.iter().map(|l| Block::act(l)).collect();
    items.push(Block::Loop(Box::new(Block::act(body)), Box::new(Block::act(redo))));
    items.extend(suffix.iter().map(|l| Block::act(l)));
    Block::Seq(items)
}

/// Random block tree over distinct labels drawn from `pool`.
///
/// At most one loop is generated and every composite block has two or three
/// children, so linearization counts stay small.
pub fn random_block<R: Rng>(rng: &mut R, pool: &[String], max_depth: usize) -> Block {
    let mut labels: Vec<String> = pool.to_vec();
    labels.shuffle(rng);
    let mut loops = 0;
    gen(rng, labels, max_depth, &mut loops)
}

fn gen<R: Rng>(rng: &mut R, mut labels: Vec<String>, depth: usize, loops: &mut usize) -> Block {
    assert!(!labels.is_empty(), "label pool exhausted");
    let kind = if depth == 0 || labels.len() < 2 {
        0
    } else {
        rng.gen_range(0..10)
    };
    let arity = if kind <= 5 { 3 } else { 2 };
    let split = |rng: &mut R, labels: Vec<String>, n: usize| -> Vec<Vec<String>> {
        let n = n.min(labels.len());
        let mut cuts: Vec<usize> = (1..labels.len()).collect();
        cuts.shuffle(rng);
        let mut cuts: Vec<usize> = cuts.into_iter().take(n - 1).collect();
        cuts.sort_unstable();
        let mut out = Vec::new();
        let mut rest = labels;
        for &c in cuts.iter().rev() {
            out.push(rest.split_off(c));
        }
        out.push(rest);
        out.reverse();
        out
    };
    match kind {
        0..=2 => Block::Activity(labels.pop().unwrap()),
        3..=5 => {
            let n = rng.gen_range(2..=arity);
            let parts = split(rng, labels, n);
            Block::Seq(parts.into_iter().map(|p| gen(rng, p, depth - 1, loops)).collect())
        }
        6 | 7 => {
            let parts = split(rng, labels, 2);
            Block::Xor(parts.into_iter().map(|p| gen(rng, p, depth - 1, loops)).collect())
        }
        8 => {
            let parts = split(rng, labels, 2);
            Block::And(parts.into_iter().map(|p| gen(rng, p, depth - 1, loops)).collect())
        }
        _ if *loops == 0 => {
            *loops += 1;
            let redo = labels.pop().unwrap();
            let body = labels.pop().unwrap();
            Block::Loop(Box::new(Block::Activity(body)), Box::new(Block::Activity(redo)))
        }
        _ => Block::Activity(labels.pop().unwrap()),
    }
}

/// Insert `count` random labels from `alphabet` at random positions.
pub fn inject_events<R: Rng>(
    rng: &mut R,
    trace: &[String],
    alphabet: &[String],
    count: usize,
) -> Vec<String> {
    let mut out = trace.to_vec();
    for _ in 0..count {
        let pos = rng.gen_range(0..=out.len());
        let label = alphabet.choose(rng).expect("non-empty alphabet").clone();
        out.insert(pos, label);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{linearized_runs, DEFAULT_EXTENSION_CAP, DEFAULT_MAX_EVENTS};
    use rand::SeedableRng;

    #[test]
    fn two_blocks_has_nine_visible_transitions() {
        let net = two_parallel_blocks();
        assert_eq!(net.transitions().len(), 9);
        assert!(net.transitions().iter().all(|t| !t.label.silent));
    }

    #[test]
    fn loop_block_unrolls_once() {
        let net = single_loop(&["a"], "b", "c", &["d"]).to_net();
        let mut runs = linearized_runs(&net, DEFAULT_MAX_EVENTS, DEFAULT_EXTENSION_CAP).unwrap();
        runs.sort();
        let s = |v: &str| v.chars().map(|c| c.to_string()).collect::<Vec<_>>();
        assert_eq!(runs, vec![s("abcbd"), s("abd")]);
    }

    #[test]
    fn random_blocks_unfold() {
        let pool: Vec<String> = "abcdefgh".chars().map(|c| c.to_string()).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let net = random_block(&mut rng, &pool, 3).to_net();
            let runs = linearized_runs(&net, DEFAULT_MAX_EVENTS, DEFAULT_EXTENSION_CAP).unwrap();
            assert!(!runs.is_empty());
        }
    }
}
