use std::fmt;

use serde::{Deserialize, Serialize};

use super::{FmIndex, IndexError};

/// One step of an alignment. Model moves are not produced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    Sync(String),
    Log(String),
}

impl Move {
    pub fn label(&self) -> &str {
        match self {
            Move::Sync(l) | Move::Log(l) => l,
        }
    }

    pub fn is_log(&self) -> bool {
        matches!(self, Move::Log(_))
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Sync(l) => write!(f, "{l}"),
            Move::Log(l) => write!(f, "[{l}]"),
        }
    }
}

/// Moves in trace order, the trailing separator included; `cost` counts log moves.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Alignment {
    pub moves: Vec<Move>,
    pub cost: usize,
}

impl Alignment {
    pub fn from_moves(moves: Vec<Move>) -> Self {
        let cost = moves.iter().filter(|m| m.is_log()).count();
        Alignment { moves, cost }
    }

    /// Labels of the synchronous moves, i.e. the part matched in the model.
    pub fn matched(&self) -> Vec<&str> {
        self.moves
            .iter()
            .filter(|m| !m.is_log())
            .map(Move::label)
            .collect()
    }
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.moves.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Maximum number of log moves before the check is aborted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Limited(usize),
    Unlimited,
}

impl Budget {
    /// Whether `used` log moves are still within the budget.
    pub fn allows(&self, used: usize) -> bool {
        match *self {
            Budget::Limited(b) => used <= b,
            Budget::Unlimited => true,
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Limited(b) => write!(f, "{b}"),
            Budget::Unlimited => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Budget {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "∞" | "unlimited" => Ok(Budget::Unlimited),
            n => n.parse().map(Budget::Limited),
        }
    }
}

/// Greedy alignment of `trace ‖ ;` against the index, last symbol first.
///
/// A symbol whose LF step empties the interval becomes a log move and the
/// interval from before that symbol is kept.
pub fn align_with_log_moves<S: AsRef<str>>(
    index: &FmIndex,
    trace: &[S],
    budget: Budget,
) -> Result<Alignment, IndexError> {
    let alphabet = index.alphabet();
    let mut query = Vec::with_capacity(trace.len() + 1);
    for l in trace {
        let code = alphabet
            .code(l.as_ref())
            .ok_or_else(|| IndexError::UnknownLabel(l.as_ref().to_owned()))?;
        query.push(code);
    }
    query.push(alphabet.separator());

    let mut iv = index.full();
    let mut moves = Vec::with_capacity(query.len());
    let mut logs = 0;
    for &c in query.iter().rev() {
        let saved = iv;
        iv = index.lf_interval(c, iv);
        let label = alphabet.label(c).expect("code from alphabet").to_owned();
        if iv.is_empty() {
            iv = saved;
            logs += 1;
            if !budget.allows(logs) {
                return Err(IndexError::BudgetExhausted(logs - 1));
            }
            moves.push(Move::Log(label));
        } else {
            moves.push(Move::Sync(label));
        }
    }
    moves.reverse();
    Ok(Alignment { moves, cost: logs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::tests::running_example;
    use crate::model::{Alphabet, RunsText};
    use proptest::prelude::*;

    fn chars(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    /// Fewest deletions from `q` leaving a substring of `text` (empty counts).
    fn min_deletions(text: &[u32], q: &[u32]) -> usize {
        let n = q.len();
        let mut best = n;
        for mask in 0u32..(1 << n) {
            let kept: Vec<u32> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| q[i]).collect();
            let del = n - kept.len();
            if del < best && (kept.is_empty() || text.windows(kept.len()).any(|w| w == kept)) {
                best = del;
            }
        }
        best
    }

    #[test]
    fn fitting_trace() {
        let (_, _, idx) = running_example();
        let al = align_with_log_moves(&idx, &chars("abd"), Budget::Limited(0)).unwrap();
        assert_eq!(al.cost, 0);
        assert_eq!(al.to_string(), "a b d ;");
    }

    #[test]
    fn one_deviation() {
        let (a, t, idx) = running_example();
        let al = align_with_log_moves(&idx, &chars("acbd"), Budget::Unlimited).unwrap();
        assert_eq!(al.cost, 1);
        // cbd; occurs in abcbd;, so the greedy pass drops the a
        assert_eq!(al.to_string(), "[a] c b d ;");
        let q = a.encode_chars("acbd;").unwrap();
        assert_eq!(min_deletions(t.codes(), &q), 1);
    }

    #[test]
    fn budget_exhausted() {
        let (_, _, idx) = running_example();
        let trace = chars("ddd");
        assert!(matches!(
            align_with_log_moves(&idx, &trace, Budget::Limited(1)),
            Err(IndexError::BudgetExhausted(1))
        ));
        assert_eq!(
            align_with_log_moves(&idx, &trace, Budget::Limited(2)).unwrap().cost,
            2
        );
    }

    #[test]
    fn empty_trace_matches_separator() {
        let (_, _, idx) = running_example();
        let al = align_with_log_moves::<&str>(&idx, &[], Budget::Limited(0)).unwrap();
        assert_eq!(al.moves, vec![Move::Sync(";".into())]);
    }

    #[test]
    fn unknown_label() {
        let (_, _, idx) = running_example();
        assert!(matches!(
            align_with_log_moves(&idx, &chars("az"), Budget::Unlimited),
            Err(IndexError::UnknownLabel(l)) if l == "z"
        ));
    }

    #[test]
    fn budget_parse() {
        assert_eq!("inf".parse::<Budget>().unwrap(), Budget::Unlimited);
        assert_eq!("3".parse::<Budget>().unwrap(), Budget::Limited(3));
        assert!("x".parse::<Budget>().is_err());
    }

    fn text_and_trace() -> impl Strategy<Value = (Vec<Vec<u32>>, Vec<u32>)> {
        (
            proptest::collection::vec(proptest::collection::vec(1u32..5, 1..8), 1..8),
            proptest::collection::vec(1u32..5, 0..8),
        )
    }

    proptest! {
        #[test]
        fn greedy_is_feasible_and_never_beats_oracle((runs, trace) in text_and_trace()) {
            let a = Alphabet::from_labels(["a", "b", "c", "d"]).unwrap();
            let mut codes: Vec<u32> = Vec::new();
            for r in &runs {
                codes.extend(r);
                codes.push(a.separator());
            }
            codes.push(0);
            prop_assume!(codes.len() <= 64);
            let t = RunsText::from_codes(codes, &a).unwrap();
            let idx = FmIndex::build(&t, &a).unwrap();
            let labels: Vec<&str> = trace.iter().map(|&c| a.label(c).unwrap()).collect();
            let al = align_with_log_moves(&idx, &labels, Budget::Unlimited).unwrap();

            let kept: Vec<&str> = al.matched();
            let kept_codes: Vec<u32> = kept
                .iter()
                .map(|l| if *l == ";" { a.separator() } else { a.code(l).unwrap() })
                .collect();
            prop_assert!(!idx.backward_search(&kept_codes).is_empty());

            let mut q = trace.clone();
            q.push(a.separator());
            prop_assert!(al.cost >= min_deletions(t.codes(), &q));
            prop_assert_eq!(al.moves.len(), trace.len() + 1);
        }
    }

    /// The greedy pass commits to the longest matching suffix and can pay
    /// more than the optimum.
    #[test]
    fn greedy_divergence() {
        let a = Alphabet::from_labels(["a", "b", "c"]).unwrap();
        let t = RunsText::from_codes(a.encode_chars("ab;c;$").unwrap(), &a).unwrap();
        let idx = FmIndex::build(&t, &a).unwrap();
        let al = align_with_log_moves(&idx, &chars("abc"), Budget::Unlimited).unwrap();
        assert_eq!(al.to_string(), "[a] [b] c ;");
        let q = a.encode_chars("abc;").unwrap();
        assert_eq!(min_deletions(t.codes(), &q), 1);
    }
}
