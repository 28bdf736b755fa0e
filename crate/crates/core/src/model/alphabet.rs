use std::collections::{BTreeSet, HashSet};
use std::fmt;

use super::ModelError;

pub const SENTINEL: u32 = 0;
pub const SENTINEL_STR: &str = "$";
pub const SEPARATOR_STR: &str = ";";

/// Integer coding of activity labels.
///
/// `$` is 0, the activities take 1..=n in lexicographic order and the run
/// separator `;` is n+1, so `$` < every activity < `;`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn from_labels<I, S>(labels: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        if set.iter().any(|l| l.is_empty()) {
            return Err(ModelError::Malformed("empty activity label".into()));
        }
        Ok(Alphabet {
            labels: set.into_iter().collect(),
        })
    }

    /// Number of symbols including `$` and `;`.
    pub fn size(&self) -> usize {
        self.labels.len() + 2
    }

    /// Bits per symbol, `ceil(log2(size))`.
    pub fn width(&self) -> u32 {
        let size = self.size() as u32;
        (u32::BITS - (size - 1).leading_zeros()).max(1)
    }

    pub fn separator(&self) -> u32 {
        self.labels.len() as u32 + 1
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn code(&self, label: &str) -> Option<u32> {
        self.labels
            .binary_search_by(|l| l.as_str().cmp(label))
            .ok()
            .map(|i| i as u32 + 1)
    }

    pub fn label(&self, code: u32) -> Option<&str> {
        match code {
            SENTINEL => Some(SENTINEL_STR),
            c if c == self.separator() => Some(SEPARATOR_STR),
            c => self.labels.get(c as usize - 1).map(String::as_str),
        }
    }

    pub fn encode<S: AsRef<str>>(&self, seq: &[S]) -> Result<Vec<u32>, ModelError> {
        seq.iter()
            .map(|l| {
                self.code(l.as_ref())
                    .ok_or_else(|| ModelError::UnknownLabel(l.as_ref().to_owned()))
            })
            .collect()
    }

    /// Encode a string of one-character labels, where `$` and `;` map to the
    /// sentinel and the separator.
    pub fn encode_chars(&self, text: &str) -> Result<Vec<u32>, ModelError> {
        text.chars()
            .map(|ch| match ch {
                '$' => Ok(SENTINEL),
                ';' => Ok(self.separator()),
                c => self
                    .code(c.encode_utf8(&mut [0; 4]))
                    .ok_or_else(|| ModelError::UnknownLabel(c.to_string())),
            })
            .collect()
    }

    /// Concatenated labels of `codes`; `?` for codes outside the alphabet.
    pub fn render(&self, codes: &[u32]) -> String {
        codes.iter().map(|&c| self.label(c).unwrap_or("?")).collect()
    }

    /// Labels of `labels` that are not part of this alphabet.
    pub fn unknown_labels<'a, S: AsRef<str>>(&self, labels: &'a [S]) -> BTreeSet<&'a str> {
        labels
            .iter()
            .map(AsRef::as_ref)
            .filter(|l| self.code(l).is_none())
            .collect()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{($,0)")?;
        for (i, l) in self.labels.iter().enumerate() {
            write!(f, ",({l},{})", i + 1)?;
        }
        write!(f, ",(;,{})}}", self.separator())
    }
}

/// Build the alphabet shared by a model and a log, which must use the same
/// visible labels.
pub fn relabel<A, B>(model_labels: A, log_labels: B) -> Result<Alphabet, ModelError>
where
    A: IntoIterator,
    A::Item: Into<String>,
    B: IntoIterator,
    B::Item: Into<String>,
{
    let model: BTreeSet<String> = model_labels.into_iter().map(Into::into).collect();
    let log: BTreeSet<String> = log_labels.into_iter().map(Into::into).collect();
    if model != log {
        let diff = model.symmetric_difference(&log).cloned().collect();
        return Err(ModelError::LabelMismatch(diff));
    }
    Alphabet::from_labels(model)
}

/// The concatenated, integer-coded runs: `run1 ; run2 ; ... ; $`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunsText {
    codes: Vec<u32>,
}

impl RunsText {
    /// Wrap raw codes, checking the single trailing `$` and the code range.
    pub fn from_codes(codes: Vec<u32>, alphabet: &Alphabet) -> Result<Self, ModelError> {
        match codes.iter().position(|&c| c == SENTINEL) {
            Some(p) if p + 1 == codes.len() => {}
            _ => {
                return Err(ModelError::Malformed(
                    "runs text must end with a single `$`".into(),
                ))
            }
        }
        if let Some(&bad) = codes.iter().find(|&&c| c as usize >= alphabet.size()) {
            return Err(ModelError::Malformed(format!("code {bad} outside alphabet")));
        }
        Ok(RunsText { codes })
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Split back into runs (codes between separators).
    pub fn runs(&self, alphabet: &Alphabet) -> Vec<Vec<u32>> {
        let body = &self.codes[..self.codes.len() - 1];
        body.split(|&c| c == alphabet.separator())
            .map(<[u32]>::to_vec)
            .filter(|r| !r.is_empty())
            .collect()
    }
}

/// Concatenate label sequences into a runs text, dropping duplicates.
pub fn concatenate<S: AsRef<str>>(
    seqs: &[Vec<S>],
    alphabet: &Alphabet,
) -> Result<RunsText, ModelError> {
    let mut seen = HashSet::new();
    let mut codes = Vec::new();
    for seq in seqs {
        let encoded = alphabet.encode(seq)?;
        if seen.insert(encoded.clone()) {
            codes.extend(encoded);
            codes.push(alphabet.separator());
        }
    }
    codes.push(SENTINEL);
    Ok(RunsText { codes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn abcd() -> Alphabet {
        Alphabet::from_labels(["d", "b", "a", "c"]).unwrap()
    }

    fn seq(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    #[test]
    fn running_example_encoding() {
        let a = relabel(["a", "b", "c", "d"], ["d", "c", "b", "a"]).unwrap();
        assert_eq!(a.to_string(), "{($,0),(a,1),(b,2),(c,3),(d,4),(;,5)}");
        assert_eq!(a.width(), 3);
        assert_eq!(a.size(), 6);
    }

    #[test]
    fn single_label() {
        let a = relabel(["x"], ["x"]).unwrap();
        assert_eq!(a.code("x"), Some(1));
        assert_eq!(a.separator(), 2);
        assert_eq!(a.width(), 2);
    }

    #[test]
    fn widths() {
        let w = |n: usize| Alphabet::from_labels((0..n).map(|i| format!("l{i:02}"))).unwrap().width();
        assert_eq!(w(0), 1);
        assert_eq!(w(2), 2);
        assert_eq!(w(3), 3);
        assert_eq!(w(6), 3);
        assert_eq!(w(7), 4);
    }

    #[test]
    fn mismatch_reports_symmetric_difference() {
        assert_eq!(
            relabel(["a", "b"], ["a", "c"]),
            Err(ModelError::LabelMismatch(vec!["b".into(), "c".into()]))
        );
    }

    #[test]
    fn concatenate_running_example() {
        let a = abcd();
        let t = concatenate(&[seq("abd"), seq("abcbd")], &a).unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(a.render(t.codes()), "abd;abcbd;$");
        assert_eq!(t.codes(), a.encode_chars("abd;abcbd;$").unwrap());
    }

    #[test]
    fn concatenate_empty_and_duplicates() {
        let a = abcd();
        let empty: Vec<Vec<String>> = vec![];
        assert_eq!(a.render(concatenate(&empty, &a).unwrap().codes()), "$");
        let t = concatenate(&[seq("ab"), seq("ab")], &a).unwrap();
        assert_eq!(a.render(t.codes()), "ab;$");
    }

    #[test]
    fn concatenate_unknown_label() {
        assert_eq!(
            concatenate(&[seq("az")], &abcd()),
            Err(ModelError::UnknownLabel("z".into()))
        );
    }

    #[test]
    fn from_codes_checks_sentinel() {
        let a = abcd();
        assert!(RunsText::from_codes(vec![1, 0, 2, 0], &a).is_err());
        assert!(RunsText::from_codes(vec![1, 5], &a).is_err());
        assert!(RunsText::from_codes(vec![1, 9, 0], &a).is_err());
        assert!(RunsText::from_codes(vec![0], &a).is_ok());
    }

    proptest! {
        #[test]
        fn codes_are_ordered(labels in proptest::collection::btree_set("[a-z]{1,4}", 0..12)) {
            let a = Alphabet::from_labels(labels.clone()).unwrap();
            for l in &labels {
                let c = a.code(l).unwrap();
                prop_assert!(SENTINEL < c && c < a.separator());
                prop_assert_eq!(a.label(c), Some(l.as_str()));
            }
            prop_assert!((1u64 << a.width()) >= a.size() as u64);
        }

        #[test]
        fn split_inverts_concatenate(runs in proptest::collection::vec(
            proptest::collection::vec(0usize..4, 1..6), 0..6)) {
            let a = abcd();
            let seqs: Vec<Vec<String>> = runs
                .iter()
                .map(|r| r.iter().map(|&i| a.labels()[i].clone()).collect())
                .collect();
            let mut dedup: Vec<Vec<u32>> = Vec::new();
            for s in &seqs {
                let e = a.encode(s).unwrap();
                if !dedup.contains(&e) {
                    dedup.push(e);
                }
            }
            let t = concatenate(&seqs, &a).unwrap();
            prop_assert_eq!(t.runs(&a), dedup);
        }
    }
}
