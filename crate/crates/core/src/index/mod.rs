//! FM-index over the runs text: suffix array, BWT and a wavelet matrix with
//! fully materialized 0-rank / shifted 1-rank rows. Also hosts the plaintext
//! backward search and log-move aligner that the secure protocol mirrors.

mod align;
mod bwt;
mod persist;
mod suffix_array;
mod wavelet;

pub use align::{align_with_log_moves, Alignment, Budget, Move};
pub use bwt::{bwt_from_sa, Bwt};
pub use persist::{read_index, write_index, INDEX_MAGIC, INDEX_VERSION};
pub use suffix_array::{build_suffix_array, SuffixArray};
pub use wavelet::{build_wavelet_matrix, WaveletMatrix};

use std::fmt;

use thiserror::Error;

use crate::model::{Alphabet, RunsText};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("text must end with exactly one `$`")]
    Sentinel,
    #[error("code {code} does not fit in {width} bits")]
    CodeOutOfRange { code: u32, width: u32 },
    #[error("label `{0}` is not in the alphabet")]
    UnknownLabel(String),
    #[error("log-move budget of {0} exhausted")]
    BudgetExhausted(usize),
    #[error("corrupt index file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Half-open range of suffix-array rows, `⟦f, g⦆`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Interval {
    pub f: usize,
    pub g: usize,
}

impl Interval {
    pub fn new(f: usize, g: usize) -> Self {
        debug_assert!(f <= g);
        Interval { f, g }
    }

    pub fn is_empty(&self) -> bool {
        self.f >= self.g
    }

    pub fn width(&self) -> usize {
        self.g.saturating_sub(self.f)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟦{},{}⦆", self.f, self.g)
    }
}

/// Searchable index of the runs text. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FmIndex {
    alphabet: Alphabet,
    bwt: Bwt,
    wm: WaveletMatrix,
    sa: Option<SuffixArray>,
}

impl FmIndex {
    pub fn build(text: &RunsText, alphabet: &Alphabet) -> Result<Self, IndexError> {
        let sa = build_suffix_array(text.codes())?;
        let bwt = bwt_from_sa(text.codes(), &sa);
        let wm = build_wavelet_matrix(&bwt, alphabet.width())?;
        Ok(FmIndex {
            alphabet: alphabet.clone(),
            bwt,
            wm,
            sa: Some(sa),
        })
    }

    /// Rebuild from a stored BWT; the suffix array is not recoverable.
    pub fn from_bwt(bwt: Bwt, alphabet: Alphabet) -> Result<Self, IndexError> {
        let wm = build_wavelet_matrix(&bwt, alphabet.width())?;
        Ok(FmIndex {
            alphabet,
            bwt,
            wm,
            sa: None,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn bwt(&self) -> &Bwt {
        &self.bwt
    }

    pub fn wavelet(&self) -> &WaveletMatrix {
        &self.wm
    }

    pub fn suffix_array(&self) -> Option<&SuffixArray> {
        self.sa.as_ref()
    }

    /// |T|
    pub fn text_len(&self) -> usize {
        self.bwt.len()
    }

    /// Interval covering every row, `⟦0, |T|⦆`.
    pub fn full(&self) -> Interval {
        Interval::new(0, self.text_len())
    }

    pub fn lf_interval(&self, c: u32, iv: Interval) -> Interval {
        self.wm.lf_interval(c, iv)
    }

    /// Rows whose suffixes start with `q`; empty when `q` does not occur.
    pub fn backward_search(&self, q: &[u32]) -> Interval {
        *self
            .backward_search_steps(q)
            .last()
            .unwrap_or(&self.full())
    }

    /// Interval after each processed character (last character first). Stops
    /// at the first empty interval.
    pub fn backward_search_steps(&self, q: &[u32]) -> Vec<Interval> {
        let mut iv = self.full();
        let mut steps = Vec::with_capacity(q.len());
        for &c in q.iter().rev() {
            if iv.is_empty() {
                break;
            }
            iv = self.lf_interval(c, iv);
            steps.push(iv);
        }
        steps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn running_example() -> (Alphabet, RunsText, FmIndex) {
        let a = Alphabet::from_labels(["a", "b", "c", "d"]).unwrap();
        let t = RunsText::from_codes(a.encode_chars("abd;abcbd;$").unwrap(), &a).unwrap();
        let idx = FmIndex::build(&t, &a).unwrap();
        (a, t, idx)
    }

    #[test]
    fn backward_search_running_example() {
        let (a, _, idx) = running_example();
        let steps = idx.backward_search_steps(&a.encode_chars("acbd").unwrap());
        assert_eq!(
            steps[..3],
            [Interval::new(7, 9), Interval::new(4, 6), Interval::new(6, 7)]
        );
        assert_eq!(steps.len(), 4);
        assert!(steps[3].is_empty());
        assert!(idx.backward_search(&a.encode_chars("acbd").unwrap()).is_empty());
    }

    #[test]
    fn whole_text_without_sentinel_is_found() {
        let (a, _, idx) = running_example();
        let iv = idx.backward_search(&a.encode_chars("abd;abcbd;").unwrap());
        assert!(iv.width() >= 1);
    }

    #[test]
    fn lf_of_empty_stays_empty() {
        let (a, _, idx) = running_example();
        for k in 0..=11 {
            let iv = idx.lf_interval(a.code("b").unwrap(), Interval::new(k, k));
            assert!(iv.is_empty());
        }
    }
}
