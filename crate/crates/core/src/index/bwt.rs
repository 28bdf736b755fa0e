use super::SuffixArray;

/// Burrows-Wheeler transform of the text, as alphabet codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bwt(pub Vec<u32>);

impl Bwt {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn codes(&self) -> &[u32] {
        &self.0
    }
}

/// `BWT[i] = T[SA[i] - 1]`, or `$` when `SA[i] = 0`.
pub fn bwt_from_sa(text: &[u32], sa: &SuffixArray) -> Bwt {
    Bwt(sa
        .as_slice()
        .iter()
        .map(|&p| if p > 0 { text[p - 1] } else { 0 })
        .collect())
}
