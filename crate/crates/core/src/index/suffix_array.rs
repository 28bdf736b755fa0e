use super::IndexError;

/// Positions of all suffixes of the text in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixArray(pub Vec<usize>);

impl SuffixArray {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Prefix-doubling construction. `text` must end with a unique `$` (code 0).
pub fn build_suffix_array(text: &[u32]) -> Result<SuffixArray, IndexError> {
    let n = text.len();
    if n == 0 || text[n - 1] != 0 || text[..n - 1].contains(&0) {
        return Err(IndexError::Sentinel);
    }

    let mut sa: Vec<usize> = (0..n).collect();
    let mut rank: Vec<usize> = text.iter().map(|&c| c as usize).collect();
    let mut next = vec![0usize; n];
    let mut k = 1;
    loop {
        // Unique sentinel: a suffix never runs past `$`, so -1 for "no
        // second half" is only ever compared after the first halves differ.
        let key = |i: usize| (rank[i], if i + k < n { rank[i + k] + 1 } else { 0 });
        sa.sort_unstable_by_key(|&i| key(i));
        next[sa[0]] = 0;
        for w in 1..n {
            next[sa[w]] = next[sa[w - 1]] + usize::from(key(sa[w]) != key(sa[w - 1]));
        }
        std::mem::swap(&mut rank, &mut next);
        if rank[sa[n - 1]] == n - 1 {
            break;
        }
        k *= 2;
    }
    Ok(SuffixArray(sa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(text: &[u32]) -> Vec<usize> {
        let mut sa: Vec<usize> = (0..text.len()).collect();
        sa.sort_by(|&a, &b| text[a..].cmp(&text[b..]));
        sa
    }

    #[test]
    fn running_example() {
        // abd;abcbd;$ with a=1 b=2 c=3 d=4 ;=5
        let t = [1, 2, 4, 5, 1, 2, 3, 2, 4, 5, 0];
        assert_eq!(naive(&t), vec![10, 4, 0, 5, 7, 1, 6, 8, 2, 9, 3]);
        assert_eq!(build_suffix_array(&t).unwrap().0, naive(&t));
    }

    #[test]
    fn sentinel_only() {
        assert_eq!(build_suffix_array(&[0]).unwrap().0, vec![0]);
    }

    #[test]
    fn equal_prefix_shorter_first() {
        assert_eq!(build_suffix_array(&[1, 1, 0]).unwrap().0, vec![2, 1, 0]);
    }

    #[test]
    fn sentinel_errors() {
        assert!(build_suffix_array(&[]).is_err());
        assert!(build_suffix_array(&[1, 2]).is_err());
        assert!(build_suffix_array(&[1, 0, 2, 0]).is_err());
    }

    proptest! {
        #[test]
        fn matches_naive_sort(body in proptest::collection::vec(1u32..5, 0..80)) {
            let mut t = body;
            t.push(0);
            prop_assert_eq!(build_suffix_array(&t).unwrap().0, naive(&t));
        }
    }
}
