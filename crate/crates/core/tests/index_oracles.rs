//! FM-index queries against naive counting.

use fmcc_core::index::{build_suffix_array, FmIndex, Interval};
use fmcc_core::model::{Alphabet, RunsText};
use proptest::prelude::*;

fn alphabet(n: usize) -> Alphabet {
    Alphabet::from_labels((0..n).map(|i| ((b'a' + i as u8) as char).to_string())).unwrap()
}

/// Runs text over `a` from a flat list of label codes; 0 marks a run end.
fn text(a: &Alphabet, flat: &[u32]) -> RunsText {
    let mut codes: Vec<u32> = flat
        .iter()
        .map(|&c| if c == 0 { a.separator() } else { c })
        .collect();
    if codes.last() != Some(&a.separator()) {
        codes.push(a.separator());
    }
    codes.push(0);
    RunsText::from_codes(codes, a).unwrap()
}

fn occurrences(t: &[u32], q: &[u32]) -> usize {
    t.windows(q.len()).filter(|w| *w == q).count()
}

/// `C(c) + Rank(c, i)` over the BWT by direct counting.
fn lf_oracle(bwt: &[u32], c: u32, i: usize) -> usize {
    bwt.iter().filter(|&&x| x < c).count() + bwt[..i].iter().filter(|&&x| x == c).count()
}

fn all_queries(sigma: u32, max_len: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for q in &frontier {
            for c in 1..sigma {
                let mut q2: Vec<u32> = q.clone();
                q2.push(c);
                next.push(q2);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn running_example_suffix_array() {
    let a = alphabet(4);
    let t = a.encode_chars("abd;abcbd;$").unwrap();
    assert_eq!(build_suffix_array(&t).unwrap().as_slice(), &[10, 4, 0, 5, 7, 1, 6, 8, 2, 9, 3]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interval_width_counts_occurrences(
        n in 1usize..4,
        flat in proptest::collection::vec(0u32..4, 1..40),
    ) {
        let a = alphabet(n);
        let flat: Vec<u32> = flat.into_iter().map(|c| c % (n as u32 + 1)).collect();
        let t = text(&a, &flat);
        let idx = FmIndex::build(&t, &a).unwrap();
        for q in all_queries(a.size() as u32, 6.min(8 - n)) {
            let iv = idx.backward_search(&q);
            prop_assert_eq!(iv.width(), occurrences(t.codes(), &q), "{:?}", q);
        }
    }

    #[test]
    fn lf_matches_c_plus_rank(
        n in 1usize..7,
        flat in proptest::collection::vec(0u32..7, 1..62),
    ) {
        let a = alphabet(n);
        let flat: Vec<u32> = flat.into_iter().map(|c| c % (n as u32 + 1)).collect();
        let t = text(&a, &flat);
        prop_assume!(t.len() <= 64);
        let idx = FmIndex::build(&t, &a).unwrap();
        let bwt = idx.bwt().codes();
        for c in 0..a.size() as u32 {
            for i in 0..=t.len() {
                let got = idx.lf_interval(c, Interval::new(i, i));
                prop_assert_eq!(got.f, lf_oracle(bwt, c, i));
            }
        }
    }
}
