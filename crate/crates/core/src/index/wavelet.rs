use super::{Bwt, IndexError, Interval};

/// Wavelet matrix over the BWT, least-significant bit first.
///
/// Row 0 is the BWT; row r+1 is row r stably partitioned by bit r, 0-bits
/// first, so the last row is column F of the sorted matrix. For every row we
/// keep, per position p in 0..=|T|:
///
/// * `zero_rank[r][p]`: 0-bits (at bit r) among `row[r][..p]`
/// * `one_srank[r][p]`: total 0-bits of `row[r]` plus 1-bits among `row[r][..p]`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveletMatrix {
    width: u32,
    rows: Vec<Vec<u32>>,
    zero_rank: Vec<Vec<usize>>,
    one_srank: Vec<Vec<usize>>,
}

pub fn build_wavelet_matrix(bwt: &Bwt, width: u32) -> Result<WaveletMatrix, IndexError> {
    if width == 0 || width > 31 {
        return Err(IndexError::CodeOutOfRange { code: 0, width });
    }
    if let Some(&code) = bwt.codes().iter().find(|&&c| c >> width != 0) {
        return Err(IndexError::CodeOutOfRange { code, width });
    }

    let n = bwt.len();
    let mut rows = Vec::with_capacity(width as usize + 1);
    let mut zero_rank = Vec::with_capacity(width as usize);
    let mut one_srank = Vec::with_capacity(width as usize);
    let mut row = bwt.codes().to_vec();
    for r in 0..width {
        let mut zeros = Vec::with_capacity(n + 1);
        zeros.push(0);
        for &c in &row {
            zeros.push(zeros.last().unwrap() + usize::from((c >> r) & 1 == 0));
        }
        let total_zeros = zeros[n];
        let shifted: Vec<usize> = (0..=n).map(|p| total_zeros + (p - zeros[p])).collect();

        let (mut next, ones): (Vec<u32>, Vec<u32>) = row.iter().partition(|&&c| (c >> r) & 1 == 0);
        next.extend(ones);

        rows.push(row);
        zero_rank.push(zeros);
        one_srank.push(shifted);
        row = next;
    }
    rows.push(row);

    Ok(WaveletMatrix {
        width,
        rows,
        zero_rank,
        one_srank,
    })
}

impl WaveletMatrix {
    pub fn width(&self) -> u32 {
        self.width
    }

    /// |T|
    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows[0].is_empty()
    }

    /// Row `r` for `r` in `0..=width`; the last one is lexicographically sorted.
    pub fn row(&self, r: usize) -> &[u32] {
        &self.rows[r]
    }

    pub fn zero_rank(&self, r: usize) -> &[usize] {
        &self.zero_rank[r]
    }

    pub fn one_srank(&self, r: usize) -> &[usize] {
        &self.one_srank[r]
    }

    /// `zero_rank[r] ‖ one_srank[r]`, length 2(|T|+1).
    pub fn ranks01(&self, r: usize) -> Vec<u64> {
        self.zero_rank[r]
            .iter()
            .chain(&self.one_srank[r])
            .map(|&v| v as u64)
            .collect()
    }

    /// One partial LF step: bit `r` of `c` selects the 0-rank or 1-srank row.
    pub fn step(&self, r: usize, bit: u32, p: usize) -> usize {
        if bit == 0 {
            self.zero_rank[r][p]
        } else {
            self.one_srank[r][p]
        }
    }

    /// LF mapping of both endpoints, `C(c) + Rank(c, ·)`.
    pub fn lf_interval(&self, c: u32, iv: Interval) -> Interval {
        *self.lf_steps(c, iv).last().expect("width >= 1")
    }

    /// Interval after each bit row.
    pub fn lf_steps(&self, c: u32, iv: Interval) -> Vec<Interval> {
        let mut out = Vec::with_capacity(self.width as usize);
        let (mut f, mut g) = (iv.f, iv.g);
        for r in 0..self.width as usize {
            let bit = (c >> r) & 1;
            f = self.step(r, bit, f);
            g = self.step(r, bit, g);
            out.push(Interval { f, g });
        }
        out
    }
}
