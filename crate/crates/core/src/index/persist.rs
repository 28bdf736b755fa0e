//! Index file: little-endian, fixed-width.
//!
//! ```text
//! magic    8 bytes  "FMCCIDX\0"
//! version  u32
//! |T|      u64
//! |Σ|      u32      including $ and ;
//! width    u32
//! labels   |Σ|-2 × (u32 byte length, UTF-8 bytes), in code order 1..
//! bwt      |T| × u32
//! ranks    width × (zero_rank (|T|+1) × u64, one_srank (|T|+1) × u64)
//! ```

use std::io::{Read, Write};

use super::{Bwt, FmIndex, IndexError};
use crate::model::Alphabet;

pub const INDEX_MAGIC: &[u8; 8] = b"FMCCIDX\0";
pub const INDEX_VERSION: u32 = 1;

const MAX_LABEL_BYTES: u32 = 1 << 16;

pub fn write_index<W: Write>(index: &FmIndex, mut w: W) -> Result<(), IndexError> {
    let alphabet = index.alphabet();
    let wm = index.wavelet();
    w.write_all(INDEX_MAGIC)?;
    w.write_all(&INDEX_VERSION.to_le_bytes())?;
    w.write_all(&(index.text_len() as u64).to_le_bytes())?;
    w.write_all(&(alphabet.size() as u32).to_le_bytes())?;
    w.write_all(&alphabet.width().to_le_bytes())?;
    for l in alphabet.labels() {
        w.write_all(&(l.len() as u32).to_le_bytes())?;
        w.write_all(l.as_bytes())?;
    }
    let mut buf = Vec::with_capacity(index.text_len() * 4);
    for &c in index.bwt().codes() {
        buf.extend_from_slice(&c.to_le_bytes());
    }
    w.write_all(&buf)?;
    for r in 0..wm.width() as usize {
        buf.clear();
        for &v in wm.zero_rank(r).iter().chain(wm.one_srank(r)) {
            buf.extend_from_slice(&(v as u64).to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes(&mut self, n: usize) -> Result<Vec<u8>, IndexError> {
        let mut buf = Vec::new();
        let got = (&mut self.inner).take(n as u64).read_to_end(&mut buf)?;
        if got != n {
            return Err(IndexError::Corrupt("truncated".into()));
        }
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }
}

/// Read and verify an index file. The rank tables are recomputed from the
/// BWT and must match the stored ones.
pub fn read_index<R: Read>(r: R) -> Result<FmIndex, IndexError> {
    let mut r = Reader { inner: r };
    if r.bytes(8)? != INDEX_MAGIC {
        return Err(IndexError::Corrupt("bad magic".into()));
    }
    let version = r.u32()?;
    if version != INDEX_VERSION {
        return Err(IndexError::Corrupt(format!("unsupported version {version}")));
    }
    let n = usize::try_from(r.u64()?).map_err(|_| IndexError::Corrupt("length".into()))?;
    let size = r.u32()?;
    let width = r.u32()?;
    if size < 2 {
        return Err(IndexError::Corrupt(format!("alphabet size {size}")));
    }
    let mut labels = Vec::new();
    for _ in 0..size - 2 {
        let len = r.u32()?;
        if len == 0 || len > MAX_LABEL_BYTES {
            return Err(IndexError::Corrupt(format!("label length {len}")));
        }
        let bytes = r.bytes(len as usize)?;
        labels.push(String::from_utf8(bytes).map_err(|_| IndexError::Corrupt("label utf-8".into()))?);
    }
    let alphabet =
        Alphabet::from_labels(labels.clone()).map_err(|e| IndexError::Corrupt(e.to_string()))?;
    if alphabet.labels() != labels.as_slice() {
        return Err(IndexError::Corrupt("labels not sorted or not distinct".into()));
    }
    if alphabet.width() != width {
        return Err(IndexError::Corrupt(format!("width {width} for alphabet of {size}")));
    }

    let raw = r.bytes(n.checked_mul(4).ok_or_else(|| IndexError::Corrupt("length".into()))?)?;
    let codes: Vec<u32> = raw
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if codes.iter().filter(|&&c| c == 0).count() != 1 {
        return Err(IndexError::Sentinel);
    }
    if let Some(&code) = codes.iter().find(|&&c| c >= size) {
        return Err(IndexError::CodeOutOfRange { code, width });
    }
    let index = FmIndex::from_bwt(Bwt(codes), alphabet)?;

    let wm = index.wavelet();
    for row in 0..width as usize {
        for (p, &expect) in wm.zero_rank(row).iter().chain(wm.one_srank(row)).enumerate() {
            if r.u64()? != expect as u64 {
                return Err(IndexError::Corrupt(format!("rank row {row} position {p}")));
            }
        }
    }
    let mut rest = [0u8; 1];
    if r.inner.read(&mut rest)? != 0 {
        return Err(IndexError::Corrupt("trailing bytes".into()));
    }
    Ok(index)
}
