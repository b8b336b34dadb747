//! The `emb1` binary container, little-endian throughout:
//!
//! ```text
//! magic    4 bytes  "EMB1"
//! version  u16      1
//! flags    u16      0 (reserved)
//! dim      u32
//! count    u64
//! modality u16 length + UTF-8
//! space    u16 length + UTF-8
//! count x { id: u16 length + UTF-8, values: dim x f32 }
//! ```

use super::{EmbeddingFile, EmbeddingRecord};
use crate::embedding::{ModalityId, SpaceId};
use crate::error::{Error, Result};

pub const EMB1_MAGIC: [u8; 4] = *b"EMB1";
pub const EMB1_VERSION: u16 = 1;

fn put_str(buf: &mut Vec<u8>, s: &str, what: &str) -> Result<()> {
    let len = u16::try_from(s.len())
        .map_err(|_| Error::InvalidHeader(format!("{what} longer than {} bytes", u16::MAX)))?;
    buf.extend_from_slice(&len.to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
    Ok(())
}

pub fn encode_emb1(file: &EmbeddingFile) -> Result<Vec<u8>> {
    let dim = u32::try_from(file.dim())
        .map_err(|_| Error::InvalidHeader("dim does not fit in u32".into()))?;
    let payload: usize = file
        .records()
        .iter()
        .map(|r| 2 + r.id.len() + 4 * r.values.len())
        .sum();
    let mut buf = Vec::with_capacity(
        24 + file.modality().as_str().len() + file.space().as_str().len() + payload,
    );
    buf.extend_from_slice(&EMB1_MAGIC);
    buf.extend_from_slice(&EMB1_VERSION.to_le_bytes());
    buf.extend_from_slice(&0u16.to_le_bytes());
    buf.extend_from_slice(&dim.to_le_bytes());
    buf.extend_from_slice(&(file.count() as u64).to_le_bytes());
    put_str(&mut buf, file.modality().as_str(), "modality")?;
    put_str(&mut buf, file.space().as_str(), "space")?;
    for record in file.records() {
        put_str(&mut buf, &record.id, "record id")?;
        for v in &record.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(buf)
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8]> {
        if self.buf.len() < n {
            return Err(Error::TruncatedFile(what));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn array<const N: usize>(&mut self, what: &'static str) -> Result<[u8; N]> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }

    fn u16(&mut self, what: &'static str) -> Result<u16> {
        self.array(what).map(u16::from_le_bytes)
    }

    fn string(&mut self, what: &'static str) -> Result<String> {
        let len = self.u16(what)? as usize;
        let bytes = self.take(len, what)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| Error::InvalidHeader(format!("{what} is not valid UTF-8")))
    }
}

pub fn decode_emb1(bytes: &[u8]) -> Result<EmbeddingFile> {
    let mut r = Reader { buf: bytes };
    let magic: [u8; 4] = r.array("magic")?;
    if magic != EMB1_MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let version = r.u16("version")?;
    if version != EMB1_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let flags = r.u16("flags")?;
    if flags != 0 {
        return Err(Error::InvalidHeader(format!(
            "reserved flags are {flags:#06x}, expected 0"
        )));
    }
    let dim = u32::from_le_bytes(r.array("dim")?) as usize;
    let count = u64::from_le_bytes(r.array("count")?);
    let modality = ModalityId::new(r.string("modality")?)?;
    let space = SpaceId::new(r.string("space")?)?;
    if dim == 0 && count > 0 {
        return Err(Error::InvalidHeader("dim must be at least 1".into()));
    }

    // Bound the allocation by what the remaining bytes could possibly hold.
    let min_record = 2 + 4 * dim;
    let capacity = (count as usize).min(r.buf.len() / min_record.max(1));
    let mut records = Vec::with_capacity(capacity);
    for _ in 0..count {
        let id = r.string("record id")?;
        let raw = r.take(4 * dim, "record values")?;
        let values = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        records.push(EmbeddingRecord { id, values });
    }
    if !r.buf.is_empty() {
        return Err(Error::TrailingBytes(r.buf.len()));
    }
    EmbeddingFile::new(modality, space, dim, records)
}
