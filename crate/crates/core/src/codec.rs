//! Little-endian byte readers and writers shared by every serialized
//! structure. All on-disk integers are fixed width; nothing here is
//! platform dependent.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("input truncated: needed {needed} more bytes")]
    Truncated { needed: usize },
    #[error("bad magic or tag: {context}")]
    BadTag { context: String },
}

pub fn put_u8(buf: &mut Vec<u8>, v: u8) {
    buf.push(v);
}

pub fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

pub fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

pub fn put_bytes(buf: &mut Vec<u8>, v: &[u8]) {
    put_u64(buf, v.len() as u64);
    buf.extend_from_slice(v);
}

/// Cursor over a serialized byte slice.
pub struct Reader<'a> {
    data: &'a [u8],
    off: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Reader { data, off: 0 }
    }

    pub fn is_done(&self) -> bool {
        self.off == self.data.len()
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.off + n > self.data.len() {
            return Err(CodecError::Truncated {
                needed: self.off + n - self.data.len(),
            });
        }
        let s = &self.data[self.off..self.off + n];
        self.off += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], CodecError> {
        let len = self.u64()? as usize;
        self.take(len)
    }

    /// Consumes and returns everything not yet read.
    pub fn rest(&mut self) -> &'a [u8] {
        let s = &self.data[self.off..];
        self.off = self.data.len();
        s
    }

    /// Checks that the next bytes equal `expected` and consumes them.
    pub fn expect(&mut self, expected: &[u8], context: &str) -> Result<(), CodecError> {
        let got = self.take(expected.len())?;
        if got != expected {
            return Err(CodecError::BadTag {
                context: context.to_string(),
            });
        }
        Ok(())
    }
}
