//! Low-level protobuf wire format: varints, tags, and length-delimited framing.

use std::io::{self, Read, Write};

use crate::error::{Error, Result};

pub const WIRE_VARINT: u32 = 0;
pub const WIRE_FIXED64: u32 = 1;
pub const WIRE_LEN: u32 = 2;
pub const WIRE_FIXED32: u32 = 5;

pub fn encode_varint(mut value: u64, out: &mut Vec<u8>) {
    loop {
        let byte = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

pub fn zigzag32(v: i32) -> u64 {
    (((v << 1) ^ (v >> 31)) as u32) as u64
}

pub fn zigzag64(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

pub fn unzigzag32(v: u64) -> i32 {
    let v = v as u32;
    ((v >> 1) as i32) ^ -((v & 1) as i32)
}

pub fn unzigzag64(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

pub fn encode_tag(field_number: u32, wire_type: u32, out: &mut Vec<u8>) {
    encode_varint(((field_number as u64) << 3) | wire_type as u64, out);
}

/// Cursor over a byte buffer that tracks its absolute offset for error reporting.
pub struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    base: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Cursor { buf, pos: 0, base: 0 }
    }

    pub fn with_base(buf: &'a [u8], base: usize) -> Self {
        Cursor { buf, pos: 0, base }
    }

    pub fn offset(&self) -> usize {
        self.base + self.pos
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn is_empty(&self) -> bool {
        self.pos >= self.buf.len()
    }

    fn err(&self, reason: impl Into<String>) -> Error {
        Error::WireDecode {
            offset: self.offset(),
            reason: reason.into(),
        }
    }

    pub fn read_varint(&mut self) -> Result<u64> {
        let mut value: u64 = 0;
        let mut shift = 0;
        loop {
            if self.pos >= self.buf.len() {
                return Err(self.err("truncated varint"));
            }
            if shift >= 64 {
                return Err(self.err("varint overflows 64 bits"));
            }
            let byte = self.buf[self.pos];
            self.pos += 1;
            value |= ((byte & 0x7f) as u64) << shift;
            if byte & 0x80 == 0 {
                return Ok(value);
            }
            shift += 7;
        }
    }

    pub fn read_tag(&mut self) -> Result<(u32, u32)> {
        let raw = self.read_varint()?;
        let field_number = (raw >> 3) as u32;
        let wire_type = (raw & 0x7) as u32;
        if field_number == 0 {
            return Err(self.err("field number 0 is invalid"));
        }
        Ok((field_number, wire_type))
    }

    pub fn read_bytes(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.remaining() < len {
            return Err(self.err(format!(
                "length-delimited field of {} bytes exceeds remaining {}",
                len,
                self.remaining()
            )));
        }
        let out = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    pub fn read_len_delimited(&mut self) -> Result<&'a [u8]> {
        let len = self.read_varint()? as usize;
        self.read_bytes(len)
    }

    pub fn read_fixed32(&mut self) -> Result<u32> {
        let b = self.read_bytes(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn read_fixed64(&mut self) -> Result<u64> {
        let b = self.read_bytes(8)?;
        Ok(u64::from_le_bytes([
            b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7],
        ]))
    }

    /// Skips a field body of the given wire type.
    pub fn skip_field(&mut self, wire_type: u32) -> Result<()> {
        match wire_type {
            WIRE_VARINT => {
                self.read_varint()?;
            }
            WIRE_FIXED64 => {
                self.read_bytes(8)?;
            }
            WIRE_LEN => {
                self.read_len_delimited()?;
            }
            WIRE_FIXED32 => {
                self.read_bytes(4)?;
            }
            other => return Err(self.err(format!("unsupported wire type {other}"))),
        }
        Ok(())
    }
}

/// Writes `[varint length][bytes]` records to an underlying writer.
pub struct FramedWriter<W: Write> {
    inner: W,
}

impl<W: Write> FramedWriter<W> {
    pub fn new(inner: W) -> Self {
        FramedWriter { inner }
    }

    pub fn write_record(&mut self, bytes: &[u8]) -> io::Result<()> {
        let mut len = Vec::with_capacity(10);
        encode_varint(bytes.len() as u64, &mut len);
        self.inner.write_all(&len)?;
        self.inner.write_all(bytes)
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

/// Reads `[varint length][bytes]` records from an underlying reader.
pub struct FramedReader<R: Read> {
    inner: R,
    offset: usize,
}

impl<R: Read> FramedReader<R> {
    pub fn new(inner: R) -> Self {
        FramedReader { inner, offset: 0 }
    }

    /// Returns the next record, or `None` at clean end of stream.
    pub fn next_record(&mut self) -> Result<Option<Vec<u8>>> {
        let mut len: u64 = 0;
        let mut shift = 0;
        let mut first = true;
        loop {
            let mut byte = [0u8; 1];
            match self.inner.read_exact(&mut byte) {
                Ok(()) => {}
                Err(e) if e.kind() == io::ErrorKind::UnexpectedEof && first => return Ok(None),
                Err(e) => return Err(e.into()),
            }
            first = false;
            self.offset += 1;
            len |= ((byte[0] & 0x7f) as u64) << shift;
            if byte[0] & 0x80 == 0 {
                break;
            }
            shift += 7;
            if shift >= 64 {
                return Err(Error::WireDecode {
                    offset: self.offset,
                    reason: "record length varint overflows".into(),
                });
            }
        }
        let mut buf = vec![0u8; len as usize];
        self.inner.read_exact(&mut buf)?;
        self.offset += len as usize;
        Ok(Some(buf))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn varint_roundtrip() {
        for v in [0u64, 1, 127, 128, 300, u32::MAX as u64, u64::MAX] {
            let mut buf = Vec::new();
            encode_varint(v, &mut buf);
            let mut cur = Cursor::new(&buf);
            assert_eq!(cur.read_varint().unwrap(), v);
            assert!(cur.is_empty());
        }
    }

    #[test]
    fn zigzag_roundtrip() {
        for v in [0i64, 1, -1, 2, -2, i64::MAX, i64::MIN] {
            assert_eq!(unzigzag64(zigzag64(v)), v);
        }
        for v in [0i32, -1, i32::MAX, i32::MIN] {
            assert_eq!(unzigzag32(zigzag32(v)), v);
        }
        // zigzag maps small magnitudes to small codes
        assert_eq!(zigzag64(-1), 1);
        assert_eq!(zigzag64(1), 2);
    }

    #[test]
    fn truncated_varint_reports_offset() {
        let buf = [0x80u8, 0x80];
        let mut cur = Cursor::new(&buf);
        let err = cur.read_varint().unwrap_err();
        match err {
            Error::WireDecode { offset, .. } => assert_eq!(offset, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn framed_roundtrip() {
        let mut w = FramedWriter::new(Vec::new());
        w.write_record(b"hello").unwrap();
        w.write_record(b"").unwrap();
        w.write_record(&[0u8; 200]).unwrap();
        let bytes = w.into_inner();
        let mut r = FramedReader::new(&bytes[..]);
        assert_eq!(r.next_record().unwrap().unwrap(), b"hello");
        assert_eq!(r.next_record().unwrap().unwrap(), b"");
        assert_eq!(r.next_record().unwrap().unwrap().len(), 200);
        assert!(r.next_record().unwrap().is_none());
    }
}
