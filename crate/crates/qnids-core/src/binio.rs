//! Little-endian primitives shared by the binary file formats.

use std::io::{self, Read, Write};

/// Upper bound on a single stored array, as a plausibility check against
/// corrupt length fields (not a format limit).
pub(crate) const MAX_ELEMENTS: usize = 1 << 31;

pub(crate) trait WriteLe: Write {
    fn put_u8(&mut self, v: u8) -> io::Result<()> {
        self.write_all(&[v])
    }
    fn put_u32(&mut self, v: u32) -> io::Result<()> {
        self.write_all(&v.to_le_bytes())
    }
    fn put_u64(&mut self, v: u64) -> io::Result<()> {
        self.write_all(&v.to_le_bytes())
    }
    fn put_f64(&mut self, v: f64) -> io::Result<()> {
        self.write_all(&v.to_le_bytes())
    }
    fn put_str(&mut self, s: &str) -> io::Result<()> {
        self.put_u64(s.len() as u64)?;
        self.write_all(s.as_bytes())
    }
}

impl<W: Write> WriteLe for W {}

pub(crate) trait ReadLe: Read {
    fn take_u8(&mut self) -> io::Result<u8> {
        let mut b = [0u8; 1];
        self.read_exact(&mut b)?;
        Ok(b[0])
    }
    fn take_u32(&mut self) -> io::Result<u32> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }
    fn take_u64(&mut self) -> io::Result<u64> {
        let mut b = [0u8; 8];
        self.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
    fn take_f64(&mut self) -> io::Result<f64> {
        let mut b = [0u8; 8];
        self.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }
    /// Length-prefixed UTF-8; `max_len` guards against corrupt prefixes.
    fn take_str(&mut self, max_len: usize) -> io::Result<String> {
        let n = self.take_u64()?;
        if n as usize > max_len {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("string length {n} exceeds limit {max_len}"),
            ));
        }
        let mut buf = vec![0u8; n as usize];
        self.read_exact(&mut buf)?;
        String::from_utf8(buf)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
    }
}

impl<R: Read> ReadLe for R {}
