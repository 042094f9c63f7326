//! Binary IQ sample files.
//!
//! The on-disk format is deliberately minimal for interoperability with
//! common SDR tooling: little-endian IEEE 754 binary64 pairs, in-phase
//! component first, no header and no trailer. Metadata travels in a JSON
//! sidecar written by the command line front-end, not in the sample file.

use std::fs;
use std::io::{self, ErrorKind};
use std::path::Path;

use mcmod_core::Complex64;

/// Serializes complex samples as little-endian f64 (re, im) pairs.
pub fn encode(samples: &[Complex64]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(samples.len() * 16);
    for s in samples {
        bytes.extend_from_slice(&s.re.to_le_bytes());
        bytes.extend_from_slice(&s.im.to_le_bytes());
    }
    bytes
}

/// Parses little-endian f64 (re, im) pairs. Fails on lengths that are not
/// a whole number of 16-byte pairs.
pub fn decode(bytes: &[u8]) -> io::Result<Vec<Complex64>> {
    if !bytes.len().is_multiple_of(16) {
        return Err(io::Error::new(
            ErrorKind::InvalidData,
            format!(
                "IQ data must be a whole number of 16-byte sample pairs, got {} bytes",
                bytes.len()
            ),
        ));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|pair| {
            let re = f64::from_le_bytes(pair[..8].try_into().expect("8-byte chunk"));
            let im = f64::from_le_bytes(pair[8..].try_into().expect("8-byte chunk"));
            Complex64::new(re, im)
        })
        .collect())
}

/// Writes samples to a file in the interleaved binary64 format.
pub fn write_iq(path: &Path, samples: &[Complex64]) -> io::Result<()> {
    fs::write(path, encode(samples))
}

/// Reads samples from a file in the interleaved binary64 format.
pub fn read_iq(path: &Path) -> io::Result<Vec<Complex64>> {
    decode(&fs::read(path)?)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
