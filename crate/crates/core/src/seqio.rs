//! Sequence files.
//!
//! Every file starts with a header line `alphabet=<l>`. The body depends on
//! the extension:
//!
//! * `.sym`: raw bytes, one symbol per byte.
//! * anything else (normally `.txt`): ASCII digits when `l <= 10`, with
//!   whitespace ignored; whitespace- or comma-separated integers otherwise.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::symbolic::{parse_symbols, Alphabet, SymbolSequence};

fn is_raw(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("sym"))
}

fn split_header(bytes: &[u8]) -> Result<(Alphabet, &[u8])> {
    let end = bytes.iter().position(|&b| b == b'\n').unwrap_or(bytes.len());
    let header = std::str::from_utf8(&bytes[..end])
        .map_err(|_| Error::Parse {
            line: 1,
            message: "header is not UTF-8".into(),
        })?
        .trim();
    let size = header
        .strip_prefix("alphabet=")
        .and_then(|v| v.trim().parse::<usize>().ok())
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("expected `alphabet=<l>`, found {header:?}"),
        })?;
    let body = if end < bytes.len() { &bytes[end + 1..] } else { &[] };
    Ok((Alphabet::new(size)?, body))
}

pub fn decode(bytes: &[u8], raw: bool) -> Result<SymbolSequence> {
    let (alphabet, body) = split_header(bytes)?;
    let data = if raw {
        body.to_vec()
    } else {
        let text = std::str::from_utf8(body).map_err(|_| Error::Parse {
            line: 2,
            message: "body is not UTF-8".into(),
        })?;
        parse_symbols(alphabet, text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse { line: 2, message },
            other => other,
        })?
    };
    SymbolSequence::new(alphabet, data)
}

pub fn encode(seq: &SymbolSequence, raw: bool) -> Vec<u8> {
    let mut out = format!("alphabet={}\n", seq.alphabet().size()).into_bytes();
    if raw {
        out.extend_from_slice(seq.as_slice());
    } else {
        out.extend_from_slice(seq.to_string().as_bytes());
        out.push(b'\n');
    }
    out
}

pub fn read_sequence(path: impl AsRef<Path>) -> Result<SymbolSequence> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, is_raw(path))
}

pub fn write_sequence(path: impl AsRef<Path>, seq: &SymbolSequence) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode(seq, is_raw(path)))
        .map_err(|e| Error::io(path, e))
}
