//! File formats.
//!
//! * Matrix text: the dimension on the first data line, then one first-column
//!   value per line. Blank lines and lines starting with `#` are skipped.
//! * Signal and report files: JSON through `serde`.
//! * Sample sets: little-endian `u64 d`, `u64 s`, then `s·d` `f64` values
//!   row-major.

use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::covariance::SampleSet;
use crate::toeplitz::SymToeplitz;
use crate::{Error, Result};

pub fn matrix_to_text(t: &SymToeplitz) -> String {
    let mut s = format!("{}\n", t.d());
    for v in t.col() {
        s.push_str(&format!("{v:e}\n"));
    }
    s
}

pub fn matrix_from_text(text: &str) -> Result<SymToeplitz> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, head) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty matrix file".into() })?;
    let d: usize = head
        .parse()
        .map_err(|e| Error::Parse { line, msg: format!("bad dimension {head:?}: {e}") })?;
    let mut col = Vec::with_capacity(d);
    let mut last = line;
    for (line, l) in lines {
        let v: f64 = l.parse().map_err(|e| Error::Parse { line, msg: format!("bad value {l:?}: {e}") })?;
        if !v.is_finite() {
            return Err(Error::Parse { line, msg: format!("non-finite value {l}") });
        }
        col.push(v);
        last = line;
    }
    if col.len() != d {
        return Err(Error::Parse { line: last, msg: format!("expected {d} values, found {}", col.len()) });
    }
    SymToeplitz::new(col)
}

pub fn read_matrix(path: &Path) -> Result<SymToeplitz> {
    matrix_from_text(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, t: &SymToeplitz) -> Result<()> {
    std::fs::write(path, matrix_to_text(t))?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn write_samples<W: Write>(mut w: W, x: &SampleSet) -> Result<()> {
    w.write_all(&(x.d() as u64).to_le_bytes())?;
    w.write_all(&(x.samples() as u64).to_le_bytes())?;
    for v in x.rows() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_samples<R: Read>(mut r: R) -> Result<SampleSet> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let d = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let s = u64::from_le_bytes(word) as usize;
    let n = d.checked_mul(s).ok_or_else(|| Error::Invalid(format!("header {d}×{s} overflows")))?;
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut word)?;
        data.push(f64::from_le_bytes(word));
    }
    SampleSet::from_rows(d, s, data)
}
