//! Tensor serialization.
//!
//! Binary container layout (all integers and floats little-endian):
//!
//! ```text
//! 16 bytes   magic "COMPDIST-TENSOR1"
//! u32        rank
//! u64 x rank shape
//! f64 x n    components, row-major
//! ```
//!
//! The debug text form is one line with the space-separated shape followed by
//! one component per line. Floats are written with Rust's shortest
//! round-tripping representation.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::FormatError;
use crate::tensor::DenseTensor;

pub const MAGIC: &[u8; 16] = b"COMPDIST-TENSOR1";

// Refuse absurd headers before allocating.
const MAX_COMPONENTS: usize = 1 << 32;

pub fn write_tensor<W: Write>(mut w: W, t: &DenseTensor) -> Result<(), FormatError> {
    w.write_all(MAGIC)?;
    w.write_all(&(t.rank() as u32).to_le_bytes())?;
    for &d in t.shape() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for &x in t.data() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_tensor<R: Read>(mut r: R) -> Result<DenseTensor, FormatError> {
    let mut magic = [0u8; 16];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(FormatError::BadMagic {
            what: "tensor container".into(),
        });
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let rank = u32::from_le_bytes(b4) as usize;
    if rank == 0 || rank > 64 {
        return Err(FormatError::Invalid(format!("tensor container: bad rank {rank}")));
    }
    let mut shape = Vec::with_capacity(rank);
    let mut b8 = [0u8; 8];
    for _ in 0..rank {
        r.read_exact(&mut b8)?;
        shape.push(u64::from_le_bytes(b8) as usize);
    }
    let n = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&n| n <= MAX_COMPONENTS)
        .ok_or_else(|| FormatError::Invalid(format!("tensor container: shape {shape:?} too large")))?;
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut b8)?;
        data.push(f64::from_le_bytes(b8));
    }
    Ok(DenseTensor::new(shape, data)?)
}

pub fn save_tensor(path: &Path, t: &DenseTensor) -> Result<(), FormatError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_tensor(&mut w, t)?;
    w.flush()?;
    Ok(())
}

pub fn load_tensor(path: &Path) -> Result<DenseTensor, FormatError> {
    read_tensor(BufReader::new(fs::File::open(path)?))
}

pub fn write_tensor_text<W: Write>(mut w: W, t: &DenseTensor) -> Result<(), FormatError> {
    let shape: Vec<String> = t.shape().iter().map(|d| d.to_string()).collect();
    writeln!(w, "{}", shape.join(" "))?;
    for x in t.data() {
        writeln!(w, "{x:?}")?;
    }
    Ok(())
}

pub fn read_tensor_text<R: BufRead>(r: R) -> Result<DenseTensor, FormatError> {
    let what = || "tensor text".to_string();
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| FormatError::Parse {
            what: what(),
            line: 1,
            message: "missing shape line".into(),
        })??;
    let shape = header
        .split_whitespace()
        .map(|s| s.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| FormatError::Parse {
            what: what(),
            line: 1,
            message: e.to_string(),
        })?;
    let mut data = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        data.push(line.trim().parse::<f64>().map_err(|e| FormatError::Parse {
            what: what(),
            line: i + 2,
            message: e.to_string(),
        })?);
    }
    Ok(DenseTensor::new(shape, data)?)
}

/// Writes one token per line; the line order defines the index.
pub fn write_vocabulary(path: &Path, tokens: &[String]) -> Result<(), FormatError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for t in tokens {
        writeln!(w, "{t}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vocabulary(path: &Path) -> Result<Vec<String>, FormatError> {
    let text = fs::read_to_string(path)?;
    Ok(text.lines().map(str::to_string).collect())
}
