//! Matrix export: sparse JSON triplets and a dense little-endian dump.
//!
//! The binary layout is `rows: u64`, `cols: u64`, then `rows·cols` pairs of
//! `f64` (re, im) in column-major order.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

use super::DerivativeOperator;
use crate::error::{PqcError, Result};

/// `{p, N, order, entries: [[row, col, re, im], …]}` with exact zeros omitted.
pub fn sparse_json(op: &DerivativeOperator) -> Value {
    let m = op.matrix();
    let mut entries = Vec::new();
    for col in 0..m.ncols() {
        for row in 0..m.nrows() {
            let v = m[(row, col)];
            if v.re != 0.0 || v.im != 0.0 {
                entries.push(json!([row, col, v.re, v.im]));
            }
        }
    }
    json!({
        "p": op.prime().get(),
        "N": op.level(),
        "order": "dual-enumeration",
        "entries": entries,
    })
}

pub fn write_dense_binary<W: Write>(m: &DMatrix<Complex64>, mut w: W) -> Result<()> {
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * m.len());
    for v in m.iter() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_dense_binary<R: Read>(mut r: R) -> Result<DMatrix<Complex64>> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let count =
        rows.checked_mul(cols).ok_or_else(|| PqcError::InvalidSpec(format!("matrix shape {rows}×{cols} overflows")))?;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        data.push(Complex64::new(re, f64::from_le_bytes(word)));
    }
    Ok(DMatrix::from_vec(rows, cols, data))
}
